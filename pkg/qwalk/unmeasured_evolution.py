"""Coherent multi-step evolution of a single plane-wave mode."""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .utils import ZERO_AMPLITUDE, canonical_offset

logger = logging.getLogger(__name__)

# Below this Q the one-step operator is diagonal and the eigenphase formulas are 0/0.
DEGENERATE_Q = 1e-14
NORM_TOLERANCE = 1e-12


def step_operator(k, l: float, theta: float) -> np.ndarray:
    """
    One-step operator R(theta) U acting on the coin pair of a mode e^{ikx}.

    Broadcasts over an array of k; the result has shape k.shape + (2, 2).

    Examples:
        >>> np.allclose(step_operator(1.0, 0.0, 0.3), [[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
        True
    """
    k = np.asarray(k, dtype=float)
    right = np.exp(-1j * k * l)
    left = np.exp(1j * k * l)
    c, s = np.cos(theta), np.sin(theta)
    m = np.empty(k.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = right * c
    m[..., 0, 1] = -left * s
    m[..., 1, 0] = right * s
    m[..., 1, 1] = left * c
    return m


def _q_and_alpha(k, l, theta):
    kl = np.asarray(k, dtype=float) * l
    cos_theta = np.cos(theta)
    Q = np.sqrt((np.sin(kl) * cos_theta) ** 2 + np.sin(theta) ** 2)
    # Q >= 0, so atan2 returns the principal arctangent of the ratio
    alpha = np.arctan2(np.cos(kl) * cos_theta, Q)
    return kl, Q, alpha


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenphase form of the one-step operator at one (k, l, theta)."""
    alpha: float
    Q: float
    lambda1: complex
    lambda2: complex
    a: complex
    b1: complex
    b2: complex
    matrix: np.ndarray
    degenerate: bool = False

    def eigenvectors(self) -> np.ndarray:
        """
        Normalized eigenvectors as the columns of a 2x2 matrix (lambda1, lambda2).

        The vector (a, b) vanishes when sin(theta) = 0; the eigenvector is then
        taken from whichever row of M - lambda I still carries information.
        """
        m = self.matrix
        columns = []
        for lam, b in ((self.lambda1, self.b1), (self.lambda2, self.b2)):
            candidates = [
                np.array([self.a, b]),
                np.array([m[0, 1], lam - m[0, 0]]),
                np.array([lam - m[1, 1], m[1, 0]]),
            ]
            best = max(candidates, key=np.linalg.norm)
            norm = np.linalg.norm(best)
            if norm < ZERO_AMPLITUDE:
                # M is a multiple of the identity
                best = np.array([1.0, 0.0]) if not columns else np.array([0.0, 1.0])
                norm = 1.0
            columns.append(best / norm)
        return np.column_stack(columns).astype(complex)


def eigensystem(k: float, l: float, theta: float) -> SpectralDecomposition:
    """
    Eigenvalues -i e^{i alpha}, i e^{-i alpha} of the one-step operator and the
    unnormalized eigenvector components (a, b1), (a, b2).

    Args:
        k: Wavenumber
        l: Step length
        theta: Coin rotation angle

    Returns:
        SpectralDecomposition; when Q <= 1e-14 the operator is diagonal and the
        eigenvalues are read off its diagonal (degenerate flag set)
    """
    kl, Q, alpha = _q_and_alpha(k, l, theta)
    kl, Q, alpha = float(kl), float(Q), float(alpha)
    matrix = step_operator(k, l, theta)

    if Q <= DEGENERATE_Q:
        logger.debug(f"eigensystem: degenerate Q={Q:.3e} at k={k}, theta={theta}")
        return SpectralDecomposition(
            alpha=alpha, Q=Q, lambda1=complex(matrix[0, 0]), lambda2=complex(matrix[1, 1]),
            a=complex(matrix[0, 1]), b1=0j, b2=0j, matrix=matrix, degenerate=True,
        )

    a = np.exp(1j * kl) * np.sin(theta)
    # sqrt of the radicand -4Q^2 taken on the principal branch, 2iQ
    b_center = -1j * np.sin(kl) * np.cos(theta)
    return SpectralDecomposition(
        alpha=alpha,
        Q=Q,
        lambda1=complex(-1j * np.exp(1j * alpha)),
        lambda2=complex(1j * np.exp(-1j * alpha)),
        a=complex(a),
        b1=complex(b_center + 1j * Q),
        b2=complex(b_center - 1j * Q),
        matrix=matrix,
    )


@dataclass(frozen=True)
class ModeEvolutionInput:
    """Initial mode (a_R|R> + a_L|L>) e^{ik(x - l0)} and the walk parameters."""
    a_R: complex
    a_L: complex
    k: float
    l: float
    theta: float
    t: int
    l0: float = 0.0

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"step count must be non-negative, got {self.t}")
        if self.l <= 0:
            raise ValueError(f"step length must be positive, got {self.l}")
        norm = abs(self.a_R) ** 2 + abs(self.a_L) ** 2
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"coin amplitudes not normalized (|a_R|^2 + |a_L|^2 = {norm!r})")

    @property
    def is_real(self) -> bool:
        return np.isrealobj(self.a_R) and np.isrealobj(self.a_L) \
            and not isinstance(self.a_R, complex) and not isinstance(self.a_L, complex)


@dataclass(frozen=True)
class ModeEvolutionResult:
    """
    Coin-resolved mode after t coherent steps.

    phi_R and phi_L are the coefficients of e^{ikx}; the same state reads
    sqrt(P1) e^{ik(x - l0 + L1)} on |R> and sqrt(P2) e^{ik(x - l0 + L2)} on |L>.
    """
    P1: float
    L1: float
    P2: float
    L2: float
    phi_R: complex
    phi_L: complex
    k: float
    t: int
    l0: float = 0.0
    method: str = "closed-form"

    @property
    def L1_defined(self) -> bool:
        return bool(np.isfinite(self.L1))

    @property
    def L2_defined(self) -> bool:
        return bool(np.isfinite(self.L2))


def _quarter_turns(t) -> np.ndarray:
    """i^t computed exactly from t mod 4."""
    return np.array([1, 1j, -1, -1j])[np.asarray(t) % 4]


def _coefficients(a_R, a_L, kl, Q, alpha, theta, t):
    """Real/imaginary parts (X_R, Y_R, X_L, Y_L) of i^{-t} phi for the parity of t."""
    cos_t, sin_t = np.cos(t * alpha), np.sin(t * alpha)
    c, s = np.cos(theta), np.sin(theta)
    sin_kl, cos_kl = np.sin(kl), np.cos(kl)
    if t % 2 == 0:
        A = a_R * cos_t + a_L * cos_kl * s * sin_t / Q
        B = (a_R * c + a_L * s) * sin_kl * sin_t / Q
        C = a_L * cos_t - a_R * cos_kl * s * sin_t / Q
        D = (a_R * s - a_L * c) * sin_kl * sin_t / Q
        return A, B, C, D
    E = -(a_R * c + a_L * s) * sin_kl * cos_t / Q
    F = -a_R * sin_t + a_L * cos_kl * s * cos_t / Q
    G = (-a_R * s + a_L * c) * sin_kl * cos_t / Q
    H = -a_L * sin_t - a_R * cos_kl * s * cos_t / Q
    return E, F, G, H


def closed_form_amplitudes(a_R: float, a_L: float, k, l: float, theta: float,
                           t: int, l0: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients (phi_R, phi_L) of e^{ikx} after t coherent steps, evaluated over an array of k.

    Nodes with a degenerate Q are evaluated by direct matrix power instead.

    Returns:
        Tuple of complex arrays with the shape of k
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    k = np.asarray(k, dtype=float)
    kl, Q, alpha = _q_and_alpha(k, l, theta)
    degenerate = Q <= DEGENERATE_Q
    safe_Q = np.where(degenerate, 1.0, Q)

    X_R, Y_R, X_L, Y_L = _coefficients(float(a_R), float(a_L), kl, safe_Q, alpha, theta, t)
    phase = _quarter_turns(t) * np.exp(-1j * k * l0)
    phi_R = phase * (X_R + 1j * Y_R)
    phi_L = phase * (X_L + 1j * Y_L)

    if np.any(degenerate):
        from .oracle import mode_matrix_power
        logger.debug(f"closed_form_amplitudes: {int(np.sum(degenerate))} degenerate nodes via matrix power")
        d_R, d_L = mode_matrix_power(a_R, a_L, k[degenerate], l, theta, t)
        shift = np.exp(-1j * k[degenerate] * l0)
        phi_R = np.array(phi_R, dtype=complex)
        phi_L = np.array(phi_L, dtype=complex)
        phi_R[degenerate] = d_R * shift
        phi_L[degenerate] = d_L * shift
    return phi_R, phi_L


def _branch(phi: complex, k: float, l0: float) -> Tuple[float, float]:
    P = float(abs(phi) ** 2)
    if P < ZERO_AMPLITUDE or k == 0:
        return P, float("nan")
    return P, float(canonical_offset(np.angle(phi) + k * l0, k))


def _result_from_amplitudes(data: ModeEvolutionInput, phi_R: complex, phi_L: complex, method: str) -> ModeEvolutionResult:
    P1, L1 = _branch(phi_R, data.k, data.l0)
    P2, L2 = _branch(phi_L, data.k, data.l0)
    return ModeEvolutionResult(P1=P1, L1=L1, P2=P2, L2=L2, phi_R=complex(phi_R), phi_L=complex(phi_L),
                               k=data.k, t=data.t, l0=data.l0, method=method)


def evolve_mode_oracle(data: ModeEvolutionInput) -> ModeEvolutionResult:
    """Evolve a mode by direct powers of the one-step operator (accepts complex coin amplitudes)."""
    from .oracle import mode_matrix_power

    phi_R, phi_L = mode_matrix_power(data.a_R, data.a_L, data.k, data.l, data.theta, data.t)
    shift = np.exp(-1j * data.k * data.l0)
    return _result_from_amplitudes(data, complex(phi_R) * shift, complex(phi_L) * shift, "oracle")


def evolve_mode_closed_form(data: ModeEvolutionInput) -> ModeEvolutionResult:
    """
    Evolve a mode through the eigenphase closed form.

    Probabilities come from the sums of squares of the parity coefficients and
    the offsets from kL = t*pi/2 + atan2(numerator, denominator). Degenerate Q
    or complex coin amplitudes fall through to evolve_mode_oracle.

    Args:
        data: Validated mode input

    Returns:
        ModeEvolutionResult (method "closed-form" or "oracle")
    """
    kl, Q, alpha = (float(v) for v in _q_and_alpha(data.k, data.l, data.theta))
    if Q <= DEGENERATE_Q or not data.is_real:
        logger.debug(f"closed form unavailable (Q={Q:.3e}, real={data.is_real}); using matrix power")
        return evolve_mode_oracle(data)

    X_R, Y_R, X_L, Y_L = (float(v) for v in _coefficients(
        float(data.a_R), float(data.a_L), kl, Q, alpha, data.theta, data.t))
    quarter = (data.t % 4) * np.pi / 2.0

    P1 = X_R ** 2 + Y_R ** 2
    P2 = X_L ** 2 + Y_L ** 2
    if P1 < ZERO_AMPLITUDE or data.k == 0:
        L1 = float("nan")
    else:
        L1 = float(canonical_offset(quarter + np.arctan2(Y_R, X_R), data.k))
    if P2 < ZERO_AMPLITUDE or data.k == 0:
        L2 = float("nan")
    else:
        L2 = float(canonical_offset(quarter + np.arctan2(Y_L, X_L), data.k))

    shift = complex(_quarter_turns(data.t)) * np.exp(-1j * data.k * data.l0)
    return ModeEvolutionResult(
        P1=P1, L1=L1, P2=P2, L2=L2,
        phi_R=complex(shift * (X_R + 1j * Y_R)),
        phi_L=complex(shift * (X_L + 1j * Y_L)),
        k=data.k, t=data.t, l0=data.l0, method="closed-form",
    )


def evolve_mode(data: ModeEvolutionInput) -> ModeEvolutionResult:
    """Closed form when it applies, matrix power otherwise."""
    return evolve_mode_closed_form(data)
