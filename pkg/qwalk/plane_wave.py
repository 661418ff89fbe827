"""Plane-wave algebra and the measured-per-step walk of a single mode."""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .utils import ZERO_AMPLITUDE, ArrayOrFloat, canonical_offset, offsets_equivalent, timing_decorator

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PlaneWaveMode:
    """A plane wave amplitude * e^{ik(x + offset)}, offset canonical in (-pi/k, pi/k]."""
    amplitude: float
    k: float
    offset: float
    cancelled: bool = False

    @property
    def phasor(self) -> complex:
        """Complex coefficient of e^{ikx}."""
        return self.amplitude * np.exp(1j * self.k * self.offset)

    def value(self, x: ArrayOrFloat) -> ArrayOrFloat:
        return self.amplitude * np.exp(1j * self.k * (np.asarray(x) + self.offset))

    def same_wave(self, other: "PlaneWaveMode", tol: float = 1e-12) -> bool:
        """Equality with offsets compared modulo 2*pi/k."""
        if self.k != other.k or abs(self.amplitude - other.amplitude) > tol:
            return False
        if self.cancelled or other.cancelled:
            return True
        return offsets_equivalent(self.offset, other.offset, self.k, tol)


def combine_modes(A: float, a: float, B: float, b: float, k: float) -> PlaneWaveMode:
    """
    Combine A e^{ik(x+a)} + B e^{ik(x+b)} into one plane wave C e^{ik(x+c)}.

    Args:
        A: First amplitude (>= 0)
        a: First offset
        B: Second amplitude (>= 0)
        b: Second offset
        k: Common wavenumber (nonzero)

    Returns:
        Combined mode; on destructive cancellation (C < 1e-14) the offset is 0
        and the mode is flagged as cancelled

    Raises:
        ValueError: On negative amplitudes or k = 0

    Examples:
        >>> combine_modes(1.0, 0.0, 1.0, 0.0, 1.0).amplitude
        2.0
    """
    if A < 0 or B < 0:
        raise ValueError(f"amplitudes must be non-negative, got A={A}, B={B}")
    if k == 0:
        raise ValueError("k must be nonzero to recover a phase offset")

    alpha = A * np.sin(k * a) + B * np.sin(k * b)
    beta = A * np.cos(k * a) + B * np.cos(k * b)
    C = float(np.hypot(alpha, beta))
    if C < ZERO_AMPLITUDE:
        logger.debug(f"combine_modes: destructive cancellation (C={C:.3e}) at k={k}")
        return PlaneWaveMode(amplitude=C, k=k, offset=0.0, cancelled=True)
    return PlaneWaveMode(amplitude=C, k=k, offset=canonical_offset(np.arctan2(alpha, beta), k))


@dataclass(frozen=True)
class MeasuredStepResult:
    """
    Outcome distribution of one measured step of a plane-wave mode.

    The R branch continues as sqrt(p_R) e^{ik(x + l1)} and the L branch as
    sqrt(p_L) e^{ik(x + l2)}. An offset is NaN when its branch probability
    is below 1e-14 (or k = 0).
    """
    p_R: float
    l1: float
    p_L: float
    l2: float
    k: float
    l: float

    @property
    def l1_defined(self) -> bool:
        return bool(np.isfinite(self.l1))

    @property
    def l2_defined(self) -> bool:
        return bool(np.isfinite(self.l2))

    @property
    def degenerate(self) -> bool:
        return not (self.l1_defined and self.l2_defined)

    def branch_amplitudes(self) -> Tuple[complex, complex]:
        """Reconstructed coefficients of e^{ikx} on the R and L branches."""
        psi_R = np.sqrt(self.p_R) * np.exp(1j * self.k * self.l1) if self.l1_defined else 0j
        psi_L = np.sqrt(self.p_L) * np.exp(1j * self.k * self.l2) if self.l2_defined else 0j
        return complex(psi_R), complex(psi_L)


def branch_amplitudes(a_R, a_L, theta, k, l) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coin amplitudes of R(theta) U applied to (a_R|R> + a_L|L>) e^{ikx}.

    Broadcasts over array arguments. Each returned amplitude multiplies e^{ikx}.

    Returns:
        Tuple of (psi_R, psi_L) complex arrays
    """
    k = np.asarray(k, dtype=float)
    right = np.exp(-1j * k * l)  # R moves +l
    left = np.exp(1j * k * l)
    c, s = np.cos(theta), np.sin(theta)
    psi_R = c * a_R * right - s * a_L * left
    psi_L = s * a_R * right + c * a_L * left
    return psi_R, psi_L


def closed_form_probabilities(a_R, a_L, theta, k, l) -> Tuple[np.ndarray, np.ndarray]:
    """Branch probabilities written out for real coin amplitudes."""
    c, s = np.cos(theta), np.sin(theta)
    cross = 2.0 * a_R * a_L * s * c * np.cos(2.0 * np.asarray(k, dtype=float) * l)
    p_R = (a_R * c) ** 2 + (a_L * s) ** 2 - cross
    p_L = (a_R * s) ** 2 + (a_L * c) ** 2 + cross
    return p_R, p_L


def _check_real_coin(a_R, a_L):
    if np.iscomplexobj(a_R) or np.iscomplexobj(a_L) or isinstance(a_R, complex) or isinstance(a_L, complex):
        raise TypeError("measured_step takes real coin amplitudes; use the oracle for complex coin states")
    norm = float(a_R) ** 2 + float(a_L) ** 2
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise ValueError(f"coin amplitudes not normalized (a_R^2 + a_L^2 = {norm!r})")


def _offsets(psi: np.ndarray, p: np.ndarray, k: np.ndarray) -> np.ndarray:
    offset = canonical_offset(np.angle(psi), k)
    return np.where((p < ZERO_AMPLITUDE) | (k == 0), np.nan, offset)


def measured_step(a_R: float, a_L: float, theta: float, k: float, l: float) -> MeasuredStepResult:
    """
    One step of a plane-wave mode followed by a coin measurement.

    Args:
        a_R: Real |R> amplitude
        a_L: Real |L> amplitude
        theta: Coin rotation angle
        k: Wavenumber
        l: Step length

    Returns:
        MeasuredStepResult with branch probabilities and phase offsets

    Raises:
        TypeError: If a coin amplitude is complex
        ValueError: If the coin state is not normalized
    """
    _check_real_coin(a_R, a_L)
    psi_R, psi_L = branch_amplitudes(float(a_R), float(a_L), theta, k, l)
    p_R = float(np.abs(psi_R) ** 2)
    p_L = float(np.abs(psi_L) ** 2)
    k_arr = np.asarray(k, dtype=float)
    l1 = float(_offsets(psi_R, p_R, k_arr))
    l2 = float(_offsets(psi_L, p_L, k_arr))
    if not (np.isfinite(l1) and np.isfinite(l2)):
        logger.debug(f"measured_step: degenerate branch at k={k}, theta={theta} (p_R={p_R:.3e}, p_L={p_L:.3e})")
    return MeasuredStepResult(p_R=p_R, l1=l1, p_L=p_L, l2=l2, k=float(k), l=float(l))


def measured_moments(step: MeasuredStepResult, t: int) -> Tuple[float, float]:
    """
    Mean and variance of the phase displacement after t measured steps.

    mean = t (p_R l1 + p_L l2), variance = t p_R p_L (l1 - l2)^2; a branch
    whose offset is undefined carries no displacement.
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    l1 = step.l1 if step.l1_defined else 0.0
    l2 = step.l2 if step.l2_defined else 0.0
    mean = t * (step.p_R * l1 + step.p_L * l2)
    if step.degenerate:
        return float(mean), 0.0
    variance = t * step.p_R * step.p_L * (l1 - l2) ** 2
    return float(mean), float(variance)


def measured_schedule(a_R: float, a_L: float, thetas: Sequence[float], k: float, l: float) -> List[MeasuredStepResult]:
    """Measured steps under a per-step sequence of coin angles (coin re-initialized each step)."""
    return [measured_step(a_R, a_L, theta, k, l) for theta in thetas]


def schedule_moments(steps: Sequence[MeasuredStepResult]) -> Tuple[float, float]:
    """Accumulate mean and variance over independent measured steps."""
    mean, variance = 0.0, 0.0
    for step in steps:
        step_mean, step_variance = measured_moments(step, 1)
        mean += step_mean
        variance += step_variance
    return mean, variance


@dataclass(frozen=True)
class ScanRow:
    """One sample of a displacement scan."""
    value: float
    l1: float
    l2: float
    p_R: float
    p_L: float
    flagged: bool


@timing_decorator
def displacement_scan(axis: str, start: float, stop: float, samples: int,
                      a_R: float, a_L: float, theta: float = 0.0, k: float = 1.0,
                      l: float = 0.01, endpoint: bool = False) -> List[ScanRow]:
    """
    Tabulate measured-step offsets while sweeping theta or k.

    Args:
        axis: "theta" or "k"
        start: First axis value
        stop: Last axis value (excluded unless endpoint)
        samples: Number of rows (>= 2)
        a_R: Real |R> amplitude
        a_L: Real |L> amplitude
        theta: Coin angle (ignored when axis == "theta")
        k: Wavenumber (ignored when axis == "k")
        l: Step length
        endpoint: Include stop

    Returns:
        List of ScanRow in axis order; rows with an undefined offset are flagged
    """
    if axis not in ("theta", "k"):
        raise ValueError(f"scan axis must be 'theta' or 'k', got {axis!r}")
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    if not (np.isfinite(start) and np.isfinite(stop)):
        raise ValueError(f"scan range must be finite, got [{start}, {stop}]")
    _check_real_coin(a_R, a_L)

    values = np.linspace(start, stop, samples, endpoint=endpoint)
    thetas = values if axis == "theta" else np.full(samples, theta)
    ks = values if axis == "k" else np.full(samples, float(k))

    psi_R, psi_L = branch_amplitudes(float(a_R), float(a_L), thetas, ks, l)
    p_R = np.abs(psi_R) ** 2
    p_L = np.abs(psi_L) ** 2
    l1 = _offsets(psi_R, p_R, ks)
    l2 = _offsets(psi_L, p_L, ks)
    flagged = ~(np.isfinite(l1) & np.isfinite(l2))
    if flagged.any():
        logger.info(f"displacement_scan: {int(flagged.sum())} degenerate rows flagged")

    return [
        ScanRow(float(v), float(a), float(b), float(pr), float(pl), bool(f))
        for v, a, b, pr, pl, f in zip(values, l1, l2, p_R, p_L, flagged)
    ]
