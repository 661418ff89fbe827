"""Coined quantum walk of a particle on a one-dimensional lattice."""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .utils import timing_decorator

logger = logging.getLogger(__name__)

UNITARY_TOLERANCE = 1e-12


class OperatorOrder(Enum):
    """Order of the coin and shift operators within one step."""
    COIN_THEN_SHIFT = "coin-then-shift"
    SHIFT_THEN_COIN = "shift-then-coin"


@dataclass(frozen=True)
class CoinSpec:
    """
    A unitary 2x2 coin, either parametrized by four angles or given directly.

    The parametrized coin is
    e^{i eta}/sqrt(2) diag(e^{i phi}, e^{-i phi}) [[e^{i theta_c}, e^{-i theta_c}],
    [e^{i theta_c}, -e^{-i theta_c}]] diag(e^{i varphi}, e^{-i varphi});
    all angles zero gives the Hadamard coin.
    """
    eta: float = 0.0
    phi: float = 0.0
    theta_c: float = 0.0
    varphi: float = 0.0
    matrix: Optional[np.ndarray] = field(default=None, compare=False, repr=False)

    @classmethod
    def hadamard(cls) -> "CoinSpec":
        return cls()

    @classmethod
    def identity(cls) -> "CoinSpec":
        return cls(matrix=np.eye(2, dtype=complex))

    @classmethod
    def rotation(cls, theta: float) -> "CoinSpec":
        """Real rotation R(theta) = [[cos, -sin], [sin, cos]]."""
        c, s = np.cos(theta), np.sin(theta)
        return cls(matrix=np.array([[c, -s], [s, c]], dtype=complex))

    @classmethod
    def from_matrix(cls, matrix) -> "CoinSpec":
        """
        Wrap an explicit coin matrix.

        Args:
            matrix: 2x2 array-like

        Returns:
            CoinSpec holding a copy of the matrix

        Raises:
            ValueError: If the matrix is not 2x2 or not unitary to 1e-12
        """
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"coin matrix must be 2x2, got shape {m.shape}")
        deviation = np.max(np.abs(m @ m.conj().T - np.eye(2)))
        if deviation > UNITARY_TOLERANCE:
            raise ValueError(f"coin matrix is not unitary (max |M M^dagger - I| = {deviation:.3e})")
        m.setflags(write=False)
        return cls(matrix=m)


def coin_matrix(spec: CoinSpec) -> np.ndarray:
    """
    Realize a coin as a 2x2 complex matrix.

    Args:
        spec: Coin parameters or explicit matrix

    Returns:
        Unitary 2x2 complex array

    Raises:
        ValueError: If any angle is not finite

    Examples:
        >>> np.allclose(coin_matrix(CoinSpec.hadamard()), [[1, 1], [1, -1]] / np.sqrt(2))
        True
    """
    if spec.matrix is not None:
        return np.array(spec.matrix, dtype=complex)

    angles = (spec.eta, spec.phi, spec.theta_c, spec.varphi)
    if not all(np.isfinite(a) for a in angles):
        raise ValueError(f"coin angles must be finite, got {angles}")

    left = np.diag([np.exp(1j * spec.phi), np.exp(-1j * spec.phi)])
    middle = np.array([
        [np.exp(1j * spec.theta_c), np.exp(-1j * spec.theta_c)],
        [np.exp(1j * spec.theta_c), -np.exp(-1j * spec.theta_c)],
    ])
    right = np.diag([np.exp(1j * spec.varphi), np.exp(-1j * spec.varphi)])
    return np.exp(1j * spec.eta) / np.sqrt(2.0) * (left @ middle @ right)


@dataclass
class LatticeWalkState:
    """
    Coin-resolved amplitudes on a contiguous run of lattice sites.

    Row i of `amplitudes` holds (a_R, a_L) at site `min_site + i`; the
    physical position of a site is site * step_length.
    """
    amplitudes: np.ndarray      # shape (n_sites, 2), complex
    min_site: int = 0
    step_length: float = 1.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.ndim != 2 or self.amplitudes.shape[1] != 2:
            raise ValueError(f"amplitudes must have shape (n_sites, 2), got {self.amplitudes.shape}")
        if self.step_length <= 0:
            raise ValueError(f"step_length must be positive, got {self.step_length}")

    @classmethod
    def point(cls, a_R: complex = 1.0, a_L: complex = 0.0, site: int = 0,
              step_length: float = 1.0) -> "LatticeWalkState":
        """Particle localized at one site with coin state a_R|R> + a_L|L>."""
        norm = abs(a_R) ** 2 + abs(a_L) ** 2
        if abs(norm - 1.0) > UNITARY_TOLERANCE:
            raise ValueError(f"coin state not normalized (|a_R|^2 + |a_L|^2 = {norm!r})")
        return cls(np.array([[a_R, a_L]], dtype=complex), min_site=site, step_length=step_length)

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.min_site, self.min_site + len(self.amplitudes))

    @property
    def positions(self) -> np.ndarray:
        return self.sites * self.step_length

    @property
    def probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)

    @property
    def norm(self) -> float:
        return float(np.sum(self.probabilities))

    def amplitude_at(self, site: int) -> np.ndarray:
        """(a_R, a_L) at a site; zeros outside the stored run."""
        index = site - self.min_site
        if 0 <= index < len(self.amplitudes):
            return self.amplitudes[index].copy()
        return np.zeros(2, dtype=complex)

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Amplitudes on sites lo..hi inclusive, zero-filled where not stored."""
        out = np.zeros((hi - lo + 1, 2), dtype=complex)
        src_lo = max(lo, self.min_site)
        src_hi = min(hi, self.min_site + len(self.amplitudes) - 1)
        if src_lo <= src_hi:
            out[src_lo - lo:src_hi - lo + 1] = \
                self.amplitudes[src_lo - self.min_site:src_hi - self.min_site + 1]
        return out


START_STATES = {
    "R": (1.0, 0.0),
    "L": (0.0, 1.0),
    "symmetric": (1.0 / np.sqrt(2.0), 1j / np.sqrt(2.0)),
}


def start_state(name: str, step_length: float = 1.0) -> LatticeWalkState:
    """
    Named point start at the origin: "R", "L", or "symmetric" ((|R> + i|L>)/sqrt(2)).

    Raises:
        ValueError: If the name is unknown
    """
    if name not in START_STATES:
        raise ValueError(f"Unknown start state '{name}'. Choose from {sorted(START_STATES)}")
    a_R, a_L = START_STATES[name]
    return LatticeWalkState.point(a_R, a_L, step_length=step_length)


def _apply_coin(amplitudes: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    return amplitudes @ matrix.T


def _shift(amplitudes: np.ndarray, inverse: bool = False) -> np.ndarray:
    """
    Conditional shift onto a run padded by one site on each side.

    Forward moves R one site right and L one site left; inverse does the opposite.
    """
    n = len(amplitudes)
    out = np.zeros((n + 2, 2), dtype=complex)
    r_offset, l_offset = (0, 2) if inverse else (2, 0)
    out[r_offset:r_offset + n, 0] = amplitudes[:, 0]
    out[l_offset:l_offset + n, 1] = amplitudes[:, 1]
    return out


def walk_step(state: LatticeWalkState, coin: CoinSpec,
              order: OperatorOrder = OperatorOrder.COIN_THEN_SHIFT) -> LatticeWalkState:
    """
    Advance a lattice walk by one step.

    Args:
        state: Current walk state
        coin: Coin applied at every site
        order: Whether the coin acts before or after the shift

    Returns:
        New state covering one more site on each side
    """
    matrix = coin_matrix(coin)
    if order is OperatorOrder.COIN_THEN_SHIFT:
        amplitudes = _shift(_apply_coin(state.amplitudes, matrix))
    else:
        amplitudes = _apply_coin(_shift(state.amplitudes), matrix)
    return LatticeWalkState(amplitudes, state.min_site - 1, state.step_length)


def walk_step_adjoint(state: LatticeWalkState, coin: CoinSpec,
                      order: OperatorOrder = OperatorOrder.COIN_THEN_SHIFT) -> LatticeWalkState:
    """Undo one walk_step with the same coin and order."""
    adjoint = coin_matrix(coin).conj().T
    if order is OperatorOrder.COIN_THEN_SHIFT:
        amplitudes = _apply_coin(_shift(state.amplitudes, inverse=True), adjoint)
    else:
        amplitudes = _shift(_apply_coin(state.amplitudes, adjoint), inverse=True)
    return LatticeWalkState(amplitudes, state.min_site - 1, state.step_length)


@timing_decorator
def walk_evolve(state: LatticeWalkState, coin: CoinSpec,
                order: OperatorOrder = OperatorOrder.COIN_THEN_SHIFT,
                t: int = 1, adjoint: bool = False) -> LatticeWalkState:
    """
    Apply t walk steps (or t inverse steps when adjoint is set).

    Args:
        state: Initial state
        coin: Coin spec
        order: Operator order
        t: Number of steps (>= 0); t=0 returns the input unchanged
        adjoint: Run the inverse evolution

    Returns:
        Evolved state
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    step = walk_step_adjoint if adjoint else walk_step
    logger.info(f"Evolving walk: t={t}, order={order.value}, adjoint={adjoint}")
    for i in range(t):
        state = step(state, coin, order)
        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f"step {i + 1}: norm={state.norm:.15f}")
    return state


def position_distribution(state: LatticeWalkState) -> Tuple[np.ndarray, np.ndarray]:
    """Physical positions and their probabilities."""
    return state.positions, state.probabilities


def position_statistics(state: LatticeWalkState) -> Tuple[float, float]:
    """
    Mean and variance of the position distribution in physical units.

    Returns:
        Tuple of (mean, variance)
    """
    x, p = position_distribution(state)
    mean = float(np.sum(x * p))
    variance = float(np.sum(x * x * p) - mean ** 2)
    return mean, max(variance, 0.0)
