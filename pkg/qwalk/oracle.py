"""
Brute-force reference engines.

Direct lattice evolution, Monte Carlo sampling of measured walks, plain 2x2
matrix powers and binomial branch enumeration. These are slow and simple on
purpose and share nothing with the closed forms beyond the one-step operator.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import comb
from scipy.stats import binom

from .coin_walk import CoinSpec, OperatorOrder, coin_matrix
from .config import settings
from .plane_wave import MeasuredStepResult, branch_amplitudes, measured_step
from .unmeasured_evolution import step_operator
from .utils import timing_decorator

logger = logging.getLogger(__name__)

EXACT_POWER_LIMIT = 1000
MIN_SAMPLES = 10_000
MAX_ENUMERATION_STEPS = 30
COMMENSURATE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class RngSeed:
    """
    Seed and bit generator behind every stochastic run.

    Streams for independent chunks come from SeedSequence(seed).spawn(n):
    chunk i always draws from child i, so splitting work does not change results.
    """
    seed: int
    generator: str = "PCG64"

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.generator != "PCG64":
            raise ValueError(f"unsupported bit generator {self.generator!r}")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(self.seed)))

    def spawn(self, n: int) -> List[np.random.Generator]:
        children = np.random.SeedSequence(self.seed).spawn(n)
        return [np.random.Generator(np.random.PCG64(child)) for child in children]


def mode_matrix_power(a_R, a_L, k, l: float, theta: float, t: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Apply the one-step operator t times to the coin pair of a mode.

    Up to 1000 steps the operator is multiplied out step by step; beyond that
    each eigenvalue is raised as exp(i t arg(lambda)), falling back to
    numpy.linalg.matrix_power where the eigenvalues nearly coincide.

    Args:
        a_R: |R> amplitude (complex allowed)
        a_L: |L> amplitude (complex allowed)
        k: Wavenumber, scalar or array
        l: Step length
        theta: Coin rotation angle
        t: Step count (>= 0)

    Returns:
        Tuple (phi_R, phi_L) with the shape of k
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    m = step_operator(k, l, theta)
    shape = m.shape[:-2]
    m = m.reshape(-1, 2, 2)
    v = np.empty((len(m), 2), dtype=complex)
    v[:, 0] = a_R
    v[:, 1] = a_L

    if t <= EXACT_POWER_LIMIT:
        for _ in range(t):
            v = np.einsum("nij,nj->ni", m, v)
    else:
        eigenvalues, vectors = np.linalg.eig(m)
        close = np.abs(eigenvalues[:, 0] - eigenvalues[:, 1]) < 1e-6
        far = ~close
        out = np.empty_like(v)
        if np.any(far):
            powered = np.exp(1j * t * np.angle(eigenvalues[far]))
            coords = np.linalg.solve(vectors[far], v[far][..., None])[..., 0]
            out[far] = np.einsum("nij,nj->ni", vectors[far], powered * coords)
        if np.any(close):
            logger.debug(f"mode_matrix_power: {int(np.sum(close))} near-degenerate nodes via matrix_power")
            out[close] = np.einsum("nij,nj->ni", np.linalg.matrix_power(m[close], t), v[close])
        v = out
    return v[:, 0].reshape(shape), v[:, 1].reshape(shape)


@dataclass
class LatticeField:
    """Coin-resolved field sampled at x_min + i * spacing."""
    values: np.ndarray          # shape (n_sites, 2), complex
    spacing: float
    x_min: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2 or self.values.shape[1] != 2:
            raise ValueError(f"field must have shape (n_sites, 2), got {self.values.shape}")
        if self.spacing <= 0:
            raise ValueError(f"site spacing must be positive, got {self.spacing}")

    @classmethod
    def from_components(cls, field_R, field_L, spacing: float, x_min: float = 0.0) -> "LatticeField":
        return cls(np.column_stack([field_R, field_L]), spacing, x_min)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(len(self.values))

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.spacing)


@dataclass
class MeasurementRecord:
    """Outcomes of a measured lattice run."""
    outcomes: List[str] = field(default_factory=list)
    probabilities: List[float] = field(default_factory=list)
    seed: Optional[int] = None
    generator: str = "PCG64"
    profile: Optional[np.ndarray] = None    # last projected, normalized spatial profile


def _sites_per_step(l: float, spacing: float) -> int:
    ratio = l / spacing
    m = int(round(ratio))
    if m < 1 or abs(ratio - m) > COMMENSURATE_TOLERANCE * max(1.0, ratio):
        raise ValueError(f"step length {l} is not an integer multiple of the site spacing {spacing}")
    return m


def _shift_sites(column: np.ndarray, m: int) -> np.ndarray:
    """Translate by m sites (positive = right), zero-filling the vacated sites."""
    out = np.zeros_like(column)
    if m > 0:
        out[m:] = column[:-m]
    elif m < 0:
        out[:m] = column[-m:]
    else:
        out[:] = column
    return out


def _coherent_step(values: np.ndarray, m: int, theta: float) -> np.ndarray:
    right = _shift_sites(values[:, 0], m)
    left = _shift_sites(values[:, 1], -m)
    c, s = np.cos(theta), np.sin(theta)
    return np.column_stack([c * right - s * left, s * right + c * left])


@timing_decorator
def lattice_evolve(lattice: LatticeField, theta: float, t: int, l: float,
                   measure_each_step: bool = False, seed: Optional[int] = None,
                   a_R: complex = 1 / np.sqrt(2), a_L: complex = 1 / np.sqrt(2),
                   forced_outcomes: Optional[Sequence[str]] = None,
                   theta_schedule: Optional[Sequence[float]] = None,
                   ) -> Tuple[LatticeField, Optional[MeasurementRecord]]:
    """
    Evolve a sampled field by literal shifts and coin rotations.

    In measuring mode the coin is read out after every step (sampled with the
    seeded generator, or taken from forced_outcomes), the surviving component
    is renormalized to a spatial profile g, and the coin is re-initialized to
    a_R|R> + a_L|L>, i.e. the field becomes (a_R g, a_L g).

    Args:
        lattice: Initial field; spacing must divide l
        theta: Coin rotation angle (ignored per step when theta_schedule is given)
        t: Number of steps
        l: Step length
        measure_each_step: Read the coin out after every step
        seed: Root seed for sampled outcomes
        a_R: Re-initialization |R> amplitude
        a_L: Re-initialization |L> amplitude
        forced_outcomes: Outcome per step ("R" or "L") instead of sampling
        theta_schedule: Per-step coin angles

    Returns:
        Tuple of (final field, MeasurementRecord or None)

    Raises:
        ValueError: On incompatible spacing, bad schedules or outcomes
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    m = _sites_per_step(l, lattice.spacing)
    thetas = list(theta_schedule) if theta_schedule is not None else [theta] * t
    if len(thetas) != t:
        raise ValueError(f"theta schedule has {len(thetas)} entries for {t} steps")
    if forced_outcomes is not None:
        if len(forced_outcomes) != t or any(o not in ("R", "L") for o in forced_outcomes):
            raise ValueError("forced outcomes must list 'R' or 'L' for every step")

    values = lattice.values.copy()
    if not measure_each_step:
        for step_theta in thetas:
            values = _coherent_step(values, m, step_theta)
        return LatticeField(values, lattice.spacing, lattice.x_min), None

    record = MeasurementRecord(seed=seed)
    rng = RngSeed(seed if seed is not None else 0).rng()
    for i, step_theta in enumerate(thetas):
        values = _coherent_step(values, m, step_theta)
        weights = np.sum(np.abs(values) ** 2, axis=0) * lattice.spacing
        total = weights.sum()
        p_R = float(weights[0] / total)
        if forced_outcomes is not None:
            outcome = forced_outcomes[i]
        else:
            outcome = "R" if rng.random() < p_R else "L"
        column = 0 if outcome == "R" else 1
        probability = p_R if outcome == "R" else 1.0 - p_R
        if weights[column] == 0:
            raise ValueError(f"step {i + 1}: outcome {outcome} has zero probability")
        profile = values[:, column] / np.sqrt(weights[column])
        values = np.column_stack([a_R * profile, a_L * profile])
        record.outcomes.append(outcome)
        record.probabilities.append(probability)
        record.profile = profile
        logger.debug(f"lattice step {i + 1}: outcome={outcome}, p={probability:.6f}")
    return LatticeField(values, lattice.spacing, lattice.x_min), record


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample moments with standard errors."""
    mean: float
    variance: float
    mean_stderr: float
    variance_stderr: float
    n_samples: int
    seed: int
    generator: str = "PCG64"


def _chunk_sizes(n_samples: int, chunk_size: int) -> List[int]:
    full, rest = divmod(n_samples, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def _estimate(samples: np.ndarray, seed: RngSeed) -> MonteCarloEstimate:
    n = len(samples)
    mean = float(np.mean(samples))
    centered = samples - mean
    variance = float(np.mean(centered ** 2) * n / (n - 1))
    fourth = float(np.mean(centered ** 4))
    return MonteCarloEstimate(
        mean=mean,
        variance=variance,
        mean_stderr=float(np.sqrt(variance / n)),
        variance_stderr=float(np.sqrt(max(fourth - variance ** 2, 0.0) / n)),
        n_samples=n,
        seed=seed.seed,
        generator=seed.generator,
    )


def _sampling_options(n_samples: Optional[int], seed: Optional[int],
                      chunk_size: Optional[int]) -> Tuple[int, int, int]:
    config = settings.monte_carlo
    return (config.n_samples if n_samples is None else n_samples,
            config.seed if seed is None else seed,
            config.chunk_size if chunk_size is None else chunk_size)


@timing_decorator
def monte_carlo_measured_mode(step: MeasuredStepResult, t: int, n_samples: Optional[int] = None,
                              seed: Optional[int] = None, chunk_size: Optional[int] = None) -> MonteCarloEstimate:
    """
    Sample the phase displacement of a measured mode after t steps.

    Each trajectory takes t independent Bernoulli(p_R) branch choices; the
    count n of R outcomes is drawn as its binomial total and the trajectory
    lands at n*l1 + (t - n)*l2.

    Unset sample counts, seeds and chunk sizes come from settings.monte_carlo.

    Raises:
        ValueError: If n_samples < 10^4
    """
    n_samples, seed, chunk_size = _sampling_options(n_samples, seed, chunk_size)
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    l1 = step.l1 if step.l1_defined else 0.0
    l2 = step.l2 if step.l2_defined else 0.0
    p_R = min(max(step.p_R, 0.0), 1.0)

    rng_seed = RngSeed(seed, settings.monte_carlo.generator)
    sizes = _chunk_sizes(n_samples, chunk_size)
    samples = np.empty(n_samples)
    start = 0
    for rng, size in zip(rng_seed.spawn(len(sizes)), sizes):
        n_right = rng.binomial(t, p_R, size=size)
        samples[start:start + size] = n_right * l1 + (t - n_right) * l2
        start += size
    logger.info(f"Monte Carlo mode run: t={t}, samples={n_samples}, chunks={len(sizes)}")
    return _estimate(samples, rng_seed)


@timing_decorator
def monte_carlo_particle_walk(coin: CoinSpec, a_R: complex, a_L: complex, t: int,
                              n_samples: Optional[int] = None, seed: Optional[int] = None,
                              order: OperatorOrder = OperatorOrder.COIN_THEN_SHIFT,
                              step_length: float = 1.0, chunk_size: Optional[int] = None) -> MonteCarloEstimate:
    """
    Sample the position of a particle walk whose position is read out after every step.

    The coin is re-initialized to a_R|R> + a_L|L> before each step, so every
    step moves right with the same probability: the R weight after the coin
    for coin-then-shift, |a_R|^2 for shift-then-coin.
    """
    n_samples, seed, chunk_size = _sampling_options(n_samples, seed, chunk_size)
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    if order is OperatorOrder.COIN_THEN_SHIFT:
        p_right = float(abs((coin_matrix(coin) @ np.array([a_R, a_L], dtype=complex))[0]) ** 2)
    else:
        p_right = float(abs(a_R) ** 2)
    p_right = min(max(p_right, 0.0), 1.0)

    rng_seed = RngSeed(seed, settings.monte_carlo.generator)
    sizes = _chunk_sizes(n_samples, chunk_size)
    samples = np.empty(n_samples)
    start = 0
    for rng, size in zip(rng_seed.spawn(len(sizes)), sizes):
        n_right = rng.binomial(t, p_right, size=size)
        samples[start:start + size] = (2 * n_right - t) * step_length
        start += size
    logger.info(f"Monte Carlo particle walk: t={t}, p_right={p_right:.6f}, samples={n_samples}")
    return _estimate(samples, rng_seed)


@dataclass(frozen=True)
class BranchCheck:
    """Enumeration vs step-by-step composition of measured histories."""
    t: int
    max_deviation: float
    probability_sum: float
    counterexample: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.counterexample is None


def binomial_branch_check(theta: float, k: float, l: float, t: int,
                          a_R: float = 1 / np.sqrt(2), a_L: float = 1 / np.sqrt(2),
                          tolerance: float = 1e-12) -> BranchCheck:
    """
    Compare the binomial branch law with repeated measured steps.

    Composition builds the distribution of the R-count one measured step at
    a time; enumeration uses C(t, n) p_R^n p_L^(t-n). The amplitude of each
    history is also compared with sqrt(p_R)^n sqrt(p_L)^(t-n) e^{ik(n l1 + (t-n) l2)}.

    Raises:
        ValueError: If t > 30
    """
    if not 0 <= t <= MAX_ENUMERATION_STEPS:
        raise ValueError(f"branch enumeration is limited to 0 <= t <= {MAX_ENUMERATION_STEPS}, got {t}")

    counts = np.zeros(t + 1)
    counts[0] = 1.0
    step = measured_step(a_R, a_L, theta, k, l)
    for s in range(t):
        step = measured_step(a_R, a_L, theta, k, l)
        counts[1:s + 2] = counts[1:s + 2] * step.p_L + counts[0:s + 1] * step.p_R
        counts[0] *= step.p_L

    psi_R, psi_L = branch_amplitudes(a_R, a_L, theta, k, l)
    n = np.arange(t + 1)
    enumerated = binom.pmf(n, t, step.p_R)
    explicit = comb(t, n) * step.p_R ** n * step.p_L ** (t - n)

    l1 = step.l1 if step.l1_defined else 0.0
    l2 = step.l2 if step.l2_defined else 0.0
    composed_amplitudes = complex(psi_R) ** n * complex(psi_L) ** (t - n)
    branch_form = (np.sqrt(step.p_R) ** n * np.sqrt(step.p_L) ** (t - n)
                   * np.exp(1j * k * (n * l1 + (t - n) * l2)))

    deviations = {
        "probability": float(np.max(np.abs(counts - explicit))),
        "pmf": float(np.max(np.abs(enumerated - explicit))),
        "amplitude": float(np.max(np.abs(composed_amplitudes - branch_form))),
    }
    worst = max(deviations, key=deviations.get)
    max_deviation = deviations[worst]
    counterexample = None
    if max_deviation >= tolerance:
        n_bad = int(np.argmax(np.abs(counts - explicit))) if worst != "amplitude" else \
            int(np.argmax(np.abs(composed_amplitudes - branch_form)))
        counterexample = f"{worst} mismatch {max_deviation:.3e} at n={n_bad} (theta={theta}, k={k}, l={l}, t={t})"
        logger.warning(counterexample)
    return BranchCheck(t=t, max_deviation=max_deviation, probability_sum=float(counts.sum()),
                       counterexample=counterexample)
