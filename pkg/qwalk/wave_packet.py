"""Wave packets evolved by Fourier synthesis over plane-wave modes."""

import csv
import logging
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.signal import find_peaks
from scipy.special import comb

from .config import GridConfig, settings
from .plane_wave import branch_amplitudes
from .unmeasured_evolution import closed_form_amplitudes
from .utils import ZERO_AMPLITUDE, canonical_offset, timing_decorator, trapezoid_weights

logger = logging.getLogger(__name__)

BOUNDARY_DECAY = 1e-8
SPECTRAL_MASS_TOLERANCE = 1e-10
NORM_WARNING_TOLERANCE = 1e-6
MAX_BRANCH_STEPS = 30
# quadrature roundoff; weights below this share of the peak are dropped
SPECTRAL_FLOOR = 1e-15
# log(1e-300): below this a node's amplitude underflows when exponentiated
LOG_UNDERFLOW = np.log(1e-300)
CHUNK = 256

PROFILE_COLUMNS = ("x", "abs_R", "abs_L", "density")


class GridValidationError(ValueError):
    """A packet does not decay at the edges of its grid (grid too narrow)."""


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid x_min, x_min + dx, ..., x_max."""
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"x_min ({self.x_min}) must be below x_max ({self.x_max})")
        if self.n_points < 2:
            raise ValueError(f"n_points must be >= 2, got {self.n_points}")

    @classmethod
    def from_config(cls, config: GridConfig) -> "SpatialGrid":
        return cls(config.x_min, config.x_max, config.n_points)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_points, self.dx)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform wavenumber nodes with trapezoidal weights."""
    k_min: float
    k_max: float
    n_modes: int

    def __post_init__(self):
        if not self.k_min < self.k_max:
            raise ValueError(f"k_min ({self.k_min}) must be below k_max ({self.k_max})")
        if self.n_modes < 2:
            raise ValueError(f"n_modes must be >= 2, got {self.n_modes}")

    @classmethod
    def symmetric(cls, k_max: float, n_modes: int) -> "SpectralGrid":
        return cls(-k_max, k_max, n_modes)

    @classmethod
    def from_config(cls, config: GridConfig) -> "SpectralGrid":
        return cls.symmetric(config.k_max, config.n_modes)

    @property
    def dk(self) -> float:
        return (self.k_max - self.k_min) / (self.n_modes - 1)

    @property
    def k(self) -> np.ndarray:
        return np.linspace(self.k_min, self.k_max, self.n_modes)

    @property
    def weights(self) -> np.ndarray:
        return trapezoid_weights(self.n_modes, self.dk)


def default_spectral_grid() -> SpectralGrid:
    return SpectralGrid.from_config(settings.grid)


@dataclass
class WavePacketState:
    """
    Coin-resolved packet on a spatial grid.

    `normalization` is the constant applied after a measured branch was
    selected (1 for coherent evolution); `log_scale` records a shift taken out
    of the spectral amplitudes before exponentiation.
    """
    grid: SpatialGrid
    field_R: np.ndarray
    field_L: np.ndarray
    t: int = 0
    normalization: float = 1.0
    log_scale: float = 0.0
    spectral_grid: Optional[SpectralGrid] = None
    spectrum_R: Optional[np.ndarray] = field(default=None, repr=False)
    spectrum_L: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.field_R) ** 2 + np.abs(self.field_L) ** 2

    @property
    def norm(self) -> float:
        return float(np.sum(self.grid.weights * self.density))


@dataclass
class SpatialPacket:
    """
    Coin-free profile f(x, 0) sampled on a grid.

    Presets also carry their exact spectral weights as `spectrum`, a function
    of the node array; other packets are transformed numerically.
    """
    grid: SpatialGrid
    values: np.ndarray
    spectrum: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_points,):
            raise ValueError(f"packet has {self.values.shape} samples for a {self.grid.n_points}-point grid")

    @property
    def norm(self) -> float:
        return float(np.sum(self.grid.weights * np.abs(self.values) ** 2))

    def normalized(self) -> "SpatialPacket":
        norm = self.norm
        if norm <= 0:
            raise ValueError("cannot normalize a zero packet")
        scale = 1.0 / np.sqrt(norm)
        spectrum = None
        if self.spectrum is not None:
            source = self.spectrum

            def spectrum(k):
                return scale * source(k)
        return SpatialPacket(self.grid, scale * self.values, spectrum)

    def with_coin(self, a_R: complex, a_L: complex) -> WavePacketState:
        """Lift to (a_R|R> + a_L|L>) f(x)."""
        return WavePacketState(self.grid, a_R * self.values, a_L * self.values)


def validate_boundary_decay(values: np.ndarray, grid: SpatialGrid, threshold: float = BOUNDARY_DECAY):
    """
    Require the field at both grid edges to be below threshold times its peak.

    Raises:
        GridValidationError: If either edge is too large
    """
    magnitude = np.abs(np.asarray(values))
    peak = float(magnitude.max()) if magnitude.size else 0.0
    if peak == 0.0:
        return
    edge = max(float(magnitude[0]), float(magnitude[-1]))
    if edge > threshold * peak:
        msg = (f"grid too narrow: edge amplitude {edge / peak:.3e} of peak exceeds {threshold:.0e} "
               f"on [{grid.x_min}, {grid.x_max}]")
        logger.error(msg)
        raise GridValidationError(msg)


@timing_decorator
def forward_transform(values: np.ndarray, grid: SpatialGrid,
                      spectral: Optional[SpectralGrid] = None) -> np.ndarray:
    """
    Spectral weights f~(k) = (1/2pi) sum_x w_x f(x) e^{-ikx} by trapezoidal quadrature.

    Args:
        values: Samples of f on the grid
        grid: Spatial grid
        spectral: Spectral nodes (defaults to the configured grid)

    Returns:
        Complex weights, one per spectral node

    Raises:
        GridValidationError: If f does not decay at the grid edges
    """
    spectral = spectral or default_spectral_grid()
    values = np.asarray(values, dtype=complex)
    validate_boundary_decay(values, grid)

    x = grid.x
    weighted = grid.weights * values / (2.0 * np.pi)
    k = spectral.k
    out = np.empty(len(k), dtype=complex)
    for start in range(0, len(k), CHUNK):
        block = k[start:start + CHUNK]
        out[start:start + CHUNK] = np.exp(-1j * np.outer(block, x)) @ weighted
    return out


@timing_decorator
def inverse_transform(spectrum: np.ndarray, spectral: SpectralGrid, grid: SpatialGrid) -> np.ndarray:
    """Synthesize sum_k w_k f~(k) e^{ikx} at every grid point (fixed node order)."""
    spectrum = np.asarray(spectrum, dtype=complex)
    if not np.all(np.isfinite(spectrum)):
        raise ValueError("spectral weights must be finite")
    weighted = spectral.weights * spectrum
    k = spectral.k
    x = grid.x
    out = np.empty(len(x), dtype=complex)
    for start in range(0, len(x), CHUNK):
        block = x[start:start + CHUNK]
        out[start:start + CHUNK] = np.exp(1j * np.outer(block, k)) @ weighted
    return out


def spectral_mass_fraction(spectrum: np.ndarray, spectral: SpectralGrid, values: np.ndarray,
                           grid: SpatialGrid) -> float:
    """Share of the packet's norm carried inside the spectral window (Parseval)."""
    spatial = float(np.sum(grid.weights * np.abs(values) ** 2))
    if spatial == 0.0:
        return 1.0
    return float(2.0 * np.pi * np.sum(spectral.weights * np.abs(spectrum) ** 2) / spatial)


def _spectrum_of(packet: SpatialPacket, spectral: SpectralGrid) -> np.ndarray:
    """
    Spectral weights of a packet: exact for presets, quadrature otherwise.

    Quadrature weights below SPECTRAL_FLOOR of the peak are zeroed.
    """
    if packet.spectrum is not None:
        validate_boundary_decay(packet.values, packet.grid)
        spectrum = np.asarray(packet.spectrum(spectral.k), dtype=complex)
    else:
        spectrum = forward_transform(packet.values, packet.grid, spectral)
        magnitude = np.abs(spectrum)
        spectrum = np.where(magnitude < SPECTRAL_FLOOR * magnitude.max(), 0.0, spectrum)
    fraction = spectral_mass_fraction(spectrum, spectral, packet.values, packet.grid)
    if fraction < 1.0 - SPECTRAL_MASS_TOLERANCE:
        logger.warning(f"spectral window [{spectral.k_min}, {spectral.k_max}] captures only "
                       f"{fraction:.12f} of the packet norm")
    return spectrum


def _check_norm(packet: SpatialPacket):
    norm = packet.norm
    if abs(norm - 1.0) > NORM_WARNING_TOLERANCE:
        logger.warning(f"packet norm is {norm:.9f}, not 1")


def _check_real_coin(a_R, a_L):
    if np.iscomplexobj(a_R) or np.iscomplexobj(a_L):
        raise TypeError("measured packet evolution takes real coin amplitudes")
    norm = float(a_R) ** 2 + float(a_L) ** 2
    if abs(norm - 1.0) > 1e-12:
        raise ValueError(f"coin amplitudes not normalized (a_R^2 + a_L^2 = {norm!r})")


def gaussian_spectrum(k: np.ndarray, width: float = 1.0, center: float = 0.0, k0: float = 0.0) -> np.ndarray:
    """Analytic f~(k) of the normalized Gaussian preset."""
    q = np.asarray(k, dtype=float) - k0
    return (np.sqrt(width) * np.pi ** -0.25 / np.sqrt(2.0 * np.pi)
            * np.exp(-0.5 * (q * width) ** 2 - 1j * q * center))


def gaussian_packet(grid: SpatialGrid, width: float = 1.0, center: float = 0.0, k0: float = 0.0) -> SpatialPacket:
    """
    Normalized Gaussian exp(-(x - center)^2 / (2 width^2) + i k0 x) / (pi^{1/4} sqrt(width)).

    Examples:
        >>> packet = gaussian_packet(SpatialGrid(-8.0, 8.0, 1025))
        >>> round(packet.norm, 10)
        1.0
    """
    if width <= 0:
        raise ValueError(f"width must be positive, got {width}")
    x = grid.x
    values = np.exp(-0.5 * ((x - center) / width) ** 2 + 1j * k0 * x) / (np.pi ** 0.25 * np.sqrt(width))
    return SpatialPacket(grid, values, partial(gaussian_spectrum, width=width, center=center, k0=k0))


def gaussian_pair_packet(grid: SpatialGrid, separation: float = 3.0, width: float = 1.0,
                         center: float = 0.0) -> SpatialPacket:
    """Two equal Gaussians at center +- separation/2, normalized on the grid."""
    if separation <= 0:
        raise ValueError(f"separation must be positive, got {separation}")
    left = gaussian_packet(grid, width, center - separation / 2.0)
    right = gaussian_packet(grid, width, center + separation / 2.0)

    def spectrum(k):
        return left.spectrum(k) + right.spectrum(k)
    return SpatialPacket(grid, left.values + right.values, spectrum).normalized()


def packet_from_csv(path: Path, grid: SpatialGrid) -> SpatialPacket:
    """
    Load (x, Re f, Im f) rows and resample them onto the grid.

    Lines starting with '#' and a non-numeric header row are skipped. Values
    are linearly interpolated and zero outside the sampled range; the result
    is normalized.

    Raises:
        ValueError: If the file holds fewer than two rows or x is not increasing
    """
    rows = []
    with open(path, newline="") as f:
        for line in csv.reader(row for row in f if not row.lstrip().startswith("#")):
            if not line:
                continue
            try:
                rows.append([float(v) for v in line[:3]])
            except ValueError:
                if rows:
                    raise ValueError(f"{path}: non-numeric row {line}")
                continue
    data = np.array(rows, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] < 3:
        raise ValueError(f"{path}: expected at least two rows of x, Re f, Im f")
    xs = data[:, 0]
    if np.any(np.diff(xs) <= 0):
        raise ValueError(f"{path}: x column must be strictly increasing")

    x = grid.x
    values = np.interp(x, xs, data[:, 1], left=0.0, right=0.0) \
        + 1j * np.interp(x, xs, data[:, 2], left=0.0, right=0.0)
    packet = SpatialPacket(grid, values)
    logger.info(f"Loaded packet from {path}: {len(xs)} samples, norm {packet.norm:.6f} before normalization")
    return packet.normalized()


@timing_decorator
def pre_measurement_branches(packet: SpatialPacket, a_R: float, a_L: float, theta: float, l: float,
                             spectral: Optional[SpectralGrid] = None) -> WavePacketState:
    """Coin-resolved packet after one R(theta) U step, before the coin is read."""
    spectral = spectral or default_spectral_grid()
    spectrum = _spectrum_of(packet, spectral)
    psi_R, psi_L = branch_amplitudes(a_R, a_L, theta, spectral.k, l)
    spectrum_R = spectrum * psi_R
    spectrum_L = spectrum * psi_L
    return WavePacketState(
        grid=packet.grid,
        field_R=inverse_transform(spectrum_R, spectral, packet.grid),
        field_L=inverse_transform(spectrum_L, spectral, packet.grid),
        t=1,
        spectral_grid=spectral,
        spectrum_R=spectrum_R,
        spectrum_L=spectrum_L,
    )


def all_left_multiplier(a_R: float, a_L: float, theta: float, l: float, k: np.ndarray,
                        t: int) -> Tuple[np.ndarray, float]:
    """
    Per-node factor (sqrt(p_L))^t e^{ik t l2} of the all-left history, in log form.

    Returns:
        Tuple of (multiplier scaled by e^{-log_scale}, log_scale)
    """
    _, psi_L = branch_amplitudes(a_R, a_L, theta, k, l)
    with np.errstate(divide="ignore"):
        log_amplitude = t * np.log(np.abs(psi_L))
    phase = t * np.angle(psi_L)
    peak = float(np.max(log_amplitude))
    if not np.isfinite(peak):
        raise ValueError("the all-left history has zero probability at every spectral node")
    log_scale = peak if peak < LOG_UNDERFLOW else 0.0
    if log_scale:
        logger.info(f"all-left amplitudes underflow (max log {peak:.1f}); rescaling")
    return np.exp(log_amplitude - log_scale + 1j * phase), log_scale


@timing_decorator
def evolve_measured_all_left(packet: SpatialPacket, a_R: float, a_L: float, theta: float, l: float,
                             t: int, spectral: Optional[SpectralGrid] = None) -> WavePacketState:
    """
    Packet after t measured steps that all read |L>.

    Every spectral node is multiplied by (sqrt(p_L(k)))^t e^{ik t l2(k)}, the
    result is synthesized on the grid and renormalized by
    C = 1 / sqrt(integral |psi|^2 dx). At t = 0 the initial coin state is
    returned untouched with C = 1.

    Args:
        packet: Normalized spatial profile
        a_R: Real |R> amplitude of the re-initialized coin
        a_L: Real |L> amplitude of the re-initialized coin
        theta: Coin rotation angle
        l: Step length
        t: Number of measured steps
        spectral: Spectral nodes (defaults to the configured grid)

    Returns:
        WavePacketState with the branch on field_L and C in `normalization`

    Raises:
        GridValidationError: If the input or output does not decay at the edges
    """
    _check_real_coin(a_R, a_L)
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    _check_norm(packet)
    if t == 0:
        validate_boundary_decay(packet.values, packet.grid)
        return packet.with_coin(float(a_R), float(a_L))

    spectral = spectral or default_spectral_grid()
    spectrum = _spectrum_of(packet, spectral)
    multiplier, log_scale = all_left_multiplier(float(a_R), float(a_L), theta, l, spectral.k, t)
    spectrum_L = spectrum * multiplier
    psi = inverse_transform(spectrum_L, spectral, packet.grid)
    validate_boundary_decay(psi, packet.grid)

    mass = float(np.sum(packet.grid.weights * np.abs(psi) ** 2))
    if mass <= 0.0:
        raise ValueError(f"all-left branch vanished after {t} steps")
    C = 1.0 / np.sqrt(mass)
    logger.info(f"measured all-left: t={t}, C={C:.6e}, log_scale={log_scale:.3f}")
    return WavePacketState(
        grid=packet.grid,
        field_R=np.zeros_like(psi),
        field_L=C * psi,
        t=t,
        normalization=C,
        log_scale=log_scale,
        spectral_grid=spectral,
        spectrum_L=spectrum_L,
    )


@dataclass(frozen=True)
class MeasuredBranch:
    """All histories with n R-outcomes among t measured steps, per spectral node."""
    n: int
    probability: np.ndarray     # C(t, n) p_R^n p_L^(t-n)
    displacement: np.ndarray    # n l1 + (t - n) l2
    amplitude: np.ndarray       # one history: psi_R^n psi_L^(t-n)
    offset: np.ndarray          # phase of amplitude as an offset in (-pi/k, pi/k]
    spectrum: np.ndarray        # packet weights carried along one history


def evolve_measured_branch_distribution(packet: SpatialPacket, theta: float, l: float, t: int,
                                        a_R: float = 1 / np.sqrt(2), a_L: float = 1 / np.sqrt(2),
                                        spectral: Optional[SpectralGrid] = None) -> List[MeasuredBranch]:
    """
    Enumerate the binomial branches of t measured steps for every spectral node of a packet.

    `displacement` accumulates the per-step offsets; `offset` is the same
    shift reduced modulo 2pi/k.

    Raises:
        ValueError: If t > 30
    """
    if not 0 <= t <= MAX_BRANCH_STEPS:
        raise ValueError(f"branch enumeration is limited to 0 <= t <= {MAX_BRANCH_STEPS}, got {t}")
    _check_real_coin(a_R, a_L)
    spectral = spectral or default_spectral_grid()
    spectrum = _spectrum_of(packet, spectral)

    k = spectral.k
    psi_R, psi_L = branch_amplitudes(float(a_R), float(a_L), theta, k, l)
    p_R, p_L = np.abs(psi_R) ** 2, np.abs(psi_L) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = np.where((p_R < ZERO_AMPLITUDE) | (k == 0), 0.0, np.angle(psi_R) / k)
        l2 = np.where((p_L < ZERO_AMPLITUDE) | (k == 0), 0.0, np.angle(psi_L) / k)

    branches = []
    for n in range(t + 1):
        amplitude = psi_R ** n * psi_L ** (t - n)
        with np.errstate(divide="ignore", invalid="ignore"):
            offset = np.where(k == 0, 0.0, canonical_offset(np.angle(amplitude), k))
        branches.append(MeasuredBranch(
            n=n,
            probability=comb(t, n) * p_R ** n * p_L ** (t - n),
            displacement=n * l1 + (t - n) * l2,
            amplitude=amplitude,
            offset=offset,
            spectrum=spectrum * amplitude,
        ))
    return branches


@timing_decorator
def evolve_unmeasured(packet: SpatialPacket, a_R: complex, a_L: complex, theta: float, l: float,
                      t: int, spectral: Optional[SpectralGrid] = None) -> WavePacketState:
    """
    Coherent t-step evolution of (a_R|R> + a_L|L>) f(x).

    Each spectral node is evolved in closed form (matrix powers for complex
    coin amplitudes or degenerate nodes) and both coin components are
    synthesized on the grid.

    Raises:
        GridValidationError: If the input or output does not decay at the edges
    """
    if t < 0:
        raise ValueError(f"step count must be non-negative, got {t}")
    _check_norm(packet)
    spectral = spectral or default_spectral_grid()
    spectrum = _spectrum_of(packet, spectral)
    k = spectral.k

    if np.iscomplexobj(a_R) or np.iscomplexobj(a_L):
        from .oracle import mode_matrix_power
        phi_R, phi_L = mode_matrix_power(a_R, a_L, k, l, theta, t)
    else:
        phi_R, phi_L = closed_form_amplitudes(float(a_R), float(a_L), k, l, theta, t)

    spectrum_R = spectrum * phi_R
    spectrum_L = spectrum * phi_L
    state = WavePacketState(
        grid=packet.grid,
        field_R=inverse_transform(spectrum_R, spectral, packet.grid),
        field_L=inverse_transform(spectrum_L, spectral, packet.grid),
        t=t,
        spectral_grid=spectral,
        spectrum_R=spectrum_R,
        spectrum_L=spectrum_L,
    )
    validate_boundary_decay(np.sqrt(state.density), packet.grid)
    logger.info(f"coherent packet: t={t}, norm {packet.norm:.12f} -> {state.norm:.12f}")
    return state


def amplitude_profile(state: WavePacketState) -> np.ndarray:
    """Rows of (x, |field_R|, |field_L|, |field_R|^2 + |field_L|^2), one per grid point."""
    abs_R = np.abs(state.field_R)
    abs_L = np.abs(state.field_L)
    return np.column_stack([state.grid.x, abs_R, abs_L, abs_R ** 2 + abs_L ** 2])


def count_local_maxima(values: np.ndarray, fraction: float = 0.1) -> int:
    """Number of interior local maxima higher than fraction of the global maximum."""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or values.max() <= 0:
        return 0
    peaks, _ = find_peaks(values, height=fraction * values.max())
    return len(peaks)


def peak_position(values: np.ndarray, grid: SpatialGrid) -> float:
    """Location of the global maximum, refined by a parabola through its neighbours."""
    values = np.asarray(values, dtype=float)
    i = int(np.argmax(values))
    x = grid.x
    if i == 0 or i == len(values) - 1:
        return float(x[i])
    y0, y1, y2 = values[i - 1], values[i], values[i + 1]
    curvature = y0 - 2.0 * y1 + y2
    if curvature == 0:
        return float(x[i])
    return float(x[i] + 0.5 * grid.dx * (y0 - y2) / curvature)
