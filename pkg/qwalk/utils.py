"""Utility functions for logging, timing, and phase bookkeeping."""

import logging
import sys
import time
from pathlib import Path
from functools import wraps
from typing import Callable, Any, Optional, Union

import numpy as np

ArrayOrFloat = Union[float, np.ndarray]

# Amplitudes below this are treated as exact cancellation; phases are undefined there.
ZERO_AMPLITUDE = 1e-14


def setup_logging(level: str = "INFO", log_file: Optional[Path] = None):
    """
    Setup logging to stderr and, optionally, a file.

    Args:
        level: Logging level name
        log_file: Optional log file path (no file handler when None)
    """
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file is not None:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_path))

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def timing_decorator(func: Callable) -> Callable:
    """Decorator to time function execution."""
    @wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        logger = logging.getLogger(func.__module__)
        start = time.perf_counter()
        logger.info(f"Starting {func.__name__}")
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - start
        logger.info(f"Completed {func.__name__} in {elapsed:.2f}s")
        return result
    return wrapper


def wrap_phase(phase: ArrayOrFloat) -> ArrayOrFloat:
    """
    Wrap a phase into the principal window (-pi, pi].

    Args:
        phase: Phase in radians (scalar or array)

    Returns:
        Wrapped phase, same shape as the input

    Examples:
        >>> wrap_phase(3 * np.pi / 2)
        -1.5707963267948966
        >>> wrap_phase(-np.pi)
        3.141592653589793
    """
    phase = np.asarray(phase, dtype=float)
    wrapped = np.mod(phase + np.pi, 2.0 * np.pi) - np.pi
    wrapped = np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def canonical_offset(phase: ArrayOrFloat, k: ArrayOrFloat) -> ArrayOrFloat:
    """
    Convert a plane-wave phase k*c into the offset c, with k*c in (-pi, pi].

    A plane wave e^{ik(x+c)} is unchanged by c -> c + 2*pi/k, so offsets are
    only meaningful modulo 2*pi/k.
    """
    wrapped = wrap_phase(phase)
    if np.ndim(wrapped) == 0 and np.ndim(k) == 0:
        return float(wrapped) / float(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.asarray(wrapped) / np.asarray(k, dtype=float)


def offsets_equivalent(c1: float, c2: float, k: float, tol: float = 1e-12) -> bool:
    """Check two plane-wave offsets for equality modulo 2*pi/k."""
    return abs(wrap_phase(k * (c1 - c2))) <= tol * max(1.0, abs(k))


def trapezoid_weights(n: int, spacing: float) -> np.ndarray:
    """
    Trapezoidal quadrature weights on a uniform grid.

    Args:
        n: Number of nodes (>= 2)
        spacing: Node spacing

    Returns:
        Weights array of length n
    """
    weights = np.full(n, spacing, dtype=float)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    return weights
