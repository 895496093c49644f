"""Complex linear algebra and circular statistics shared by all modules."""

import logging
import math
from typing import Sequence, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

ComplexVector: TypeAlias = NDArray[np.complex128]
ComplexMatrix: TypeAlias = NDArray[np.complex128]

POWER_ITERATION_MAX_ITERS = 200
POWER_ITERATION_TOL = 1e-10


class ConvergenceError(Exception):
    """Exception raised when power iteration hits its iteration cap."""

    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"Power iteration did not converge within {iterations} iterations "
            f"(last step {residual:.3e})"
        )


def as_complex_vector(values: ArrayLike, name: str = "vector") -> ComplexVector:
    """Coerce input into a finite, non-empty 1-D complex128 array.

    Args:
        values: Anything numpy can turn into a 1-D array
        name: Argument name used in error messages

    Returns:
        1-D complex128 array

    Raises:
        ValueError: If the array is empty, not 1-D or has non-finite entries
    """
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    return arr


def as_complex_matrix(values: ArrayLike, name: str = "matrix") -> ComplexMatrix:
    """Coerce input into a finite 2-D complex128 array with positive dimensions."""
    arr = np.asarray(values, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a 2-D matrix with positive dimensions, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite entries")
    return arr


def complex_gaussian_vector(n: int, variance: float, rng: np.random.Generator) -> ComplexVector:
    """Draw n i.i.d. CN(0, variance) samples.

    Real and imaginary parts are independent with variance/2 each.

    Args:
        n: Dimension (>= 1)
        variance: Per-entry variance (>= 0)
        rng: Random stream the samples are drawn from

    Returns:
        Complex vector of length n

    Raises:
        ValueError: If n < 1 or variance < 0
    """
    if n < 1:
        raise ValueError("n must be positive")
    if variance < 0:
        raise ValueError("variance must be non-negative")
    parts = rng.standard_normal((2, n))
    return math.sqrt(variance / 2.0) * (parts[0] + 1j * parts[1])


def complex_gaussian_matrix(
    rows: int, cols: int, variance: float, rng: np.random.Generator
) -> ComplexMatrix:
    """Draw a rows x cols matrix of i.i.d. CN(0, variance) samples."""
    return complex_gaussian_vector(rows * cols, variance, rng).reshape(rows, cols)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # largest-magnitude entry along the last axis becomes real non-negative
    pivot = np.take_along_axis(v, np.argmax(np.abs(v), axis=-1)[..., None], axis=-1)
    magnitude = np.abs(pivot)
    rotation = np.where(magnitude == 0, 1.0, np.conj(pivot) / np.where(magnitude == 0, 1.0, magnitude))
    return v * rotation


def dominant_left_singular_vectors(
    Y: ArrayLike,
    tol: float = POWER_ITERATION_TOL,
    max_iters: int = POWER_ITERATION_MAX_ITERS,
) -> tuple[ComplexMatrix, NDArray[np.bool_], NDArray[np.float64]]:
    """Power iteration on a stack of matrices, one Y·Yᴴ per leading index.

    Each matrix iterates until its own step falls below tol; the others keep
    going until they converge or max_iters is reached.

    Args:
        Y: Complex array (batch x rows x cols), no matrix all-zero
        tol: Stop once successive iterates differ by less than tol in 2-norm
        max_iters: Iteration cap

    Returns:
        (vectors, converged, last_step) with vectors of shape batch x rows

    Raises:
        ValueError: If Y is malformed or one of its matrices is all-zero
    """
    Y = np.asarray(Y, dtype=np.complex128)
    if Y.ndim != 3 or min(Y.shape) < 1:
        raise ValueError(f"Y must be a non-empty stack of matrices, got shape {Y.shape}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("Y must have finite entries")
    if max_iters < 1:
        raise ValueError("max_iters must be positive")

    gram = Y @ np.conj(np.swapaxes(Y, 1, 2))
    column_norms = np.linalg.norm(gram, axis=1)
    start = np.argmax(column_norms, axis=1)
    rows = np.arange(Y.shape[0])
    peak = column_norms[rows, start]
    if np.any(peak == 0):
        raise ValueError("Y must be nonzero")

    v = _fix_phase(gram[rows, :, start] / peak[:, None])
    converged = np.zeros(Y.shape[0], dtype=bool)
    last_step = np.full(Y.shape[0], math.inf)
    for _ in range(max_iters):
        active = np.flatnonzero(~converged)
        if active.size == 0:
            break
        w = np.einsum("nij,nj->ni", gram[active], v[active])
        w = _fix_phase(w / np.linalg.norm(w, axis=1)[:, None])
        step = np.linalg.norm(w - v[active], axis=1)
        v[active] = w
        last_step[active] = step
        converged[active] = step < tol
    return v, converged, last_step


def dominant_left_singular_vector(
    Y: ArrayLike,
    tol: float = POWER_ITERATION_TOL,
    max_iters: int = POWER_ITERATION_MAX_ITERS,
) -> ComplexVector:
    """Dominant left singular vector of Y by power iteration on Y·Yᴴ.

    The returned vector has unit norm and its largest-magnitude entry is real
    and non-negative, so repeated calls on the same input agree exactly.

    Args:
        Y: Complex matrix (rows x cols), not all-zero
        tol: Stop once successive iterates differ by less than tol in 2-norm
        max_iters: Iteration cap

    Returns:
        Unit-norm vector v maximizing ‖vᴴY‖

    Raises:
        ValueError: If Y is all-zero or malformed
        ConvergenceError: If tol is not met within max_iters
    """
    Y = as_complex_matrix(Y, "Y")
    v, converged, last_step = dominant_left_singular_vectors(Y[None], tol=tol, max_iters=max_iters)
    if not converged[0]:
        raise ConvergenceError(max_iters, float(last_step[0]))
    return v[0]


def wrap_angle(x: ArrayLike) -> NDArray[np.float64] | float:
    """Wrap angles (radians) into (−π, π]; −π maps to +π.

    Works on scalars and arrays; scalars come back as float.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("angle must be finite")
    wrapped = np.pi - np.mod(np.pi - arr, 2.0 * np.pi)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def rmse_circular(errors: Sequence[float] | NDArray[np.float64]) -> float:
    """Root-mean-square of angular errors after wrapping to (−π, π].

    Raises:
        ValueError: If errors is empty
    """
    arr = np.asarray(errors, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("errors must be non-empty")
    wrapped = np.asarray(wrap_angle(arr.ravel()))
    return float(np.sqrt(np.mean(wrapped**2)))


def phase_error_to_time_s(phase_rad: float, carrier_hz: float) -> float:
    """Timing error equivalent to a carrier phase error.

    0.01 rad at 3 GHz is about 0.53 ps.
    """
    if carrier_hz <= 0:
        raise ValueError("carrier_hz must be positive")
    return phase_rad / (2.0 * math.pi * carrier_hz)
