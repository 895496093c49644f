"""Beamformer acquisition towards the repeater."""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray
from tenacity import Retrying, before_sleep_log, retry_if_exception_type, stop_after_attempt

from dmimo_repeater_sync.models.rf import Node, RfChain
from dmimo_repeater_sync.numerics import (
    POWER_ITERATION_MAX_ITERS,
    POWER_ITERATION_TOL,
    ComplexMatrix,
    ComplexVector,
    ConvergenceError,
    as_complex_matrix,
    as_complex_vector,
    complex_gaussian_matrix,
    dominant_left_singular_vector,
    dominant_left_singular_vectors,
)
from dmimo_repeater_sync.protocols.errors import DegenerateLinkError

logger = logging.getLogger(__name__)

ACQUISITION_ATTEMPTS = 3


def effective_channel(node: Node, g: ArrayLike) -> ComplexVector:
    """g̃ = D_r·g, the propagation channel seen through the receive chain."""
    return node.r * as_complex_vector(g, "g")


def genie_beamformer(g_eff: ArrayLike) -> ComplexVector:
    """conj(g̃)/‖g̃‖, the beamformer maximizing |fᵀg̃|."""
    g_eff = as_complex_vector(g_eff, "g_eff")
    norm = float(np.linalg.norm(g_eff))
    if norm == 0:
        raise DegenerateLinkError("effective channel is zero")
    return np.conj(g_eff) / norm


def receive_repeater_pilot(
    node: Node,
    g: ArrayLike,
    repeater: RfChain,
    pilot_power: float,
    pilot_length: int,
    sigma2: float,
    rng: np.random.Generator,
) -> ComplexMatrix:
    """M x N_p samples an AP receives from the repeater's omnidirectional pilot.

    The pilot is all-ones; the AP sees √P·t_R·g̃·pᵀ + W with CN(0, σ²) noise.
    """
    if pilot_length < 1:
        raise ValueError("pilot_length must be positive")
    if pilot_power <= 0:
        raise ValueError("pilot_power must be positive")
    g_eff = effective_channel(node, g)
    pilot = np.ones(pilot_length, dtype=np.complex128)
    rx = np.sqrt(pilot_power) * repeater.t[0] * np.outer(g_eff, pilot)
    if sigma2 > 0:
        rx = rx + complex_gaussian_matrix(node.antennas, pilot_length, sigma2, rng)
    return rx


def acquire_beamformer(
    pilot_rx: ArrayLike,
    tol: float = POWER_ITERATION_TOL,
    max_iters: int = POWER_ITERATION_MAX_ITERS,
    attempts: int = ACQUISITION_ATTEMPTS,
) -> ComplexVector:
    """Beamformer from the dominant direction of a received repeater pilot.

    The dominant left singular vector v maximizes |vᴴg̃|; the beamformer is
    conj(v) so that the transpose product fᵀg̃ is maximized. On
    non-convergence the power iteration is retried with double the cap.

    Raises:
        DegenerateLinkError: If the pilot is all-zero
        ConvergenceError: If every attempt hits its cap
    """
    pilot_rx = as_complex_matrix(pilot_rx, "pilot_rx")
    if not np.any(pilot_rx):
        raise DegenerateLinkError("received pilot is all-zero")

    v: ComplexVector | None = None
    for attempt in Retrying(
        stop=stop_after_attempt(attempts),
        retry=retry_if_exception_type(ConvergenceError),
        before_sleep=before_sleep_log(logger, logging.WARNING),
        reraise=True,
    ):
        with attempt:
            cap = max_iters * 2 ** (attempt.retry_state.attempt_number - 1)
            v = dominant_left_singular_vector(pilot_rx, tol=tol, max_iters=cap)
    assert v is not None
    return np.conj(v)


def beamforming_efficiency(f: ArrayLike, g_eff: ArrayLike) -> float:
    """|fᵀg̃| / ‖g̃‖, 1 for a perfectly aligned unit-norm beamformer."""
    f = as_complex_vector(f, "f")
    g_eff = as_complex_vector(g_eff, "g_eff")
    return float(abs(f @ g_eff) / np.linalg.norm(g_eff))


def acquire_beamformer_batch(
    pilot_rx: ArrayLike,
    tol: float = POWER_ITERATION_TOL,
    max_iters: int = POWER_ITERATION_MAX_ITERS,
    attempts: int = ACQUISITION_ATTEMPTS,
) -> tuple[ComplexMatrix, NDArray[np.bool_]]:
    """acquire_beamformer over a stack of received pilots (batch x M x N_p).

    Power iteration is deterministic, so the retry schedule collapses into a
    single run at the last attempt's cap.

    Returns:
        (beamformers, converged), beamformers of shape batch x M

    Raises:
        ValueError: If a pilot in the stack is all-zero
    """
    cap = max_iters * 2 ** (attempts - 1)
    v, converged, _ = dominant_left_singular_vectors(pilot_rx, tol=tol, max_iters=cap)
    return np.conj(v), converged
