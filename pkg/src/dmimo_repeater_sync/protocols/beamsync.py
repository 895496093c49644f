"""Direct bidirectional AP-to-AP phase calibration (no repeater), noiseless."""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike

from dmimo_repeater_sync.models.rf import Node
from dmimo_repeater_sync.numerics import as_complex_matrix, as_complex_vector
from dmimo_repeater_sync.protocols.calibration import calibrated_transmit
from dmimo_repeater_sync.protocols.errors import DegenerateLinkError

logger = logging.getLogger(__name__)

STATISTIC_FLOOR = 1e-30


def beamsync_direct(H: ArrayLike, ap_a: Node, ap_b: Node, f: ArrayLike) -> float:
    """Phase offset estimated at AP-B from a direct round trip over H.

    Stage I: AP-B beamforms f towards AP-A. Stage II: AP-A returns the
    conjugate of what it received. AP-B correlates with f.

    Returns:
        ∠(fᵀy_B) = (∠t_A − ∠r_A) − (∠t_B − ∠r_B), the negative of the offset
        the repeater protocol estimates

    Raises:
        ValueError: If dimensions disagree or f is not unit norm
        DegenerateLinkError: If |fᵀy_B| falls below 1e-30
    """
    H = as_complex_matrix(H, "H")
    f = as_complex_vector(f, "f")
    if H.shape != (ap_a.antennas, ap_b.antennas):
        raise ValueError(f"H must be {ap_a.antennas}x{ap_b.antennas}, got {H.shape}")
    if not math.isclose(float(np.linalg.norm(f)), 1.0, rel_tol=1e-9):
        raise ValueError("f must have unit norm")

    y_a = ap_a.r * (H @ calibrated_transmit(ap_b, f))
    y_b = ap_b.r * (H.T @ calibrated_transmit(ap_a, np.conj(y_a)))
    statistic = complex(f @ y_b)
    if abs(statistic) < STATISTIC_FLOOR:
        raise DegenerateLinkError(f"BeamSync statistic {abs(statistic):.3e} below floor")
    logger.debug(f"BeamSync statistic magnitude {abs(statistic):.3e}")
    return math.atan2(statistic.imag, statistic.real)
