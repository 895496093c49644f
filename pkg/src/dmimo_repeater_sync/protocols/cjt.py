"""Coherent joint transmission gain at a UE after phase compensation."""

import cmath

import numpy as np
from numpy.typing import ArrayLike

from dmimo_repeater_sync.models.rf import Node, RfChain
from dmimo_repeater_sync.protocols.calibration import CalibrationCoeffs, ue_receive_calibrated
from dmimo_repeater_sync.protocols.errors import DegenerateLinkError

_UNIT_UE = RfChain(t=[1.0], r=[1.0])


def ue_downlink_signal(
    ap: Node, coeffs: CalibrationCoeffs, h: ArrayLike, ue: RfChain | None = None
) -> complex:
    """Noiseless calibrated reciprocity downlink from one AP at the UE."""
    return complex(np.sum(ue_receive_calibrated(ap.chain, coeffs, h, ue or _UNIT_UE)))


def cjt_gain(
    h_A: ArrayLike,
    h_B: ArrayLike,
    ap_a: Node,
    ap_b: Node,
    coeffs_a: CalibrationCoeffs,
    coeffs_b: CalibrationCoeffs,
    theta_hat: float,
    ue: RfChain | None = None,
    equal_amplitude: bool = False,
) -> float:
    """|y_A·e^{jθ̂} + y_B|² / (|y_A| + |y_B|)².

    AP-A rotates its downlink by the estimated offset; the ratio is 1 when
    the rotation matches the true offset and falls as cos²(ε/2) for equal
    amplitudes and phase error ε.

    Raises:
        DegenerateLinkError: If either UE link has zero amplitude
    """
    y_a = ue_downlink_signal(ap_a, coeffs_a, h_A, ue)
    y_b = ue_downlink_signal(ap_b, coeffs_b, h_B, ue)
    if not (abs(y_a) > 0 and abs(y_b) > 0):
        raise DegenerateLinkError("UE link has zero amplitude")
    if equal_amplitude:
        y_a /= abs(y_a)
        y_b /= abs(y_b)
    combined = abs(y_a * cmath.exp(1j * theta_hat) + y_b) ** 2
    return min(1.0, combined / (abs(y_a) + abs(y_b)) ** 2)
