"""Intra-AP reciprocity calibration."""

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dmimo_repeater_sync.models._arrays import ReadOnlyComplexVector
from dmimo_repeater_sync.models.rf import Node, RfChain
from dmimo_repeater_sync.numerics import ComplexVector, as_complex_vector


class CalibrationCoeffs(BaseModel):
    """Per-antenna reciprocity calibration coefficients of one AP.

    Attributes:
        coeffs: (t_ref/r_ref)·(r_i/t_i) per antenna
        ref_index: Reference antenna, whose coefficient is exactly 1
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    coeffs: ReadOnlyComplexVector
    ref_index: int = Field(..., ge=0)

    @model_validator(mode="after")
    def validate_coeffs(self) -> "CalibrationCoeffs":
        if self.ref_index >= self.coeffs.size:
            raise ValueError(f"ref_index {self.ref_index} out of range")
        if self.coeffs[self.ref_index] != 1:
            raise ValueError("reference coefficient must equal 1")
        if np.any(self.coeffs == 0):
            raise ValueError("calibration coefficients must be nonzero")
        return self


def intra_ap_coeffs(chain: RfChain, ref_index: int) -> CalibrationCoeffs:
    """Reciprocity calibration coefficients relative to the reference antenna.

    Raises:
        ValueError: If a gain is zero or ref_index is out of range
    """
    if not 0 <= ref_index < chain.antennas:
        raise ValueError(f"ref_index {ref_index} out of range for {chain.antennas} antennas")
    if np.any(chain.t == 0) or np.any(chain.r == 0):
        raise ValueError("RF gains must be nonzero")
    coeffs = (chain.t[ref_index] / chain.r[ref_index]) * (chain.r / chain.t)
    coeffs[ref_index] = 1.0
    return CalibrationCoeffs(coeffs=coeffs, ref_index=ref_index)


def node_coeffs(node: Node) -> CalibrationCoeffs:
    return intra_ap_coeffs(node.chain, node.ref_index)


def calibrated_transmit(node: Node, f: ArrayLike, coeffs: CalibrationCoeffs | None = None) -> ComplexVector:
    """Signal leaving the antennas when the AP sends beamformer f.

    Applies calibration then the transmit RF chain: t ⊙ coeffs ⊙ f, which
    equals (t_ref/r_ref)·D_r·f.
    """
    f = as_complex_vector(f, "f")
    if f.size != node.antennas:
        raise ValueError(f"beamformer has {f.size} entries, node has {node.antennas} antennas")
    if coeffs is None:
        coeffs = node_coeffs(node)
    return node.t * coeffs.coeffs * f


def ue_receive_calibrated(
    chain: RfChain, coeffs: CalibrationCoeffs, h: ArrayLike, ue: RfChain
) -> ComplexVector:
    """Per-antenna noiseless downlink contributions at a single-antenna UE.

    Entry i is r_u·h_i·t_i·coeffs_i·(r_i·h_i·t_u)*: the AP conjugates the
    uplink pilot it received on antenna i and sends it back calibrated.
    """
    h = as_complex_vector(h, "h")
    if h.size != chain.antennas or coeffs.coeffs.size != chain.antennas:
        raise ValueError("h, coeffs and chain must have equal dimensions")
    if ue.antennas != 1:
        raise ValueError("UE must have a single antenna")
    t_u, r_u = ue.t[0], ue.r[0]
    return r_u * h * chain.t * coeffs.coeffs * np.conj(chain.r * h * t_u)
