"""Unit tests for intra-AP reciprocity calibration."""

import numpy as np
import pytest
from pydantic import ValidationError

from dmimo_repeater_sync.models import RfChain
from dmimo_repeater_sync.numerics import complex_gaussian_vector
from dmimo_repeater_sync.protocols import (
    CalibrationCoeffs,
    calibrated_transmit,
    intra_ap_coeffs,
    node_coeffs,
    ue_receive_calibrated,
)


class TestCalibrationCoefficients:
    """Test suite for coefficient computation."""

    def test_reference_coefficient_is_one(self, make_node):
        """Test the reference antenna's coefficient is exactly 1."""
        node = make_node(antennas=6, ref_index=3, band=True)
        coeffs = node_coeffs(node)
        assert coeffs.coeffs[3] == 1.0
        assert coeffs.ref_index == 3

    def test_coefficient_formula(self):
        """Test coeffs_i = (t_ref/r_ref)·(r_i/t_i)."""
        chain = RfChain(t=[2.0, 1j], r=[1.0, 0.5])
        coeffs = intra_ap_coeffs(chain, 0)
        assert coeffs.coeffs[1] == pytest.approx(2.0 * 0.5 / 1j)

    def test_ref_index_out_of_range(self, make_node):
        """Test an invalid reference antenna is rejected."""
        node = make_node(antennas=2)
        with pytest.raises(ValueError, match="out of range"):
            intra_ap_coeffs(node.chain, 5)

    def test_model_rejects_non_unit_reference(self):
        """Test CalibrationCoeffs enforces the reference invariant."""
        with pytest.raises(ValidationError, match="reference coefficient must equal 1"):
            CalibrationCoeffs(coeffs=[2.0, 1.0], ref_index=0)


class TestCalibratedTransmit:
    """Test suite for the calibrated transmit path."""

    def test_equals_scaled_receive_chain(self, make_node, rng):
        """Test t ⊙ coeffs ⊙ f = (t_ref/r_ref)·D_r·f."""
        node = make_node(antennas=5, band=True)
        f = complex_gaussian_vector(5, 1.0, rng)
        expected = (node.t_ref / node.r_ref) * node.r * f
        assert np.allclose(calibrated_transmit(node, f), expected, rtol=1e-12, atol=0)

    def test_dimension_mismatch(self, make_node):
        """Test a beamformer of the wrong size is rejected."""
        node = make_node(antennas=3)
        with pytest.raises(ValueError, match="beamformer has 2 entries"):
            calibrated_transmit(node, [1.0, 0.0])


class TestUePhaseAlignment:
    """Calibrated reciprocity downlink arrives in phase from every antenna."""

    def test_same_phase_at_ue(self, make_node, rng):
        """Test per-antenna UE phases agree within 1e-12 over 500 chains."""
        for trial in range(500):
            antennas = 1 + trial % 8
            node = make_node(antennas=antennas, ref_index=trial % antennas, band=trial % 2 == 0)
            ue = RfChain(t=[np.exp(1j * rng.uniform(0, 6.28))], r=[np.exp(1j * rng.uniform(0, 6.28))])
            h = complex_gaussian_vector(antennas, 1.0, rng)

            contributions = ue_receive_calibrated(node.chain, node_coeffs(node), h, ue)
            phases = np.angle(contributions * np.conj(contributions[0]))
            assert np.max(np.abs(phases)) < 1e-12

    def test_ue_must_be_single_antenna(self, make_node):
        """Test a multi-antenna UE is rejected."""
        node = make_node(antennas=2)
        ue = RfChain(t=[1.0, 1.0], r=[1.0, 1.0])
        with pytest.raises(ValueError, match="single antenna"):
            ue_receive_calibrated(node.chain, node_coeffs(node), [1.0, 1.0], ue)
