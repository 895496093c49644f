"""Unit tests for beamformer acquisition towards the repeater."""

from unittest.mock import patch

import numpy as np
import pytest

from dmimo_repeater_sync.models import RfChain
from dmimo_repeater_sync.numerics import ConvergenceError, complex_gaussian_vector
from dmimo_repeater_sync.protocols import (
    DegenerateLinkError,
    acquire_beamformer,
    acquire_beamformer_batch,
    beamforming_efficiency,
    effective_channel,
    genie_beamformer,
    receive_repeater_pilot,
)

REPEATER = RfChain(t=[np.exp(0.7j)], r=[np.exp(-0.2j)])


class TestGenieBeamformer:
    """Test suite for perfect-knowledge beamformers."""

    def test_unit_norm_and_full_efficiency(self, make_node, rng):
        """Test conj(g̃)/‖g̃‖ has unit norm and efficiency 1."""
        node = make_node(antennas=8, band=True)
        g_eff = effective_channel(node, complex_gaussian_vector(8, 1e-6, rng))
        f = genie_beamformer(g_eff)

        assert np.linalg.norm(f) == pytest.approx(1.0, abs=1e-12)
        assert beamforming_efficiency(f, g_eff) == pytest.approx(1.0, abs=1e-12)

    def test_zero_channel(self):
        """Test a zero effective channel is degenerate."""
        with pytest.raises(DegenerateLinkError):
            genie_beamformer(np.zeros(3))


class TestPilotAcquisition:
    """Test suite for SVD-based acquisition from the repeater pilot."""

    def test_noiseless_pilot_matches_genie(self, make_node, rng):
        """Test a clean pilot yields an efficiency of 1."""
        node = make_node(antennas=16)
        g = complex_gaussian_vector(16, 1e-8, rng)
        rx = receive_repeater_pilot(node, g, REPEATER, 1e-3, 10, 0.0, rng)
        f = acquire_beamformer(rx)

        assert rx.shape == (16, 10)
        assert beamforming_efficiency(f, effective_channel(node, g)) == pytest.approx(1.0, abs=1e-9)

    def test_noisy_pilot_close_to_genie(self, make_node, rng):
        """Test a high-SNR noisy pilot still aligns with the channel."""
        node = make_node(antennas=8)
        g = complex_gaussian_vector(8, 1.0, rng)
        rx = receive_repeater_pilot(node, g, REPEATER, 100.0, 20, 1.0, rng)
        f = acquire_beamformer(rx)
        assert beamforming_efficiency(f, effective_channel(node, g)) > 0.99

    def test_twenty_db_pilot_is_reliable(self, make_node, rng):
        """Test M = 16, N_p = 10 at 20 dB reaches efficiency 0.95 in at least 99% of draws."""
        node = make_node(antennas=16, band=True)
        efficiencies = []
        for _ in range(1000):
            g = complex_gaussian_vector(16, 1.0, rng)
            g_eff = effective_channel(node, g)
            pilot_power = 100.0 / float(np.vdot(g_eff, g_eff).real)
            rx = receive_repeater_pilot(node, g, REPEATER, pilot_power, 10, 1.0, rng)
            efficiencies.append(beamforming_efficiency(acquire_beamformer(rx), g_eff))
        assert np.mean(np.array(efficiencies) >= 0.95) >= 0.99

    def test_batch_matches_single_acquisition(self, make_node, rng):
        """Test a stack of pilots gives the per-pilot beamformers."""
        node = make_node(antennas=6)
        channels = [complex_gaussian_vector(6, 1.0, rng) for _ in range(8)]
        stack = np.stack([receive_repeater_pilot(node, g, REPEATER, 4.0, 3, 1.0, rng) for g in channels])
        f, converged = acquire_beamformer_batch(stack)

        assert f.shape == (8, 6)
        assert converged.all()
        for row, rx in enumerate(stack):
            assert np.allclose(f[row], acquire_beamformer(rx), rtol=0, atol=1e-10)

    def test_zero_pilot_is_degenerate(self):
        """Test an all-zero observation is rejected."""
        with pytest.raises(DegenerateLinkError, match="all-zero"):
            acquire_beamformer(np.zeros((4, 5)))

    def test_invalid_pilot_parameters(self, make_node, rng):
        """Test pilot length and power must be positive."""
        node = make_node(antennas=2)
        with pytest.raises(ValueError, match="pilot_length must be positive"):
            receive_repeater_pilot(node, [1.0, 1.0], REPEATER, 1.0, 0, 0.0, rng)
        with pytest.raises(ValueError, match="pilot_power must be positive"):
            receive_repeater_pilot(node, [1.0, 1.0], REPEATER, 0.0, 4, 0.0, rng)

    def test_retry_doubles_iteration_cap(self):
        """Test non-convergence is retried with twice the cap."""
        v = np.array([1.0, 0.0], dtype=np.complex128)
        with patch(
            "dmimo_repeater_sync.protocols.beamforming.dominant_left_singular_vector",
            side_effect=[ConvergenceError(50, 1e-3), v],
        ) as mock_svd:
            f = acquire_beamformer(np.ones((2, 3)), max_iters=50)

        assert mock_svd.call_count == 2
        assert mock_svd.call_args_list[0].kwargs["max_iters"] == 50
        assert mock_svd.call_args_list[1].kwargs["max_iters"] == 100
        assert np.array_equal(f, np.conj(v))

    def test_retry_exhausted_reraises(self):
        """Test the last ConvergenceError surfaces after all attempts."""
        with patch(
            "dmimo_repeater_sync.protocols.beamforming.dominant_left_singular_vector",
            side_effect=ConvergenceError(10, 1e-3),
        ) as mock_svd:
            with pytest.raises(ConvergenceError):
                acquire_beamformer(np.ones((2, 3)), attempts=3)

        assert mock_svd.call_count == 3
