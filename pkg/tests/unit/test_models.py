"""Contract validation for the data models."""

import math

import numpy as np
import pytest
from pydantic import ValidationError

from dmimo_repeater_sync.models import (
    BeamformerKind,
    ChannelSet,
    CMode,
    GainModel,
    Node,
    NodeConfig,
    RfChain,
    RunManifest,
    ScenarioConfig,
    SignalUnits,
    SweepResult,
    SweepRow,
    SyncOutcome,
)


def _row(d_m: float = 20.0, rho_r_mw: float = 1.0, rmse: float = 0.01) -> SweepRow:
    return SweepRow(
        d_m=d_m,
        rho_r_mw=rho_r_mw,
        trials_kept=100,
        trials_flagged=0,
        rmse_rad=rmse,
        ci95_low=rmse * 0.9,
        ci95_high=rmse * 1.1,
    )


class TestRfChain:
    """Test suite for RfChain validation."""

    def test_rejects_zero_gain(self):
        """Test a zero gain is rejected."""
        with pytest.raises(ValidationError, match="strictly positive magnitude"):
            RfChain(t=[1.0, 0.0], r=[1.0, 1.0])

    def test_rejects_mismatched_lengths(self):
        """Test t and r must have the same length."""
        with pytest.raises(ValidationError, match="equal dimensions"):
            RfChain(t=[1.0, 1.0], r=[1.0])

    def test_arrays_are_copied_and_read_only(self):
        """Test the model owns immutable copies of its gains."""
        source = np.array([1.0 + 1j, 2.0])
        chain = RfChain(t=source, r=source)
        source[0] = 5.0
        assert chain.t[0] == 1.0 + 1j
        with pytest.raises(ValueError):
            chain.r[0] = 3.0

    def test_with_transmit_phase(self):
        """Test rotating one transmit gain leaves the rest untouched."""
        chain = RfChain(t=[1.0, 1.0], r=[1.0, 1.0]).with_transmit_phase(1, math.pi / 2)
        assert chain.t[1] == pytest.approx(1j)
        assert chain.t[0] == 1.0


class TestNodes:
    """Test suite for NodeConfig and Node."""

    def test_ref_index_out_of_range(self):
        """Test the reference antenna must exist."""
        with pytest.raises(ValidationError, match="out of range"):
            NodeConfig(antennas=2, ref_index=2, tx_power_w=0.1)

    def test_non_positive_power(self):
        """Test transmit power must be positive."""
        with pytest.raises(ValidationError):
            NodeConfig(antennas=2, tx_power_w=0.0)

    def test_chain_dimension_mismatch(self):
        """Test a node's chain must match its antenna count."""
        with pytest.raises(ValidationError, match="config expects"):
            Node(config=NodeConfig(antennas=3, tx_power_w=0.1), chain=RfChain(t=[1.0], r=[1.0]))


class TestChannelSet:
    """Test suite for ChannelSet dimensions."""

    def test_ue_link_must_match(self):
        """Test h_A must match g_A's dimension."""
        with pytest.raises(ValidationError, match="h_A"):
            ChannelSet(g_A=[1.0, 1.0], g_B=[1.0], h_A=[1.0])

    def test_inter_ap_matrix_shape(self):
        """Test H must be M_A x M_B."""
        with pytest.raises(ValidationError, match="H must be 2x1"):
            ChannelSet(g_A=[1.0, 1.0], g_B=[1.0], H=np.ones((1, 2)))

    def test_check_dimensions(self):
        """Test explicit dimension check against antenna counts."""
        channels = ChannelSet(g_A=[1.0, 1.0], g_B=[1.0])
        channels.check_dimensions(2, 1)
        with pytest.raises(ValueError, match="do not match"):
            channels.check_dimensions(3, 1)


class TestScenarioConfig:
    """Test suite for scenario defaults and validation."""

    def test_defaults(self):
        """Test defaults match the published operating point."""
        cfg = ScenarioConfig()
        assert cfg.m_a == cfg.m_b == 16
        assert cfg.rho_a_mw == cfg.rho_b_mw == 100.0
        assert cfg.pilot_length == 10
        assert cfg.noise.temperature_k == 290.0
        assert cfg.noise.bandwidth_hz == 20e6
        assert cfg.noise.noise_figure_db == 9.0
        assert cfg.beamformer.kind is BeamformerKind.PILOT
        assert cfg.beamformer.pilot_length == 1
        assert cfg.beamformer.pilot_power_mw is None
        assert cfg.c_mode is CMode.ANALYTIC
        assert cfg.units is SignalUnits.NOISE_NORMALIZED
        assert cfg.trials == 10_000

    def test_non_positive_power_rejected(self):
        """Test powers must be positive."""
        with pytest.raises(ValidationError, match="rho_r_mw"):
            ScenarioConfig(rho_r_mw=0.0)

    def test_zero_trials_rejected(self):
        """Test at least one trial is required."""
        with pytest.raises(ValidationError, match="trials"):
            ScenarioConfig(trials=0)

    def test_derived_quantities(self):
        """Test AP-B distance fallback, noise and node configs."""
        cfg = ScenarioConfig(d_m=30.0, rho_r_mw=5.0)
        assert cfg.distance_b_m == 30.0
        assert ScenarioConfig(d_m=30.0, d_b_m=45.0).distance_b_m == 45.0
        assert cfg.sigma2_w == pytest.approx(cfg.noise.sigma2)
        assert ScenarioConfig(noiseless=True).sigma2_w == 0.0
        assert cfg.node_r().tx_power_w == pytest.approx(5e-3)
        assert cfg.node_a().antennas == 16
        assert cfg.pilot_power_w == pytest.approx(5e-3)

    def test_ref_index_checked_against_antennas(self):
        """Test reference antennas must exist."""
        with pytest.raises(ValidationError, match="ref_index_a"):
            ScenarioConfig(m_a=2, ref_index_a=2)

    def test_gain_band_validated(self):
        """Test hi must not fall below lo."""
        with pytest.raises(ValidationError, match="must be >= lo"):
            GainModel(kind="magnitude_band", lo=1.2, hi=1.0)

    def test_seed_range(self):
        """Test seeds must fit in 64 bits."""
        ScenarioConfig(seed=2**64 - 1)
        with pytest.raises(ValidationError):
            ScenarioConfig(seed=2**64)


class TestSyncOutcome:
    """Test suite for SyncOutcome."""

    def test_from_statistic(self):
        """Test θ̂ = ∠y and the error is wrapped."""
        outcome = SyncOutcome.from_statistic(3.0, complex(math.cos(-3.0), math.sin(-3.0)), 1.0)
        assert outcome.theta_hat == pytest.approx(-3.0)
        assert outcome.error == pytest.approx(2 * math.pi - 6.0)

    def test_noiseless_statistic_has_infinite_snr(self):
        """Test y = c·e^{jθ} exactly gives an infinite SNR proxy."""
        outcome = SyncOutcome.from_statistic(0.0, complex(2.0, 0.0), 2.0)
        assert outcome.error == 0.0
        assert math.isinf(outcome.snr_proxy)

    def test_inconsistent_error_rejected(self):
        """Test error must equal wrap(θ̂ − θ)."""
        with pytest.raises(ValidationError, match="inconsistent"):
            SyncOutcome(theta_true=0.0, theta_hat=0.5, error=0.1, y=1 + 0j, c=1.0, snr_proxy=1.0)


class TestResults:
    """Test suite for sweep rows, tables and manifests."""

    def test_interval_must_contain_rmse(self):
        """Test ci95_low <= rmse <= ci95_high."""
        with pytest.raises(ValidationError, match="does not contain"):
            SweepRow(
                d_m=20.0, rho_r_mw=1.0, trials_kept=10, trials_flagged=0,
                rmse_rad=0.1, ci95_low=0.11, ci95_high=0.2,
            )

    def test_lookup_and_curves(self):
        """Test row lookup and per-power curves sorted by distance."""
        result = SweepResult(rows=[_row(50.0, 1.0), _row(20.0, 1.0), _row(20.0, 10.0)])
        assert result.distances == [20.0, 50.0]
        assert result.powers == [1.0, 10.0]
        assert [r.d_m for r in result.curve(1.0)] == [20.0, 50.0]
        assert result.row(20.0, 10.0).rho_r_mw == 10.0
        with pytest.raises(KeyError):
            result.row(80.0, 1.0)

    def test_manifest_seed_must_match(self):
        """Test the manifest seed mirrors the scenario seed."""
        with pytest.raises(ValidationError, match="seed"):
            RunManifest(
                scenario=ScenarioConfig(seed=1),
                distances_m=[20.0],
                powers_mw=[1.0],
                tool_version="0.1.0",
                seed=2,
            )

    def test_manifest_format(self):
        """Test only csv and json formats are accepted."""
        with pytest.raises(ValidationError):
            RunManifest(
                scenario=ScenarioConfig(),
                distances_m=[20.0],
                powers_mw=[1.0],
                output_format="xlsx",
                tool_version="0.1.0",
                seed=0,
            )
