"""A single synchronization trial."""

import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict

from dmimo_repeater_sync.models.channels import ChannelSet
from dmimo_repeater_sync.models.outcome import SyncOutcome
from dmimo_repeater_sync.models.rf import Node, NodeConfig, RfChain
from dmimo_repeater_sync.models.scenario import BeamformerKind, ScenarioConfig, SignalUnits
from dmimo_repeater_sync.montecarlo.rng import TrialStreams, make_streams
from dmimo_repeater_sync.numerics import ComplexVector
from dmimo_repeater_sync.protocols.beamforming import (
    acquire_beamformer,
    effective_channel,
    genie_beamformer,
    receive_repeater_pilot,
)
from dmimo_repeater_sync.protocols.calibration import node_coeffs
from dmimo_repeater_sync.protocols.cjt import cjt_gain
from dmimo_repeater_sync.protocols.errors import DegenerateLinkError
from dmimo_repeater_sync.protocols.repeater import (
    LinkPowers,
    PilotSignal,
    power_normalizer_C,
    repeater_sync_stage1,
    repeater_sync_stage2,
)
from dmimo_repeater_sync.system_model import draw_channel_set, draw_node, draw_rf_chain

logger = logging.getLogger(__name__)

# UE transmit power never enters the CJT ratio
_UE_NODE = NodeConfig(antennas=1, ref_index=0, tx_power_w=1.0)


class TrialScenario(BaseModel):
    """Everything drawn for one trial; shared read-only by both stages."""

    model_config = ConfigDict(frozen=True)

    ap_a: Node
    ap_b: Node
    repeater: Node
    channels: ChannelSet
    ue: Optional[RfChain] = None


def draw_trial_scenario(cfg: ScenarioConfig, streams: TrialStreams) -> TrialScenario:
    """Draw RF chains and one block-fading channel realization."""
    ap_a = draw_node(cfg.node_a(), cfg.gain_model, streams.gains)
    ap_b = draw_node(cfg.node_b(), cfg.gain_model, streams.gains)
    repeater = draw_node(cfg.node_r(), cfg.gain_model, streams.gains)
    ue = draw_rf_chain(_UE_NODE, cfg.gain_model, streams.gains) if cfg.cjt else None
    channels = draw_channel_set(
        cfg.m_a,
        cfg.m_b,
        cfg.d_m,
        cfg.distance_b_m,
        streams.channels,
        ue_distance=cfg.ue_distance_m if cfg.cjt else None,
    )
    return TrialScenario(ap_a=ap_a, ap_b=ap_b, repeater=repeater, channels=channels, ue=ue)


def link_powers(cfg: ScenarioConfig, scenario: TrialScenario) -> LinkPowers:
    return LinkPowers.from_nodes(
        scenario.ap_a, scenario.ap_b, scenario.repeater, cfg.sigma2_w, cfg.units
    )


def acquire_beamformers(
    cfg: ScenarioConfig, scenario: TrialScenario, link: LinkPowers, streams: TrialStreams
) -> tuple[ComplexVector, ComplexVector]:
    """Beamformers of both APs towards the repeater, per the configured mode."""
    g_eff_a = effective_channel(scenario.ap_a, scenario.channels.g_A)
    g_eff_b = effective_channel(scenario.ap_b, scenario.channels.g_B)
    if cfg.beamformer.kind is BeamformerKind.GENIE:
        return genie_beamformer(g_eff_a), genie_beamformer(g_eff_b)

    pilot_power = cfg.pilot_power_w
    if cfg.units is SignalUnits.NOISE_NORMALIZED and cfg.sigma2_w > 0:
        pilot_power /= cfg.sigma2_w
    beamformers = []
    for ap, g in ((scenario.ap_a, scenario.channels.g_A), (scenario.ap_b, scenario.channels.g_B)):
        rx = receive_repeater_pilot(
            ap,
            g,
            scenario.repeater.chain,
            pilot_power,
            cfg.beamformer.pilot_length,
            link.sigma2,
            streams.pilot,
        )
        beamformers.append(acquire_beamformer(rx))
    return beamformers[0], beamformers[1]


def run_trial(
    cfg: ScenarioConfig, trial_index: int, rng: TrialStreams | None = None
) -> SyncOutcome:
    """Run one complete two-stage synchronization.

    Draws fresh RF chains and channels, acquires beamformers, executes both
    stages and, when configured, evaluates the UE CJT gain.

    Args:
        cfg: Cell configuration
        trial_index: Index of the trial within the cell
        rng: Streams to draw from; derived from (seed, d, ρ_R, trial_index) if omitted

    Raises:
        DegenerateLinkError: If the trial is unresolvable or a link carries no signal
        ConvergenceError: If beamformer acquisition does not converge
    """
    streams = rng or make_streams(cfg.seed, cfg.d_m, cfg.rho_r_mw, trial_index)
    scenario = draw_trial_scenario(cfg, streams)
    link = link_powers(cfg, scenario)
    f_A, f_B = acquire_beamformers(cfg, scenario, link, streams)
    x = PilotSignal.ones(cfg.pilot_length)

    stage1 = repeater_sync_stage1(
        x, f_A, scenario.ap_a, scenario.repeater, scenario.channels, f_B, scenario.ap_b,
        link, streams.noise, agc=cfg.agc,
    )
    C = power_normalizer_C(stage1, cfg.c_mode)
    if not C > 0:
        raise DegenerateLinkError("power normalizer C is zero")
    _, outcome = repeater_sync_stage2(
        stage1, C, f_B, scenario.ap_b, scenario.repeater, scenario.channels, f_A,
        scenario.ap_a, x, link, streams.noise, agc=cfg.agc,
    )

    if cfg.cjt:
        assert scenario.channels.h_A is not None and scenario.channels.h_B is not None
        gain = cjt_gain(
            scenario.channels.h_A,
            scenario.channels.h_B,
            scenario.ap_a,
            scenario.ap_b,
            node_coeffs(scenario.ap_a),
            node_coeffs(scenario.ap_b),
            outcome.theta_hat,
            ue=scenario.ue,
            equal_amplitude=cfg.cjt_equal_amplitude,
        )
        outcome = outcome.model_copy(update={"cjt_gain": gain})

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            f"trial {trial_index} (d={cfg.d_m} m, rho_r={cfg.rho_r_mw} mW): "
            f"error={outcome.error:.3e} rad, c={outcome.c:.3e}"
        )
    return outcome
