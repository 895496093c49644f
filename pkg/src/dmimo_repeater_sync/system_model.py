"""Physical-layer scenario construction: RF chains, channels, path loss, noise."""

import logging
import math

import numpy as np

from dmimo_repeater_sync.models.channels import ChannelSet, NoiseModel
from dmimo_repeater_sync.models.rf import Node, NodeConfig, RfChain
from dmimo_repeater_sync.models.scenario import GainModel, GainModelKind
from dmimo_repeater_sync.numerics import (
    ComplexVector,
    complex_gaussian_matrix,
    complex_gaussian_vector,
    wrap_angle,
)

logger = logging.getLogger(__name__)

PATH_LOSS_INTERCEPT_DB = -30.5
PATH_LOSS_SLOPE_DB = 36.7


def path_loss_db(d: float) -> float:
    """Large-scale path loss PL = −30.5 − 36.7·log10(d), in dB.

    Args:
        d: Distance in meters (> 0)

    Raises:
        ValueError: If d <= 0
    """
    if not d > 0:
        raise ValueError(f"distance must be positive, got {d}")
    return PATH_LOSS_INTERCEPT_DB - PATH_LOSS_SLOPE_DB * math.log10(d)


def large_scale_gain(d: float) -> float:
    """Linear large-scale fading coefficient β = 10^(PL/10)."""
    return math.pow(10.0, path_loss_db(d) / 10.0)


def noise_variance(model: NoiseModel) -> float:
    """Thermal noise variance k_B·T·B·10^(NF/10) in watts; linear in B."""
    return model.sigma2


def draw_rf_gains(antennas: int, gain_model: GainModel, rng: np.random.Generator) -> np.ndarray:
    """Draw a 2 x M array of transmit (row 0) and receive (row 1) gains.

    Phases are uniform on [0, 2π); magnitudes are 1 or uniform in [lo, hi].
    """
    phases = rng.uniform(0.0, 2.0 * math.pi, size=(2, antennas))
    if gain_model.kind is GainModelKind.UNIT_MAGNITUDE:
        magnitudes = np.ones((2, antennas))
    else:
        magnitudes = rng.uniform(gain_model.lo, gain_model.hi, size=(2, antennas))
    return magnitudes * np.exp(1j * phases)


def draw_rf_chain(cfg: NodeConfig, gain_model: GainModel, rng: np.random.Generator) -> RfChain:
    """Draw transmit and receive gains for every antenna of a node."""
    gains = draw_rf_gains(cfg.antennas, gain_model, rng)
    return RfChain(t=gains[0], r=gains[1])


def draw_node(cfg: NodeConfig, gain_model: GainModel, rng: np.random.Generator) -> Node:
    return Node(config=cfg, chain=draw_rf_chain(cfg, gain_model, rng))


def draw_channel(n: int, d: float, rng: np.random.Generator) -> ComplexVector:
    """Rayleigh-fading channel vector with i.i.d. CN(0, β(d)) entries."""
    if n < 1:
        raise ValueError("n must be positive")
    return complex_gaussian_vector(n, large_scale_gain(d), rng)


def draw_channel_set(
    m_a: int,
    m_b: int,
    d_a: float,
    d_b: float,
    rng: np.random.Generator,
    ue_distance: float | None = None,
    inter_ap_distance: float | None = None,
) -> ChannelSet:
    """Draw one block-fading realization of every link a trial needs.

    UE channels are drawn only when ue_distance is given, the AP-AP matrix
    only when inter_ap_distance is given.
    """
    g_A = draw_channel(m_a, d_a, rng)
    g_B = draw_channel(m_b, d_b, rng)
    h_A = h_B = H = None
    if ue_distance is not None:
        h_A = draw_channel(m_a, ue_distance, rng)
        h_B = draw_channel(m_b, ue_distance, rng)
    if inter_ap_distance is not None:
        H = complex_gaussian_matrix(m_a, m_b, large_scale_gain(inter_ap_distance), rng)
    return ChannelSet(g_A=g_A, g_B=g_B, h_A=h_A, h_B=h_B, H=H)


def reference_phase(node: Node) -> float:
    """∠t_ref − ∠r_ref of a node's reference antenna."""
    return float(np.angle(node.t_ref) - np.angle(node.r_ref))


def true_phase_offset(ap_a: Node, ap_b: Node) -> float:
    """θ = (∠t_B − ∠r_B) − (∠t_A − ∠r_A), wrapped to (−π, π]."""
    return float(wrap_angle(reference_phase(ap_b) - reference_phase(ap_a)))
