"""Repeater-aided over-the-air phase synchronization.

AP-A (primary) and AP-B (secondary) both reach a single-antenna
amplify-and-forward repeater R but not each other. The noiseless protocol
is a four-message chain; the noisy protocol uses two stages:

- Stage I: AP-A sends pilot x through f_A; R forwards; AP-B combines with f_B.
- Stage II: AP-B sends the conjugate of what it received, scaled by √(L/C),
  through f_B; R forwards; AP-A combines with f_A and correlates with x.

The argument of the resulting statistic y is the offset
θ = (∠t_B − ∠r_B) − (∠t_A − ∠r_A).
"""

import functools
import logging
import math

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from dmimo_repeater_sync.models._arrays import ReadOnlyComplexVector
from dmimo_repeater_sync.models.channels import ChannelSet
from dmimo_repeater_sync.models.outcome import SyncOutcome
from dmimo_repeater_sync.models.rf import Node, RfChain
from dmimo_repeater_sync.models.scenario import CMode, SignalUnits
from dmimo_repeater_sync.numerics import (
    ComplexVector,
    as_complex_vector,
    complex_gaussian_matrix,
    complex_gaussian_vector,
)
from dmimo_repeater_sync.protocols.beamforming import effective_channel
from dmimo_repeater_sync.protocols.calibration import calibrated_transmit
from dmimo_repeater_sync.protocols.errors import DegenerateLinkError, UnresolvableTrialError
from dmimo_repeater_sync.system_model import true_phase_offset

logger = logging.getLogger(__name__)

UNRESOLVABLE_FLOOR = 1e-30
DEGENERATE_BEAMFORMER_RATIO = 1e-15
UNIT_NORM_TOL = 1e-9


class PilotSignal(BaseModel):
    """Synchronization signal x, scaled at construction so that ‖x‖² = L."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    x: ReadOnlyComplexVector

    @field_validator("x")
    @classmethod
    def normalize_energy(cls, v: np.ndarray) -> np.ndarray:
        norm = float(np.linalg.norm(v))
        if norm == 0:
            raise ValueError("pilot must be nonzero")
        scaled = v * (math.sqrt(v.size) / norm)
        scaled.flags.writeable = False
        return scaled

    @classmethod
    @functools.lru_cache(maxsize=64)
    def ones(cls, length: int) -> "PilotSignal":
        """All-ones pilot of the given length; instances are shared."""
        if length < 1:
            raise ValueError("pilot length must be positive")
        return cls(x=np.ones(length, dtype=np.complex128))

    @property
    def length(self) -> int:
        return int(self.x.size)

    @property
    def energy(self) -> float:
        return float(np.vdot(self.x, self.x).real)


class LinkPowers(BaseModel):
    """Transmit powers and noise variance in the units the equations run in.

    In noise-normalized units every power is divided by σ² and the noise has
    unit variance. With σ² = 0 the physical values are kept.
    """

    model_config = ConfigDict(frozen=True)

    rho_a: float = Field(..., gt=0)
    rho_b: float = Field(..., gt=0)
    rho_r: float = Field(..., gt=0)
    sigma2: float = Field(..., ge=0)

    @classmethod
    def from_nodes(
        cls,
        ap_a: Node,
        ap_b: Node,
        repeater: Node,
        sigma2_w: float,
        units: SignalUnits = SignalUnits.NOISE_NORMALIZED,
    ) -> "LinkPowers":
        return cls.from_watts(
            ap_a.tx_power_w, ap_b.tx_power_w, repeater.tx_power_w, sigma2_w, units
        )

    @classmethod
    def from_watts(
        cls,
        rho_a_w: float,
        rho_b_w: float,
        rho_r_w: float,
        sigma2_w: float,
        units: SignalUnits = SignalUnits.NOISE_NORMALIZED,
    ) -> "LinkPowers":
        if units is SignalUnits.NOISE_NORMALIZED and sigma2_w > 0:
            return cls(
                rho_a=rho_a_w / sigma2_w,
                rho_b=rho_b_w / sigma2_w,
                rho_r=rho_r_w / sigma2_w,
                sigma2=1.0,
            )
        return cls(rho_a=rho_a_w, rho_b=rho_b_w, rho_r=rho_r_w, sigma2=sigma2_w)


class Stage1Result(BaseModel):
    """Stage-I observations plus the quantities the analytic C needs.

    Attributes:
        y_R1: Samples received at the repeater (L)
        y_B: AP-B's combined samples (L)
        repeater_signal: √ρ_A·(t_A/r_A)·r_R·g̃_Aᵀf_A, the noiseless amplitude at R
        forward_gain: Repeater gain times f_Bᵀg̃_B
        combiner_noise: Noise variance after AP-B's combiner, σ²·‖f_B‖²
        sigma2: Per-sample noise variance at the repeater
        length: Pilot length L
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    y_R1: ReadOnlyComplexVector
    y_B: ReadOnlyComplexVector
    repeater_signal: complex
    forward_gain: complex
    combiner_noise: float = Field(..., ge=0)
    sigma2: float = Field(..., ge=0)
    length: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_lengths(self) -> "Stage1Result":
        if self.y_R1.size != self.length or self.y_B.size != self.length:
            raise ValueError(f"stage-I samples must have length {self.length}")
        return self


def _check_unit_norm(f: ComplexVector, name: str) -> None:
    if not math.isclose(float(np.linalg.norm(f)), 1.0, rel_tol=UNIT_NORM_TOL):
        raise ValueError(f"{name} must have unit norm")


def _repeater_gain(link: LinkPowers, repeater: Node, input_power: float, agc: bool) -> complex:
    gain = math.sqrt(link.rho_r) * complex(repeater.t[0])
    if agc:
        if input_power <= 0:
            raise DegenerateLinkError("repeater input power is zero")
        gain /= math.sqrt(input_power)
    return gain


def _check_beamformer(f: ComplexVector, g_eff: ComplexVector, side: str) -> complex:
    inner = complex(f @ g_eff)
    if abs(inner) < DEGENERATE_BEAMFORMER_RATIO * float(np.linalg.norm(g_eff)):
        raise DegenerateLinkError(f"beamformer of AP-{side} is orthogonal to its channel")
    return inner


def repeater_sync_noiseless(
    ap_a: Node,
    ap_b: Node,
    repeater: Node,
    channels: ChannelSet,
    f_A: ArrayLike,
    f_B: ArrayLike,
) -> SyncOutcome:
    """Four-message noiseless chain A → R → B, then B → R → A.

    With pilot 1: R receives y_R1 and forwards; AP-B combines to y_B2 and
    conjugates it into a second reference; R receives y_R3 and forwards;
    AP-A combines to y_A4 = c·e^{jθ}.

    Raises:
        DegenerateLinkError: If a beamformer is orthogonal to its channel
    """
    f_A = as_complex_vector(f_A, "f_A")
    f_B = as_complex_vector(f_B, "f_B")
    channels.check_dimensions(ap_a.antennas, ap_b.antennas)
    g_eff_a = effective_channel(ap_a, channels.g_A)
    g_eff_b = effective_channel(ap_b, channels.g_B)
    inner_a = _check_beamformer(f_A, g_eff_a, "A")
    inner_b = _check_beamformer(f_B, g_eff_b, "B")

    t_r, r_r = complex(repeater.t[0]), complex(repeater.r[0])
    y_r1 = r_r * complex(channels.g_A @ calibrated_transmit(ap_a, f_A))
    y_b2 = complex(f_B @ g_eff_b) * t_r * y_r1
    x_b = y_b2.conjugate()
    y_r3 = r_r * complex(channels.g_B @ calibrated_transmit(ap_b, f_B)) * x_b
    y_a4 = complex(f_A @ g_eff_a) * t_r * y_r3

    c = (
        abs(ap_a.t_ref) / abs(ap_a.r_ref)
        * abs(ap_b.t_ref) / abs(ap_b.r_ref)
        * abs(inner_a) ** 2
        * abs(inner_b) ** 2
        * abs(t_r) ** 2
        * abs(r_r) ** 2
    )
    if abs(y_a4) < UNRESOLVABLE_FLOOR:
        raise UnresolvableTrialError(abs(y_a4))
    return SyncOutcome.from_statistic(true_phase_offset(ap_a, ap_b), y_a4, c)


def repeater_sync_stage1(
    x: PilotSignal,
    f_A: ArrayLike,
    ap_a: Node,
    repeater: Node,
    channels: ChannelSet,
    f_B: ArrayLike,
    ap_b: Node,
    link: LinkPowers,
    rng: np.random.Generator,
    agc: bool = False,
) -> Stage1Result:
    """AP-A sends x towards R, which amplifies and repeats it to AP-B.

    y_R1ᵀ = √ρ_A·(t_A/r_A)·r_R·g̃_Aᵀf_A·xᵀ + w_R1
    y_Bᵀ  = f_Bᵀ(√ρ_R·t_R·g̃_B·y_R1ᵀ + W_B)
    """
    f_A = as_complex_vector(f_A, "f_A")
    f_B = as_complex_vector(f_B, "f_B")
    _check_unit_norm(f_A, "f_A")
    _check_unit_norm(f_B, "f_B")
    channels.check_dimensions(ap_a.antennas, ap_b.antennas)
    length = x.length

    signal = math.sqrt(link.rho_a) * complex(repeater.r[0]) * complex(
        channels.g_A @ calibrated_transmit(ap_a, f_A)
    )
    y_r1 = signal * x.x
    if link.sigma2 > 0:
        y_r1 = y_r1 + complex_gaussian_vector(length, link.sigma2, rng)

    gain = _repeater_gain(link, repeater, abs(signal) ** 2 + link.sigma2, agc)
    g_eff_b = effective_channel(ap_b, channels.g_B)
    rx_b = np.outer(g_eff_b, gain * y_r1)
    if link.sigma2 > 0:
        rx_b = rx_b + complex_gaussian_matrix(ap_b.antennas, length, link.sigma2, rng)
    y_b = f_B @ rx_b

    return Stage1Result(
        y_R1=y_r1,
        y_B=y_b,
        repeater_signal=signal,
        forward_gain=gain * complex(f_B @ g_eff_b),
        combiner_noise=link.sigma2 * float(np.vdot(f_B, f_B).real),
        sigma2=link.sigma2,
        length=length,
    )


def power_normalizer_C(stage1: Stage1Result, mode: CMode = CMode.ANALYTIC) -> float:
    """AP-B's power normalizer C = E{‖y_B‖²}.

    Analytic mode takes the expectation over both noise terms, conditioned
    on channels and gains; empirical mode uses the realized ‖y_B‖².
    """
    if mode is CMode.EMPIRICAL:
        return float(np.vdot(stage1.y_B, stage1.y_B).real)
    length = stage1.length
    at_repeater = abs(stage1.repeater_signal) ** 2 * length + length * stage1.sigma2
    return abs(stage1.forward_gain) ** 2 * at_repeater + length * stage1.combiner_noise


def repeater_sync_stage2(
    stage1: Stage1Result,
    C: float,
    f_B: ArrayLike,
    ap_b: Node,
    repeater: Node,
    channels: ChannelSet,
    f_A: ArrayLike,
    ap_a: Node,
    x: PilotSignal,
    link: LinkPowers,
    rng: np.random.Generator,
    agc: bool = False,
) -> tuple[complex, SyncOutcome]:
    """AP-B returns conj(y_B) through R; AP-A forms y = f_AᵀY_A2·x and θ̂ = ∠y.

    y_R2ᵀ = √(L/C)·√ρ_B·(t_B/r_B)·r_R·g̃_Bᵀf_B·y_Bᴴ + w_R2ᵀ
    Y_A2  = √ρ_R·t_R·g̃_A·y_R2ᵀ + W_A2ᵀ

    c is the noiseless |y|, L^{3/2}/√C times the product of the link gains.

    Raises:
        ValueError: If C <= 0
        UnresolvableTrialError: If |y| < 1e-30
    """
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    f_A = as_complex_vector(f_A, "f_A")
    f_B = as_complex_vector(f_B, "f_B")
    length = x.length
    if stage1.y_B.size != length:
        raise ValueError("stage-I output length does not match the pilot")

    scale = math.sqrt(length / C)
    signal = math.sqrt(link.rho_b) * complex(repeater.r[0]) * complex(
        channels.g_B @ calibrated_transmit(ap_b, f_B)
    )
    y_r2 = scale * signal * np.conj(stage1.y_B)
    if link.sigma2 > 0:
        y_r2 = y_r2 + complex_gaussian_vector(length, link.sigma2, rng)

    gain = _repeater_gain(link, repeater, abs(signal) ** 2 + link.sigma2, agc)
    g_eff_a = effective_channel(ap_a, channels.g_A)
    rx_a = np.outer(g_eff_a, gain * y_r2)
    if link.sigma2 > 0:
        rx_a = rx_a + complex_gaussian_matrix(ap_a.antennas, length, link.sigma2, rng)
    y = complex(f_A @ rx_a @ x.x)

    if abs(y) < UNRESOLVABLE_FLOOR:
        raise UnresolvableTrialError(abs(y))

    c = (
        x.energy
        * scale
        * abs(gain * complex(f_A @ g_eff_a))
        * abs(signal)
        * abs(stage1.forward_gain)
        * abs(stage1.repeater_signal)
    )
    return y, SyncOutcome.from_statistic(true_phase_offset(ap_a, ap_b), y, c)
