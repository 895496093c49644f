"""Scenario configuration for protocol trials and sweeps."""

from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from dmimo_repeater_sync.models.channels import NoiseModel
from dmimo_repeater_sync.models.rf import NodeConfig

MW = 1e-3


class GainModelKind(str, Enum):
    """Distribution of RF gain magnitudes (phases are always uniform)."""
    UNIT_MAGNITUDE = "unit_magnitude"
    MAGNITUDE_BAND = "magnitude_band"


class BeamformerKind(str, Enum):
    """How the APs obtain their beamformers towards the repeater."""
    GENIE = "genie"
    PILOT = "pilot"


class CMode(str, Enum):
    """How AP-B computes its power normalizer C."""
    ANALYTIC = "analytic"
    EMPIRICAL = "empirical"


class SignalUnits(str, Enum):
    """Units in which transmit powers enter the signal model."""
    NOISE_NORMALIZED = "noise_normalized"
    WATTS = "watts"


class GainModel(BaseModel):
    """RF gain model.

    Attributes:
        kind: unit_magnitude or magnitude_band
        lo: Lower magnitude bound (magnitude_band only)
        hi: Upper magnitude bound (magnitude_band only)
    """

    model_config = ConfigDict(frozen=True)

    kind: GainModelKind = GainModelKind.UNIT_MAGNITUDE
    lo: float = Field(default=0.9, description="Lower magnitude bound")
    hi: float = Field(default=1.1, description="Upper magnitude bound")

    @model_validator(mode="after")
    def validate_band(self) -> "GainModel":
        if self.lo <= 0:
            raise ValueError(f"gain_model.lo must be positive, got {self.lo}")
        if self.hi < self.lo:
            raise ValueError(f"gain_model.hi ({self.hi}) must be >= lo ({self.lo})")
        return self


class BeamformerMode(BaseModel):
    """Beamformer acquisition settings.

    Attributes:
        kind: pilot (estimated from the repeater's pilot) or genie
            (perfect effective-channel knowledge)
        pilot_length: Repeater pilot samples N_p, a single symbol by default
        pilot_power_mw: Repeater pilot power; None uses rho_r_mw
    """

    model_config = ConfigDict(frozen=True)

    kind: BeamformerKind = BeamformerKind.PILOT
    pilot_length: int = Field(default=1, ge=1, description="Pilot samples N_p")
    pilot_power_mw: Optional[float] = Field(default=None, gt=0, description="Pilot power (mW)")


class ScenarioConfig(BaseModel):
    """Complete parameter set for one (distance, repeater power) cell.

    Defaults reproduce the published operating point: 16 antennas per AP,
    100 mW AP power, L = 10, 290 K, 20 MHz, 9 dB noise figure, with both
    beamformers estimated from one repeater pilot symbol at the repeater's
    transmit power.
    """

    model_config = ConfigDict(frozen=True)

    m_a: int = Field(default=16, ge=1, description="AP-A antennas")
    m_b: int = Field(default=16, ge=1, description="AP-B antennas")
    ref_index_a: int = Field(default=0, ge=0, description="AP-A reference antenna")
    ref_index_b: int = Field(default=0, ge=0, description="AP-B reference antenna")
    rho_a_mw: float = Field(default=100.0, gt=0, description="AP-A transmit power (mW)")
    rho_b_mw: float = Field(default=100.0, gt=0, description="AP-B transmit power (mW)")
    rho_r_mw: float = Field(default=1.0, gt=0, description="Repeater power (mW)")
    d_m: float = Field(default=20.0, gt=0, description="AP-A to repeater distance (m)")
    d_b_m: Optional[float] = Field(
        default=None, gt=0, description="AP-B to repeater distance (m); None follows d_m"
    )
    pilot_length: int = Field(default=10, ge=1, description="Synchronization signal length L")
    gain_model: GainModel = Field(default_factory=GainModel)
    beamformer: BeamformerMode = Field(default_factory=BeamformerMode)
    noise: NoiseModel = Field(default_factory=NoiseModel)
    noiseless: bool = Field(default=False, description="Force sigma^2 = 0")
    units: SignalUnits = SignalUnits.NOISE_NORMALIZED
    c_mode: CMode = CMode.ANALYTIC
    agc: bool = Field(default=False, description="Repeater automatic gain control")
    trials: int = Field(default=10_000, ge=1, description="Trials per cell")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Master seed")
    cjt: bool = Field(default=False, description="Evaluate the UE CJT gain")
    cjt_equal_amplitude: bool = Field(default=False, description="Equalize UE link amplitudes")
    ue_distance_m: float = Field(default=50.0, gt=0, description="AP to UE distance (m)")
    carrier_hz: float = Field(default=3e9, gt=0, description="Carrier frequency (Hz)")

    @model_validator(mode="after")
    def validate_ref_indices(self) -> "ScenarioConfig":
        if self.ref_index_a >= self.m_a:
            raise ValueError(f"ref_index_a {self.ref_index_a} out of range for m_a={self.m_a}")
        if self.ref_index_b >= self.m_b:
            raise ValueError(f"ref_index_b {self.ref_index_b} out of range for m_b={self.m_b}")
        return self

    @property
    def distance_b_m(self) -> float:
        return self.d_b_m if self.d_b_m is not None else self.d_m

    @property
    def sigma2_w(self) -> float:
        """Physical noise variance, 0 when noiseless."""
        return 0.0 if self.noiseless else self.noise.sigma2

    @property
    def pilot_power_w(self) -> float:
        mw = self.beamformer.pilot_power_mw
        return (mw if mw is not None else self.rho_r_mw) * MW

    def node_a(self) -> NodeConfig:
        return NodeConfig(antennas=self.m_a, ref_index=self.ref_index_a, tx_power_w=self.rho_a_mw * MW)

    def node_b(self) -> NodeConfig:
        return NodeConfig(antennas=self.m_b, ref_index=self.ref_index_b, tx_power_w=self.rho_b_mw * MW)

    def node_r(self) -> NodeConfig:
        return NodeConfig(antennas=1, ref_index=0, tx_power_w=self.rho_r_mw * MW)
