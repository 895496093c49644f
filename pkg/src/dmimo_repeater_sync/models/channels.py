"""Channel realization and noise models."""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from dmimo_repeater_sync.models._arrays import ReadOnlyComplexMatrix, ReadOnlyComplexVector

BOLTZMANN_J_PER_K = 1.380649e-23


class ChannelSet(BaseModel):
    """One block-fading realization of all reciprocal links.

    The same vectors serve both link directions within a trial.

    Attributes:
        g_A: AP-A <-> repeater
        g_B: AP-B <-> repeater
        h_A: AP-A <-> UE (only drawn for the CJT metric)
        h_B: AP-B <-> UE (only drawn for the CJT metric)
        H: AP-A <-> AP-B, M_A x M_B (BeamSync baseline only)
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    g_A: ReadOnlyComplexVector
    g_B: ReadOnlyComplexVector
    h_A: Optional[ReadOnlyComplexVector] = None
    h_B: Optional[ReadOnlyComplexVector] = None
    H: Optional[ReadOnlyComplexMatrix] = None

    @model_validator(mode="after")
    def validate_dimensions(self) -> "ChannelSet":
        if self.h_A is not None and self.h_A.size != self.g_A.size:
            raise ValueError("h_A must match the antenna count of AP-A")
        if self.h_B is not None and self.h_B.size != self.g_B.size:
            raise ValueError("h_B must match the antenna count of AP-B")
        if self.H is not None and self.H.shape != (self.g_A.size, self.g_B.size):
            raise ValueError(
                f"H must be {self.g_A.size}x{self.g_B.size}, got {self.H.shape}"
            )
        return self

    def check_dimensions(self, m_a: int, m_b: int) -> None:
        """Raise ValueError unless g_A/g_B match the given antenna counts."""
        if self.g_A.size != m_a or self.g_B.size != m_b:
            raise ValueError(
                f"channels sized ({self.g_A.size}, {self.g_B.size}) do not match "
                f"antenna counts ({m_a}, {m_b})"
            )


class NoiseModel(BaseModel):
    """Thermal receiver noise.

    Attributes:
        temperature_k: Operating temperature (K)
        bandwidth_hz: Receiver bandwidth (Hz)
        noise_figure_db: Receiver noise figure (dB)
    """

    model_config = ConfigDict(frozen=True)

    temperature_k: float = Field(default=290.0, gt=0, description="Temperature (K)")
    bandwidth_hz: float = Field(default=20e6, gt=0, description="Bandwidth (Hz)")
    noise_figure_db: float = Field(default=9.0, description="Noise figure (dB)")

    @computed_field  # type: ignore[prop-decorator]
    @property
    def sigma2(self) -> float:
        """Noise variance k_B·T·B·10^(NF/10) in watts."""
        return (
            BOLTZMANN_J_PER_K
            * self.temperature_k
            * self.bandwidth_hz
            * math.pow(10.0, self.noise_figure_db / 10.0)
        )
