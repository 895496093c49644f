"""RF chain and node models."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from dmimo_repeater_sync.models._arrays import ReadOnlyComplexVector


class RfChain(BaseModel):
    """Per-antenna complex transmit/receive gains of one node.

    A repeater or a UE is the single-antenna case.

    Attributes:
        t: Transmit gain per antenna
        r: Receive gain per antenna
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: ReadOnlyComplexVector
    r: ReadOnlyComplexVector

    @model_validator(mode="after")
    def validate_gains(self) -> "RfChain":
        """Gains must be nonzero and both vectors the same length."""
        if self.t.shape != self.r.shape:
            raise ValueError(
                f"t and r must have equal dimensions, got {self.t.size} and {self.r.size}"
            )
        if np.any(np.abs(self.t) <= 0) or np.any(np.abs(self.r) <= 0):
            raise ValueError("RF gains must have strictly positive magnitude")
        return self

    @property
    def antennas(self) -> int:
        return int(self.t.size)

    def with_transmit_phase(self, index: int, phase: float) -> "RfChain":
        """Copy of the chain with t[index] rotated by e^{j·phase}."""
        t = self.t.copy()
        t[index] *= np.exp(1j * phase)
        return RfChain(t=t, r=self.r)


class NodeConfig(BaseModel):
    """Static description of an AP or repeater.

    Attributes:
        antennas: Antenna count M
        ref_index: Antenna used as calibration reference
        tx_power_w: Transmit power in watts
    """

    model_config = ConfigDict(frozen=True)

    antennas: int = Field(..., ge=1, description="Antenna count")
    ref_index: int = Field(default=0, ge=0, description="Calibration reference antenna")
    tx_power_w: float = Field(..., gt=0, description="Transmit power (W)")

    @model_validator(mode="after")
    def validate_ref_index(self) -> "NodeConfig":
        if self.ref_index >= self.antennas:
            raise ValueError(
                f"ref_index {self.ref_index} out of range for {self.antennas} antennas"
            )
        return self


class Node(BaseModel):
    """A node's configuration together with its drawn RF chain."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    config: NodeConfig
    chain: RfChain

    @model_validator(mode="after")
    def validate_dimensions(self) -> "Node":
        if self.chain.antennas != self.config.antennas:
            raise ValueError(
                f"RF chain has {self.chain.antennas} antennas, config expects "
                f"{self.config.antennas}"
            )
        return self

    @property
    def antennas(self) -> int:
        return self.config.antennas

    @property
    def ref_index(self) -> int:
        return self.config.ref_index

    @property
    def tx_power_w(self) -> float:
        return self.config.tx_power_w

    @property
    def t_ref(self) -> complex:
        return complex(self.chain.t[self.config.ref_index])

    @property
    def r_ref(self) -> complex:
        return complex(self.chain.r[self.config.ref_index])

    @property
    def t(self) -> np.ndarray:
        return self.chain.t

    @property
    def r(self) -> np.ndarray:
        return self.chain.r
