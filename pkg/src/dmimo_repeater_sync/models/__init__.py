"""Data models for dmimo-repeater-sync."""

from .channels import ChannelSet, NoiseModel
from .outcome import SyncOutcome
from .results import CellFailure, RunManifest, SweepResult, SweepRow
from .rf import Node, NodeConfig, RfChain
from .scenario import (
    BeamformerKind,
    BeamformerMode,
    CMode,
    GainModel,
    GainModelKind,
    ScenarioConfig,
    SignalUnits,
)

__all__ = [
    "BeamformerKind",
    "BeamformerMode",
    "CMode",
    "CellFailure",
    "ChannelSet",
    "GainModel",
    "GainModelKind",
    "Node",
    "NodeConfig",
    "NoiseModel",
    "RfChain",
    "RunManifest",
    "ScenarioConfig",
    "SignalUnits",
    "SweepResult",
    "SweepRow",
    "SyncOutcome",
]
