"""Synchronization protocols: calibration, BeamSync baseline, repeater-aided sync."""

from .beamforming import (
    acquire_beamformer,
    acquire_beamformer_batch,
    beamforming_efficiency,
    effective_channel,
    genie_beamformer,
    receive_repeater_pilot,
)
from .beamsync import beamsync_direct
from .calibration import (
    CalibrationCoeffs,
    calibrated_transmit,
    intra_ap_coeffs,
    node_coeffs,
    ue_receive_calibrated,
)
from .cjt import cjt_gain, ue_downlink_signal
from .errors import DegenerateLinkError, UnresolvableTrialError
from .repeater import (
    LinkPowers,
    PilotSignal,
    Stage1Result,
    power_normalizer_C,
    repeater_sync_noiseless,
    repeater_sync_stage1,
    repeater_sync_stage2,
)

__all__ = [
    "CalibrationCoeffs",
    "DegenerateLinkError",
    "LinkPowers",
    "PilotSignal",
    "Stage1Result",
    "UnresolvableTrialError",
    "acquire_beamformer",
    "acquire_beamformer_batch",
    "beamforming_efficiency",
    "beamsync_direct",
    "calibrated_transmit",
    "cjt_gain",
    "effective_channel",
    "genie_beamformer",
    "intra_ap_coeffs",
    "node_coeffs",
    "power_normalizer_C",
    "receive_repeater_pilot",
    "repeater_sync_noiseless",
    "repeater_sync_stage1",
    "repeater_sync_stage2",
    "ue_downlink_signal",
    "ue_receive_calibrated",
]
