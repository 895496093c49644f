"""Vectorized execution of a block of trials of one cell.

Every trial still draws from its own (seed, d, ρ_R, trial) substreams, in
the order run_trial draws them; only the arithmetic runs on whole blocks.
A trial that run_trial would reject is flagged here with the reason
run_cell counts it under.
"""

import logging
import math
from collections import Counter
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, model_validator

from dmimo_repeater_sync.models.scenario import (
    MW,
    BeamformerKind,
    CMode,
    ScenarioConfig,
    SignalUnits,
)
from dmimo_repeater_sync.montecarlo.rng import make_streams
from dmimo_repeater_sync.numerics import complex_gaussian_matrix, complex_gaussian_vector, wrap_angle
from dmimo_repeater_sync.protocols.beamforming import acquire_beamformer_batch
from dmimo_repeater_sync.protocols.repeater import UNRESOLVABLE_FLOOR, LinkPowers, PilotSignal
from dmimo_repeater_sync.system_model import draw_rf_gains, large_scale_gain

logger = logging.getLogger(__name__)

UNRESOLVABLE = "unresolvable"
DEGENERATE = "degenerate"
NO_CONVERGENCE = "no_convergence"


class TrialBatch(BaseModel):
    """Per-trial results of a block of trials.

    Attributes:
        indices: Trial indices within the cell
        errors: Wrapped phase errors, NaN where flagged
        reasons: Flag reason per trial, None where kept
        cjt_gains: UE CJT gains (CJT runs only), NaN where flagged
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    indices: np.ndarray
    errors: np.ndarray
    reasons: List[Optional[str]]
    cjt_gains: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def validate_sizes(self) -> "TrialBatch":
        n = self.indices.size
        if self.errors.size != n or len(self.reasons) != n:
            raise ValueError("errors and reasons must have one entry per trial")
        if self.cjt_gains is not None and self.cjt_gains.size != n:
            raise ValueError("cjt_gains must have one entry per trial")
        return self

    @property
    def kept(self) -> NDArray[np.bool_]:
        return np.array([reason is None for reason in self.reasons], dtype=bool)

    def flagged_by_reason(self) -> Dict[str, int]:
        return dict(Counter(reason for reason in self.reasons if reason is not None))


def _zeros(*shape: int) -> np.ndarray:
    return np.zeros(shape, dtype=np.complex128)


class _Draws:
    """Random inputs of a block, stacked along the first axis."""

    def __init__(self, cfg: ScenarioConfig, n: int, sigma2: float):
        self.gains_a = _zeros(n, 2, cfg.m_a)
        self.gains_b = _zeros(n, 2, cfg.m_b)
        self.gains_r = _zeros(n, 2)
        self.gains_u = _zeros(n, 2) if cfg.cjt else None
        self.g_a = _zeros(n, cfg.m_a)
        self.g_b = _zeros(n, cfg.m_b)
        self.h_a = _zeros(n, cfg.m_a) if cfg.cjt else None
        self.h_b = _zeros(n, cfg.m_b) if cfg.cjt else None

        noisy = sigma2 > 0
        pilot = cfg.beamformer.kind is BeamformerKind.PILOT and noisy
        n_p, length = cfg.beamformer.pilot_length, cfg.pilot_length
        self.pilot_a = _zeros(n, cfg.m_a, n_p) if pilot else None
        self.pilot_b = _zeros(n, cfg.m_b, n_p) if pilot else None
        self.w_r1 = _zeros(n, length) if noisy else None
        self.w_b = _zeros(n, cfg.m_b, length) if noisy else None
        self.w_r2 = _zeros(n, length) if noisy else None
        self.w_a2 = _zeros(n, cfg.m_a, length) if noisy else None


def _draw_block(cfg: ScenarioConfig, indices: Sequence[int], sigma2: float) -> _Draws:
    draws = _Draws(cfg, len(indices), sigma2)
    beta_a, beta_b = large_scale_gain(cfg.d_m), large_scale_gain(cfg.distance_b_m)
    beta_ue = large_scale_gain(cfg.ue_distance_m) if cfg.cjt else 0.0
    n_p, length = cfg.beamformer.pilot_length, cfg.pilot_length

    for row, index in enumerate(indices):
        streams = make_streams(cfg.seed, cfg.d_m, cfg.rho_r_mw, index)
        draws.gains_a[row] = draw_rf_gains(cfg.m_a, cfg.gain_model, streams.gains)
        draws.gains_b[row] = draw_rf_gains(cfg.m_b, cfg.gain_model, streams.gains)
        draws.gains_r[row] = draw_rf_gains(1, cfg.gain_model, streams.gains)[:, 0]
        if draws.gains_u is not None:
            draws.gains_u[row] = draw_rf_gains(1, cfg.gain_model, streams.gains)[:, 0]

        draws.g_a[row] = complex_gaussian_vector(cfg.m_a, beta_a, streams.channels)
        draws.g_b[row] = complex_gaussian_vector(cfg.m_b, beta_b, streams.channels)
        if draws.h_a is not None and draws.h_b is not None:
            draws.h_a[row] = complex_gaussian_vector(cfg.m_a, beta_ue, streams.channels)
            draws.h_b[row] = complex_gaussian_vector(cfg.m_b, beta_ue, streams.channels)

        if draws.pilot_a is not None and draws.pilot_b is not None:
            draws.pilot_a[row] = complex_gaussian_matrix(cfg.m_a, n_p, sigma2, streams.pilot)
            draws.pilot_b[row] = complex_gaussian_matrix(cfg.m_b, n_p, sigma2, streams.pilot)

        if draws.w_r1 is not None:
            draws.w_r1[row] = complex_gaussian_vector(length, sigma2, streams.noise)
            draws.w_b[row] = complex_gaussian_matrix(cfg.m_b, length, sigma2, streams.noise)
            draws.w_r2[row] = complex_gaussian_vector(length, sigma2, streams.noise)
            draws.w_a2[row] = complex_gaussian_matrix(cfg.m_a, length, sigma2, streams.noise)
    return draws


class _Flags:
    """First flag reason per trial; later checks never overwrite it."""

    def __init__(self, n: int):
        self.reasons: List[Optional[str]] = [None] * n

    def mark(self, mask: NDArray[np.bool_], reason: str) -> None:
        for row in np.flatnonzero(mask):
            if self.reasons[row] is None:
                self.reasons[row] = reason


def _calibration_coeffs(gains: np.ndarray, ref_index: int) -> np.ndarray:
    t, r = gains[:, 0], gains[:, 1]
    coeffs = (t[:, ref_index] / r[:, ref_index])[:, None] * (r / t)
    coeffs[:, ref_index] = 1.0
    return coeffs


def _safe(values: np.ndarray, bad: NDArray[np.bool_]) -> np.ndarray:
    return np.where(bad, 1.0, values)


def _beamformers(
    cfg: ScenarioConfig,
    g_eff: np.ndarray,
    t_r: np.ndarray,
    pilot_noise: Optional[np.ndarray],
    pilot_power: float,
    flags: _Flags,
) -> np.ndarray:
    if cfg.beamformer.kind is BeamformerKind.GENIE:
        norm = np.linalg.norm(g_eff, axis=1)
        flags.mark(norm == 0, DEGENERATE)
        return np.conj(g_eff) / _safe(norm, norm == 0)[:, None]

    ones = np.ones(cfg.beamformer.pilot_length)
    rx = (math.sqrt(pilot_power) * t_r)[:, None, None] * g_eff[:, :, None] * ones
    if pilot_noise is not None:
        rx = rx + pilot_noise
    silent = ~np.any(rx, axis=(1, 2))
    flags.mark(silent, DEGENERATE)
    rx[silent] = 1.0
    f, converged = acquire_beamformer_batch(rx)
    flags.mark(~converged, NO_CONVERGENCE)
    return f


def _repeater_gain(
    link: LinkPowers, t_r: np.ndarray, signal: np.ndarray, agc: bool, flags: _Flags
) -> np.ndarray:
    gain = math.sqrt(link.rho_r) * t_r
    if not agc:
        return gain
    input_power = np.abs(signal) ** 2 + link.sigma2
    flags.mark(input_power <= 0, DEGENERATE)
    return gain / np.sqrt(_safe(input_power, input_power <= 0))


def _cjt_gains(
    cfg: ScenarioConfig, draws: _Draws, coeffs_a: np.ndarray, coeffs_b: np.ndarray,
    theta_hat: np.ndarray, flags: _Flags,
) -> np.ndarray:
    assert draws.gains_u is not None and draws.h_a is not None and draws.h_b is not None
    t_u, r_u = draws.gains_u[:, 0][:, None], draws.gains_u[:, 1][:, None]

    def downlink(gains: np.ndarray, coeffs: np.ndarray, h: np.ndarray) -> np.ndarray:
        t, r = gains[:, 0], gains[:, 1]
        return np.sum(r_u * h * t * coeffs * np.conj(r * h * t_u), axis=1)

    y_a = downlink(draws.gains_a, coeffs_a, draws.h_a)
    y_b = downlink(draws.gains_b, coeffs_b, draws.h_b)
    silent = (np.abs(y_a) == 0) | (np.abs(y_b) == 0)
    flags.mark(silent, DEGENERATE)
    if cfg.cjt_equal_amplitude:
        y_a = y_a / _safe(np.abs(y_a), silent)
        y_b = y_b / _safe(np.abs(y_b), silent)
    combined = np.abs(y_a * np.exp(1j * theta_hat) + y_b) ** 2
    total = (np.abs(y_a) + np.abs(y_b)) ** 2
    return np.minimum(1.0, combined / _safe(total, silent))


def run_trial_batch(cfg: ScenarioConfig, indices: Sequence[int]) -> TrialBatch:
    """Run the trials `indices` of one cell as a block.

    Produces the errors and CJT gains run_trial gives for the same indices,
    with each trial run_trial would reject flagged instead of raised.

    Raises:
        ValueError: If indices is empty or holds a negative index
    """
    indices = [int(i) for i in indices]
    if not indices:
        raise ValueError("indices must be non-empty")

    link = LinkPowers.from_watts(
        cfg.rho_a_mw * MW, cfg.rho_b_mw * MW, cfg.rho_r_mw * MW, cfg.sigma2_w, cfg.units
    )
    pilot_power = cfg.pilot_power_w
    if cfg.units is SignalUnits.NOISE_NORMALIZED and cfg.sigma2_w > 0:
        pilot_power /= cfg.sigma2_w
    x = PilotSignal.ones(cfg.pilot_length)
    length = x.length
    draws = _draw_block(cfg, indices, link.sigma2)
    flags = _Flags(len(indices))

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        t_a, r_a = draws.gains_a[:, 0], draws.gains_a[:, 1]
        t_b, r_b = draws.gains_b[:, 0], draws.gains_b[:, 1]
        t_r, r_r = draws.gains_r[:, 0], draws.gains_r[:, 1]
        g_eff_a = r_a * draws.g_a
        g_eff_b = r_b * draws.g_b

        f_a = _beamformers(cfg, g_eff_a, t_r, draws.pilot_a, pilot_power, flags)
        f_b = _beamformers(cfg, g_eff_b, t_r, draws.pilot_b, pilot_power, flags)
        coeffs_a = _calibration_coeffs(draws.gains_a, cfg.ref_index_a)
        coeffs_b = _calibration_coeffs(draws.gains_b, cfg.ref_index_b)

        # stage I: A -> R -> B
        signal1 = math.sqrt(link.rho_a) * r_r * np.sum(draws.g_a * t_a * coeffs_a * f_a, axis=1)
        y_r1 = signal1[:, None] * x.x
        if draws.w_r1 is not None:
            y_r1 = y_r1 + draws.w_r1
        gain1 = _repeater_gain(link, t_r, signal1, cfg.agc, flags)
        forward_gain = gain1 * np.sum(f_b * g_eff_b, axis=1)
        y_b = forward_gain[:, None] * y_r1
        if draws.w_b is not None:
            y_b = y_b + np.einsum("nm,nml->nl", f_b, draws.w_b)

        if cfg.c_mode is CMode.EMPIRICAL:
            C = np.sum(np.abs(y_b) ** 2, axis=1)
        else:
            combiner_noise = link.sigma2 * np.sum(np.abs(f_b) ** 2, axis=1)
            at_repeater = np.abs(signal1) ** 2 * length + length * link.sigma2
            C = np.abs(forward_gain) ** 2 * at_repeater + length * combiner_noise
        flags.mark(~(C > 0), DEGENERATE)
        C = _safe(C, ~(C > 0))

        # stage II: B -> R -> A
        signal2 = math.sqrt(link.rho_b) * r_r * np.sum(draws.g_b * t_b * coeffs_b * f_b, axis=1)
        y_r2 = (np.sqrt(length / C) * signal2)[:, None] * np.conj(y_b)
        if draws.w_r2 is not None:
            y_r2 = y_r2 + draws.w_r2
        gain2 = _repeater_gain(link, t_r, signal2, cfg.agc, flags)
        y = gain2 * np.sum(f_a * g_eff_a, axis=1) * (y_r2 @ x.x)
        if draws.w_a2 is not None:
            y = y + np.einsum("nm,nml->nl", f_a, draws.w_a2) @ x.x
        finite = np.isfinite(y)
        flags.mark(~finite, DEGENERATE)
        y = np.where(finite, y, 0.0)
        flags.mark(np.abs(y) < UNRESOLVABLE_FLOOR, UNRESOLVABLE)

        ref_a = np.angle(t_a[:, cfg.ref_index_a]) - np.angle(r_a[:, cfg.ref_index_a])
        ref_b = np.angle(t_b[:, cfg.ref_index_b]) - np.angle(r_b[:, cfg.ref_index_b])
        theta_true = np.asarray(wrap_angle(ref_b - ref_a))
        theta_hat = np.angle(y)
        errors = np.asarray(wrap_angle(theta_hat - theta_true), dtype=np.float64)

        gains = None
        if cfg.cjt:
            gains = _cjt_gains(cfg, draws, coeffs_a, coeffs_b, theta_hat, flags)

    kept = np.array([reason is None for reason in flags.reasons], dtype=bool)
    errors = np.where(kept, errors, np.nan)
    if gains is not None:
        gains = np.where(kept, gains, np.nan)

    if logger.isEnabledFor(logging.DEBUG):
        for index, reason in zip(indices, flags.reasons):
            if reason is not None:
                logger.debug(
                    f"trial {index} flagged {reason} at d={cfg.d_m} m, rho_r={cfg.rho_r_mw} mW"
                )

    return TrialBatch(
        indices=np.asarray(indices, dtype=np.int64),
        errors=errors,
        reasons=flags.reasons,
        cjt_gains=gains,
    )
