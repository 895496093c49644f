"""Monte Carlo sweeps over AP-repeater distance and repeater power."""

import asyncio
import logging
import math
import time
from collections import Counter
from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

from dmimo_repeater_sync.metrics import SimulationMetrics
from dmimo_repeater_sync.models.results import CellFailure, SweepResult, SweepRow
from dmimo_repeater_sync.models.scenario import ScenarioConfig
from dmimo_repeater_sync.montecarlo.batch import run_trial_batch
from dmimo_repeater_sync.numerics import rmse_circular, wrap_angle

logger = logging.getLogger(__name__)

CONFIDENCE_LEVEL = 0.95
LOW_CONFIDENCE_FLAGGED_FRACTION = 0.01
TRIAL_BLOCK = 1024


class EmptyCellError(Exception):
    """Every trial of a cell was flagged."""

    def __init__(self, d_m: float, rho_r_mw: float, flagged: int):
        self.d_m = d_m
        self.rho_r_mw = rho_r_mw
        self.flagged = flagged
        super().__init__(
            f"all {flagged} trials flagged at d={d_m} m, rho_r={rho_r_mw} mW"
        )


def summarize_errors(
    errors: ArrayLike, confidence: float = CONFIDENCE_LEVEL
) -> tuple[float, float, float]:
    """Circular RMSE with a normal-approximation confidence interval.

    The interval is built on the mean of the squared wrapped errors and
    mapped through the square root; a single trial gives a zero-width
    interval.

    Returns:
        (rmse, ci_low, ci_high)
    """
    if not 0 < confidence < 1:
        raise ValueError("confidence must be in (0, 1)")
    rmse = rmse_circular(errors)
    squared = np.asarray(wrap_angle(np.asarray(errors, dtype=np.float64).ravel())) ** 2
    n = squared.size
    se = float(np.std(squared, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
    z = float(norm.ppf(0.5 + confidence / 2.0))
    mean_sq = rmse * rmse
    ci_low = min(math.sqrt(max(mean_sq - z * se, 0.0)), rmse)
    ci_high = max(math.sqrt(mean_sq + z * se), rmse)
    return rmse, ci_low, ci_high


class CellReport(BaseModel):
    """Reduction of one cell plus bookkeeping for logs and metrics."""

    model_config = ConfigDict(frozen=True)

    row: SweepRow
    trials_run: int = Field(..., ge=1)
    flagged_by_reason: Dict[str, int] = Field(default_factory=dict)
    duration_s: float = Field(default=0.0, ge=0)


def run_cell(cfg: ScenarioConfig, block_size: int = TRIAL_BLOCK) -> CellReport:
    """Run every trial of one (d, ρ_R) cell and reduce it to a row.

    Trials run in blocks of `block_size` through run_trial_batch. Flagged
    trials are counted per reason and excluded from the RMSE.

    Raises:
        EmptyCellError: If no trial could be kept
    """
    if block_size < 1:
        raise ValueError("block_size must be positive")
    start = time.perf_counter()
    errors: List[np.ndarray] = []
    gains: List[np.ndarray] = []
    flagged: Counter[str] = Counter()

    for first in range(0, cfg.trials, block_size):
        batch = run_trial_batch(cfg, range(first, min(first + block_size, cfg.trials)))
        kept = batch.kept
        errors.append(batch.errors[kept])
        if batch.cjt_gains is not None:
            gains.append(batch.cjt_gains[kept])
        flagged.update(batch.flagged_by_reason())

    kept_errors = np.concatenate(errors)
    kept_gains = np.concatenate(gains) if gains else np.empty(0)
    n_flagged = sum(flagged.values())
    if kept_errors.size == 0:
        raise EmptyCellError(cfg.d_m, cfg.rho_r_mw, n_flagged)

    rmse, ci_low, ci_high = summarize_errors(kept_errors)
    low_confidence = n_flagged / cfg.trials > LOW_CONFIDENCE_FLAGGED_FRACTION
    if low_confidence:
        logger.warning(
            f"Cell d={cfg.d_m} m, rho_r={cfg.rho_r_mw} mW is low-confidence: "
            f"{n_flagged}/{cfg.trials} trials flagged ({dict(flagged)})"
        )

    row = SweepRow(
        d_m=cfg.d_m,
        rho_r_mw=cfg.rho_r_mw,
        trials_kept=int(kept_errors.size),
        trials_flagged=n_flagged,
        rmse_rad=rmse,
        ci95_low=ci_low,
        ci95_high=ci_high,
        mean_cjt_gain=float(np.mean(kept_gains)) if kept_gains.size else None,
        low_confidence=low_confidence,
    )
    return CellReport(
        row=row,
        trials_run=cfg.trials,
        flagged_by_reason=dict(flagged),
        duration_s=time.perf_counter() - start,
    )


def cell_config(base: ScenarioConfig, d_m: float, rho_r_mw: float) -> ScenarioConfig:
    """The base scenario moved to one grid point (re-validated)."""
    return ScenarioConfig.model_validate({**base.model_dump(), "d_m": d_m, "rho_r_mw": rho_r_mw})


class SweepRunner:
    """Runs the cartesian product of distances and repeater powers.

    Cells are scheduled on an executor and gathered in grid order
    (distance-major). Every cell draws from its own substreams, so the
    table does not depend on worker count or completion order.
    """

    def __init__(
        self,
        base: ScenarioConfig,
        distances: Sequence[float],
        powers: Sequence[float],
        workers: int = 1,
        metrics: Optional[SimulationMetrics] = None,
    ):
        if not distances:
            raise ValueError("distances must be non-empty")
        if not powers:
            raise ValueError("powers must be non-empty")
        if workers < 1:
            raise ValueError("workers must be positive")

        self.base = base
        self.distances = list(distances)
        self.powers = list(powers)
        self.workers = workers
        self.metrics = metrics

    def cells(self) -> List[ScenarioConfig]:
        return [cell_config(self.base, d, p) for d in self.distances for p in self.powers]

    async def _run_one(
        self,
        loop: asyncio.AbstractEventLoop,
        executor: Optional[Executor],
        cfg: ScenarioConfig,
    ) -> CellReport | CellFailure:
        try:
            report = await loop.run_in_executor(executor, run_cell, cfg)
        except Exception as e:
            logger.error(f"Cell d={cfg.d_m} m, rho_r={cfg.rho_r_mw} mW failed: {e}")
            if self.metrics:
                self.metrics.record_cell_failure()
            return CellFailure(d_m=cfg.d_m, rho_r_mw=cfg.rho_r_mw, error=f"{type(e).__name__}: {e}")

        row = report.row
        logger.info(
            f"Cell d={row.d_m} m, rho_r={row.rho_r_mw} mW: rmse={row.rmse_rad:.4e} rad "
            f"[{row.ci95_low:.4e}, {row.ci95_high:.4e}], kept={row.trials_kept}, "
            f"flagged={row.trials_flagged} ({report.duration_s:.2f}s)"
        )
        if self.metrics:
            self.metrics.record_cell(report.trials_run, report.flagged_by_reason, report.duration_s)
        return report

    async def run(self) -> SweepResult:
        """Execute all cells and reduce them into a SweepResult."""
        cells = self.cells()
        logger.info(
            f"Starting sweep: {len(self.distances)} distances x {len(self.powers)} powers, "
            f"{self.base.trials} trials per cell, seed={self.base.seed}, workers={self.workers}"
        )
        if self.metrics:
            self.metrics.set_cells_pending(len(cells))

        loop = asyncio.get_running_loop()
        executor = ProcessPoolExecutor(max_workers=self.workers) if self.workers > 1 else None
        try:
            outcomes = await asyncio.gather(*(self._run_one(loop, executor, c) for c in cells))
        finally:
            if executor is not None:
                executor.shutdown()

        rows = [o.row for o in outcomes if isinstance(o, CellReport)]
        failures = [o for o in outcomes if isinstance(o, CellFailure)]
        logger.info(f"Sweep finished: {len(rows)} cells completed, {len(failures)} failed")
        return SweepResult(rows=rows, failures=failures)


def run_sweep(
    base: ScenarioConfig,
    distances: Sequence[float],
    powers: Sequence[float],
    workers: int = 1,
    metrics: Optional[SimulationMetrics] = None,
) -> SweepResult:
    """Synchronous entry point to SweepRunner."""
    return asyncio.run(SweepRunner(base, distances, powers, workers, metrics).run())
