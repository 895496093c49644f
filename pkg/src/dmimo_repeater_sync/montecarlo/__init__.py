"""Monte Carlo trial orchestration and sweeps."""

from dmimo_repeater_sync.montecarlo.batch import TrialBatch, run_trial_batch
from dmimo_repeater_sync.montecarlo.rng import TrialStreams, cell_key, make_streams
from dmimo_repeater_sync.montecarlo.sweep import (
    CellReport,
    EmptyCellError,
    SweepRunner,
    cell_config,
    run_cell,
    run_sweep,
    summarize_errors,
)
from dmimo_repeater_sync.montecarlo.trial import TrialScenario, draw_trial_scenario, run_trial

__all__ = [
    "CellReport",
    "EmptyCellError",
    "SweepRunner",
    "TrialBatch",
    "TrialScenario",
    "TrialStreams",
    "cell_config",
    "cell_key",
    "draw_trial_scenario",
    "make_streams",
    "run_cell",
    "run_sweep",
    "run_trial",
    "run_trial_batch",
    "summarize_errors",
]
