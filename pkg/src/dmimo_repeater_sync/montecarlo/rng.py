"""Counter-based random substreams for trials."""

import numpy as np
from pydantic import BaseModel, ConfigDict


class TrialStreams(BaseModel):
    """Independent generators for the random parts of one trial.

    Splitting by purpose keeps the gains and channels of a trial unchanged
    when only the noise configuration changes.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    gains: np.random.Generator
    channels: np.random.Generator
    pilot: np.random.Generator
    noise: np.random.Generator


def _float_bits(value: float) -> int:
    return int(np.float64(value).view(np.uint64))


def cell_key(d_m: float, rho_r_mw: float) -> tuple[int, int]:
    """Integer key of a grid cell: the IEEE-754 bit patterns of d and ρ_R.

    Any two distinct grid values get distinct keys, however close they are.
    """
    return _float_bits(d_m), _float_bits(rho_r_mw)


def make_streams(seed: int, d_m: float, rho_r_mw: float, trial_index: int) -> TrialStreams:
    """Deterministically derive the streams of trial `trial_index` in a cell.

    The streams depend only on (seed, d, ρ_R, trial index), never on the
    order in which cells or trials are executed.

    Structure:
      (seed, d, ρ_R, trial)
        ├── gains
        ├── channels
        ├── pilot
        └── noise
    """
    if trial_index < 0:
        raise ValueError("trial_index must be non-negative")
    root = np.random.SeedSequence(entropy=seed, spawn_key=(*cell_key(d_m, rho_r_mw), trial_index))
    ss_gains, ss_channels, ss_pilot, ss_noise = root.spawn(4)
    return TrialStreams.model_construct(
        gains=np.random.default_rng(ss_gains),
        channels=np.random.default_rng(ss_channels),
        pilot=np.random.default_rng(ss_pilot),
        noise=np.random.default_rng(ss_noise),
    )
