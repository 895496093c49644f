"""Sweep result and run manifest models."""

from datetime import datetime
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from dmimo_repeater_sync.models.scenario import ScenarioConfig

CSV_COLUMNS = (
    "d_m",
    "rho_r_mw",
    "trials_kept",
    "trials_flagged",
    "rmse_rad",
    "ci95_low",
    "ci95_high",
    "mean_cjt_gain",
)


class SweepRow(BaseModel):
    """Statistics of one (distance, repeater power) cell.

    Attributes:
        d_m: AP to repeater distance (m)
        rho_r_mw: Repeater power (mW)
        trials_kept: Trials contributing to the RMSE
        trials_flagged: Unresolvable or degenerate trials, excluded
        rmse_rad: Circular RMSE of the kept trials
        ci95_low: Lower 95% confidence bound on the RMSE
        ci95_high: Upper 95% confidence bound on the RMSE
        mean_cjt_gain: Mean UE CJT gain when requested
        low_confidence: More than 1% of trials flagged
    """

    model_config = ConfigDict(frozen=True)

    d_m: float = Field(..., gt=0)
    rho_r_mw: float = Field(..., gt=0)
    trials_kept: int = Field(..., ge=0)
    trials_flagged: int = Field(..., ge=0)
    rmse_rad: float = Field(..., ge=0)
    ci95_low: float = Field(..., ge=0)
    ci95_high: float = Field(..., ge=0)
    mean_cjt_gain: Optional[float] = None
    low_confidence: bool = False

    @model_validator(mode="after")
    def validate_interval(self) -> "SweepRow":
        if not self.ci95_low <= self.rmse_rad <= self.ci95_high:
            raise ValueError(
                f"confidence interval [{self.ci95_low}, {self.ci95_high}] does not "
                f"contain rmse {self.rmse_rad}"
            )
        return self


class CellFailure(BaseModel):
    """A cell that raised instead of completing."""

    d_m: float
    rho_r_mw: float
    error: str


class SweepResult(BaseModel):
    """Table of cells, ordered as (distance, power) in grid order."""

    rows: List[SweepRow] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)

    @property
    def distances(self) -> List[float]:
        return sorted({row.d_m for row in self.rows})

    @property
    def powers(self) -> List[float]:
        return sorted({row.rho_r_mw for row in self.rows})

    def row(self, d_m: float, rho_r_mw: float) -> SweepRow:
        """Look up a cell by its grid coordinates."""
        for row in self.rows:
            if row.d_m == d_m and row.rho_r_mw == rho_r_mw:
                return row
        raise KeyError(f"no cell at d={d_m} m, rho_r={rho_r_mw} mW")

    def curve(self, rho_r_mw: float) -> List[SweepRow]:
        """Rows of one repeater power, sorted by distance."""
        return sorted((r for r in self.rows if r.rho_r_mw == rho_r_mw), key=lambda r: r.d_m)


class RunManifest(BaseModel):
    """Everything needed to reproduce a run.

    Attributes:
        scenario: Fully resolved base scenario
        distances_m: Distance grid
        powers_mw: Repeater power grid
        output_path: Result file
        output_format: csv or json
        plot_path: Optional SVG path
        tool_version: Package version that produced the run
        started_at: Wall-clock start (UTC)
        finished_at: Wall-clock end (UTC)
        seed: Master seed (mirrors scenario.seed)
    """

    scenario: ScenarioConfig
    distances_m: List[float] = Field(..., min_length=1)
    powers_mw: List[float] = Field(..., min_length=1)
    output_path: Optional[str] = None
    output_format: str = Field(default="csv", pattern="^(csv|json)$")
    plot_path: Optional[str] = None
    tool_version: str
    started_at: Optional[datetime] = None
    finished_at: Optional[datetime] = None
    seed: int

    @model_validator(mode="after")
    def validate_seed(self) -> "RunManifest":
        if self.seed != self.scenario.seed:
            raise ValueError("manifest seed must equal scenario.seed")
        return self
