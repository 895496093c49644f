"""CSV/JSON emission of sweep tables and their manifests."""

import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

import pandas as pd
from pydantic import BaseModel, Field, ValidationError

from dmimo_repeater_sync.models.results import (
    CSV_COLUMNS,
    CellFailure,
    RunManifest,
    SweepResult,
    SweepRow,
)
from dmimo_repeater_sync.output.errors import OutputError

logger = logging.getLogger(__name__)

# 17 significant digits round-trip every float64
CSV_FLOAT_FORMAT = "%.17e"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class ResultsDocument(BaseModel):
    """JSON layout: the manifest next to the rows it produced."""

    manifest: Optional[RunManifest] = None
    rows: List[SweepRow] = Field(default_factory=list)
    failures: List[CellFailure] = Field(default_factory=list)


def results_frame(result: SweepResult) -> pd.DataFrame:
    """Rows as a DataFrame with exactly the CSV columns."""
    frame = pd.DataFrame(
        [row.model_dump(include=set(CSV_COLUMNS)) for row in result.rows],
        columns=list(CSV_COLUMNS),
    )
    for column in ("d_m", "rho_r_mw", "rmse_rad", "ci95_low", "ci95_high", "mean_cjt_gain"):
        frame[column] = frame[column].astype(float)
    for column in ("trials_kept", "trials_flagged"):
        frame[column] = frame[column].astype("int64")
    return frame


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise OutputError(path, f"cannot write: {e}") from e


def emit_results(
    result: SweepResult,
    format: OutputFormat | str,
    path: str | Path,
    manifest: Optional[RunManifest] = None,
) -> Path:
    """Write a sweep table as CSV or JSON.

    CSV carries exactly the CSV_COLUMNS header with floats in full-precision
    scientific notation and an empty mean_cjt_gain when not computed. JSON
    holds the same rows plus low_confidence, the failed cells and the
    manifest.

    Raises:
        OutputError: If the file cannot be written
    """
    path = Path(path)
    fmt = OutputFormat(format)
    if fmt is OutputFormat.CSV:
        text = results_frame(result).to_csv(
            index=False, float_format=CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n"
        )
    else:
        document = ResultsDocument(manifest=manifest, rows=result.rows, failures=result.failures)
        text = document.model_dump_json(indent=2) + "\n"

    _write_text(path, text)
    logger.info(f"Wrote {len(result.rows)} rows to {path} ({fmt.value})")
    return path


def emit_manifest(manifest: RunManifest, path: str | Path) -> Path:
    """Write a standalone manifest (JSON) that can replay the run."""
    path = Path(path)
    _write_text(path, manifest.model_dump_json(indent=2) + "\n")
    logger.info(f"Wrote manifest to {path}")
    return path


def load_manifest(path: str | Path) -> RunManifest:
    """Read a manifest written by emit_manifest or embedded in a JSON result.

    Raises:
        OutputError: If the file is unreadable or not a manifest
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(path, f"cannot read: {e}") from e
    try:
        return RunManifest.model_validate_json(text)
    except ValidationError:
        pass
    try:
        document = ResultsDocument.model_validate_json(text)
    except ValidationError as e:
        raise OutputError(path, f"not a manifest: {e}") from e
    if document.manifest is None:
        raise OutputError(path, "result file carries no manifest")
    return document.manifest


def load_results(path: str | Path) -> Tuple[SweepResult, Optional[RunManifest]]:
    """Reload a JSON emission into a SweepResult and its manifest.

    Raises:
        OutputError: If the file is unreadable or malformed
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise OutputError(path, f"cannot read: {e}") from e
    try:
        document = ResultsDocument.model_validate_json(text)
    except ValidationError as e:
        raise OutputError(path, f"malformed results: {e}") from e
    return SweepResult(rows=document.rows, failures=document.failures), document.manifest
