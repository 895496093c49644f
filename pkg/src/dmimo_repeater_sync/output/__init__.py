"""Result emission: tables, manifests and plots."""

from dmimo_repeater_sync.output.errors import OutputError
from dmimo_repeater_sync.output.plot import build_figure, curve_gid, emit_plot
from dmimo_repeater_sync.output.results import (
    OutputFormat,
    ResultsDocument,
    emit_manifest,
    emit_results,
    load_manifest,
    load_results,
    results_frame,
)

__all__ = [
    "OutputError",
    "OutputFormat",
    "ResultsDocument",
    "build_figure",
    "curve_gid",
    "emit_manifest",
    "emit_plot",
    "emit_results",
    "load_manifest",
    "load_results",
    "results_frame",
]
