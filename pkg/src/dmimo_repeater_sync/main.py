"""
dmimo-repeater-sync - command-line sweep runner
"""
import argparse
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from dmimo_repeater_sync import __app_name__, __version__
from dmimo_repeater_sync.config import ConfigError, get_settings, parse_config
from dmimo_repeater_sync.logging_setup import setup_logging
from dmimo_repeater_sync.metrics import SimulationMetrics
from dmimo_repeater_sync.models.results import RunManifest, SweepResult
from dmimo_repeater_sync.models.scenario import BeamformerKind, CMode, SignalUnits
from dmimo_repeater_sync.montecarlo.sweep import run_sweep
from dmimo_repeater_sync.numerics import phase_error_to_time_s
from dmimo_repeater_sync.output import (
    OutputError,
    OutputFormat,
    emit_manifest,
    emit_plot,
    emit_results,
    load_manifest,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CELLS_FAILED = 1
EXIT_USAGE = 2

# CLI destination -> dotted config key
FLAG_KEYS = {
    "distance_m": "d_m",
    "rho_r_mw": "rho_r_mw",
    "d_b_m": "d_b_m",
    "trials": "trials",
    "seed": "seed",
    "beamformer": "beamformer.kind",
    "pilot_length": "beamformer.pilot_length",
    "pilot_power_mw": "beamformer.pilot_power_mw",
    "c_mode": "c_mode",
    "units": "units",
    "agc": "agc",
    "noiseless": "noiseless",
    "cjt": "cjt",
    "cjt_equal_amplitude": "cjt_equal_amplitude",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmimo-sync",
        description="Monte Carlo sweep of repeater-aided phase synchronization between two APs.",
    )
    parser.add_argument("--config", type=Path, help="YAML file with dotted keys")
    parser.add_argument("--from-manifest", type=Path, help="Replay a run from its manifest")

    grid = parser.add_argument_group("sweep")
    grid.add_argument("--distance-m", help="Comma-separated AP-repeater distances (m)")
    grid.add_argument("--rho-r-mw", help="Comma-separated repeater powers (mW)")
    grid.add_argument("--d-b-m", type=float, help="AP-B to repeater distance (m); default follows d")
    grid.add_argument("--trials", type=int, help="Trials per cell")
    grid.add_argument("--seed", type=int, help="Master seed (falls back to DMIMO_SEED)")

    protocol = parser.add_argument_group("protocol")
    protocol.add_argument("--beamformer", choices=[k.value for k in BeamformerKind])
    protocol.add_argument("--pilot-length", type=int, help="Beamformer pilot samples N_p")
    protocol.add_argument("--pilot-power-mw", type=float, help="Beamformer pilot power (mW)")
    protocol.add_argument("--c-mode", choices=[m.value for m in CMode])
    protocol.add_argument("--units", choices=[u.value for u in SignalUnits])
    protocol.add_argument("--agc", action="store_true", default=None, help="Repeater AGC")
    protocol.add_argument("--noiseless", action="store_true", default=None, help="Force sigma^2 = 0")
    protocol.add_argument("--cjt", action="store_true", default=None, help="Compute the UE CJT gain")
    protocol.add_argument(
        "--cjt-equal-amplitude", action="store_true", default=None,
        help="Normalize both UE links to unit amplitude",
    )

    out = parser.add_argument_group("output")
    out.add_argument("--out", type=Path, help="Result file (default sweep_results.<format>)")
    out.add_argument("--format", choices=[f.value for f in OutputFormat])
    out.add_argument("--plot", type=Path, help="SVG plot path")

    runtime = parser.add_argument_group("runtime")
    runtime.add_argument("--workers", type=int, help="Worker processes")
    runtime.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])
    runtime.add_argument("--metrics-port", type=int, help="Expose Prometheus metrics on this port")
    runtime.add_argument("--version", action="version", version=f"{__app_name__} {__version__}")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Dotted-key overrides for every flag given on the command line."""
    return {
        key: getattr(args, dest)
        for dest, key in FLAG_KEYS.items()
        if getattr(args, dest) is not None
    }


def manifest_path(out: Path) -> Path:
    """Manifest written alongside a result file."""
    return out.with_name(f"{out.stem}.manifest.json")


def log_timing_errors(result: SweepResult, carrier_hz: float) -> None:
    for row in result.rows:
        timing_ps = phase_error_to_time_s(row.rmse_rad, carrier_hz) * 1e12
        logger.info(
            f"d={row.d_m:g} m, rho_r={row.rho_r_mw:g} mW: rmse={row.rmse_rad:.4e} rad "
            f"= {timing_ps:.4f} ps at {carrier_hz / 1e9:g} GHz"
        )


def summarize_failures(result: SweepResult) -> str:
    cells = "; ".join(
        f"d={f.d_m:g} m, rho_r={f.rho_r_mw:g} mW ({f.error})" for f in result.failures
    )
    return f"{len(result.failures)} cell(s) failed: {cells}"


def resolve_manifest(args: argparse.Namespace) -> RunManifest:
    """The manifest this invocation will execute, fully resolved.

    Raises:
        ConfigError: On invalid configuration
        OutputError: If a manifest to replay cannot be read
    """
    if args.from_manifest is not None:
        manifest = load_manifest(args.from_manifest)
        updates: Dict[str, Any] = {}
        if args.out is not None:
            updates["output_path"] = str(args.out)
        if args.format is not None:
            updates["output_format"] = args.format
        if args.plot is not None:
            updates["plot_path"] = str(args.plot)
        logger.info(f"Replaying manifest {args.from_manifest} (seed={manifest.seed})")
        return manifest.model_copy(update=updates)

    resolved = parse_config(args.config, overrides_from_args(args))
    fmt = args.format or OutputFormat.CSV.value
    out = args.out or Path(f"sweep_results.{fmt}")
    return RunManifest(
        scenario=resolved.scenario,
        distances_m=resolved.distances_m,
        powers_mw=resolved.powers_mw,
        output_path=str(out),
        output_format=fmt,
        plot_path=str(args.plot) if args.plot is not None else None,
        tool_version=__version__,
        seed=resolved.scenario.seed,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point: resolve config, run the sweep, write results.

    Returns:
        0 if every cell completed, 1 if some cells failed, 2 on usage,
        configuration or output errors
    """
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(args.log_level or settings.log_level)

    try:
        manifest = resolve_manifest(args)
    except (ConfigError, OutputError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_USAGE

    workers = args.workers if args.workers is not None else settings.workers
    if workers < 1:
        logger.error("Invalid configuration: workers must be positive")
        return EXIT_USAGE

    metrics = SimulationMetrics()
    port = args.metrics_port or settings.metrics_port
    if port:
        metrics.start_metrics_server(port)

    logger.info(f"Starting {__app_name__} v{__version__}")
    started_at = datetime.now(timezone.utc)
    result = run_sweep(
        manifest.scenario, manifest.distances_m, manifest.powers_mw, workers=workers, metrics=metrics
    )
    manifest = manifest.model_copy(
        update={"started_at": started_at, "finished_at": datetime.now(timezone.utc)}
    )
    log_timing_errors(result, manifest.scenario.carrier_hz)

    try:
        out = Path(manifest.output_path or f"sweep_results.{manifest.output_format}")
        emit_results(result, manifest.output_format, out, manifest=manifest)
        emit_manifest(manifest, manifest_path(out))
        if manifest.plot_path is not None:
            if result.rows:
                emit_plot(result, manifest.plot_path)
            else:
                logger.warning("No completed cells; plot skipped")
    except OutputError as e:
        logger.error(f"Output failed: {e}")
        return EXIT_USAGE

    if result.failures:
        logger.error(summarize_failures(result))
        return EXIT_CELLS_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
