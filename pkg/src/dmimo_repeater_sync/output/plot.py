"""SVG plot of RMSE against distance, one curve per repeater power."""

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from dmimo_repeater_sync.models.results import SweepResult  # noqa: E402
from dmimo_repeater_sync.output.errors import OutputError  # noqa: E402

logger = logging.getLogger(__name__)

CURVE_GID_PREFIX = "rmse-curve-"


def curve_gid(rho_r_mw: float) -> str:
    """SVG id of the curve for one repeater power, e.g. rmse-curve-10mW."""
    return f"{CURVE_GID_PREFIX}{rho_r_mw:g}mW"


def build_figure(result: SweepResult) -> Figure:
    """RMSE (log scale) versus distance with a legend in mW.

    Nonpositive RMSE values cannot sit on a log axis; they are masked, and an
    all-zero table falls back to a linear axis.

    Raises:
        ValueError: If the result has no rows
    """
    if not result.rows:
        raise ValueError("result must be non-empty")

    fig = Figure(figsize=(7, 5))
    ax = fig.add_subplot()
    any_positive = False

    for power in result.powers:
        rows = result.curve(power)
        d = np.array([r.d_m for r in rows])
        rmse = np.array([r.rmse_rad for r in rows])
        any_positive |= bool(np.any(rmse > 0))
        (line,) = ax.plot(
            d,
            np.ma.masked_where(rmse <= 0, rmse),
            marker="o",
            linewidth=1.5,
            label=f"{power:g} mW",
        )
        line.set_gid(curve_gid(power))

    if any_positive:
        ax.set_yscale("log")
    else:
        logger.warning("No positive RMSE to place on a log axis; using a linear axis")

    ax.set_xlabel("d (m)")
    ax.set_ylabel("RMSE (rad)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(title="Repeater power")
    fig.tight_layout()
    return fig


def emit_plot(result: SweepResult, path: str | Path) -> Path:
    """Render the sweep to an SVG file. Nothing is displayed.

    Raises:
        ValueError: If the result has no rows
        OutputError: If the file cannot be written
    """
    path = Path(path)
    fig = build_figure(result)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg")
    except OSError as e:
        raise OutputError(path, f"cannot write plot: {e}") from e
    logger.info(f"Wrote plot with {len(result.powers)} curves to {path}")
    return path
