"""Prometheus metrics for simulation sweeps."""

import logging
from typing import Dict, Optional

from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, start_http_server

logger = logging.getLogger(__name__)


class SimulationMetrics:
    """Prometheus metrics collector for sweep execution.

    Each instance owns its registry, so several runners (or tests) can
    coexist in one process.
    """

    def __init__(self, registry: Optional[CollectorRegistry] = None):
        self.registry = registry or CollectorRegistry()

        # Counters
        self.trials_total = Counter(
            'dmimo_trials_total',
            'Total number of synchronization trials executed',
            registry=self.registry,
        )

        self.trials_flagged_total = Counter(
            'dmimo_trials_flagged_total',
            'Trials excluded from the RMSE, by reason',
            ['reason'],
            registry=self.registry,
        )

        self.cells_failed_total = Counter(
            'dmimo_cells_failed_total',
            'Sweep cells that raised instead of completing',
            registry=self.registry,
        )

        # Histograms
        self.cell_duration_seconds = Histogram(
            'dmimo_cell_duration_seconds',
            'Wall-clock duration of one sweep cell in seconds',
            buckets=(0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0),
            registry=self.registry,
        )

        # Gauges
        self.cells_pending = Gauge(
            'dmimo_cells_pending',
            'Sweep cells scheduled but not yet reduced',
            registry=self.registry,
        )

        logger.debug("Prometheus metrics initialized")

    def start_metrics_server(self, port: int) -> None:
        """Expose this registry over HTTP.

        Args:
            port: Port for the metrics endpoint
        """
        try:
            start_http_server(port, registry=self.registry)
            logger.info(f"Metrics server started on port {port}")
        except OSError as e:
            logger.warning(f"Metrics server port {port} already in use: {e}")

    def set_cells_pending(self, count: int) -> None:
        self.cells_pending.set(count)

    def record_cell(self, trials: int, flagged_by_reason: Dict[str, int], duration: float) -> None:
        """Record a completed cell.

        Args:
            trials: Trials executed, flagged ones included
            flagged_by_reason: Flagged trial counts keyed by reason
            duration: Time taken in seconds
        """
        self.trials_total.inc(trials)
        for reason, count in flagged_by_reason.items():
            self.trials_flagged_total.labels(reason=reason).inc(count)
        self.cell_duration_seconds.observe(duration)
        self.cells_pending.dec()

    def record_cell_failure(self) -> None:
        self.cells_failed_total.inc()
        self.cells_pending.dec()
