"""Pytest configuration and fixtures."""

from typing import Callable

import numpy as np
import pytest

from dmimo_repeater_sync.config import Settings
from dmimo_repeater_sync.models import (
    GainModel,
    GainModelKind,
    Node,
    NodeConfig,
    ScenarioConfig,
)
from dmimo_repeater_sync.system_model import draw_node


@pytest.fixture(scope="session")
def event_loop_policy():
    """Configure event loop policy for async tests."""
    import asyncio
    return asyncio.get_event_loop_policy()


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixed-seed generator for tests that draw their own scenarios."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_node(rng: np.random.Generator) -> Callable[..., Node]:
    """Factory drawing a node with random RF gains."""

    def _make(
        antennas: int = 4,
        tx_power_w: float = 0.1,
        ref_index: int = 0,
        band: bool = False,
    ) -> Node:
        gain_model = GainModel(
            kind=GainModelKind.MAGNITUDE_BAND if band else GainModelKind.UNIT_MAGNITUDE
        )
        cfg = NodeConfig(antennas=antennas, ref_index=ref_index, tx_power_w=tx_power_w)
        return draw_node(cfg, gain_model, rng)

    return _make


@pytest.fixture
def noiseless_config() -> ScenarioConfig:
    """Small noiseless scenario; every trial must recover the offset exactly."""
    return ScenarioConfig(m_a=4, m_b=4, noiseless=True, trials=3, seed=11)


@pytest.fixture
def isolated_settings(monkeypatch: pytest.MonkeyPatch) -> Settings:
    """Settings with no DMIMO_* environment and no .env file."""
    for name in ("DMIMO_SEED", "DMIMO_TRIALS", "DMIMO_LOG_LEVEL", "DMIMO_WORKERS", "DMIMO_METRICS_PORT"):
        monkeypatch.delenv(name, raising=False)
    return Settings(_env_file=None)
