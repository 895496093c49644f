"""Configuration management: runtime settings and scenario files."""

import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from dmimo_repeater_sync.models.scenario import ScenarioConfig

logger = logging.getLogger(__name__)

DEFAULT_DISTANCES_M: List[float] = [1.0] + [float(d) for d in range(5, 101, 5)]
DEFAULT_POWERS_MW: List[float] = [1.0, 2.0, 5.0, 10.0]

# Grid keys take a number or a list; the first entry seeds the base scenario
GRID_KEYS = ("d_m", "rho_r_mw")

SCENARIO_KEYS = frozenset(
    {
        "m_a",
        "m_b",
        "ref_index_a",
        "ref_index_b",
        "rho_a_mw",
        "rho_b_mw",
        "d_b_m",
        "pilot_length",
        "gain_model.kind",
        "gain_model.lo",
        "gain_model.hi",
        "beamformer.kind",
        "beamformer.pilot_length",
        "beamformer.pilot_power_mw",
        "noise.temperature_k",
        "noise.bandwidth_hz",
        "noise.noise_figure_db",
        "noiseless",
        "units",
        "c_mode",
        "agc",
        "trials",
        "seed",
        "cjt",
        "cjt_equal_amplitude",
        "ue_distance_m",
        "carrier_hz",
    }
)

KNOWN_KEYS = SCENARIO_KEYS | frozenset(GRID_KEYS)


class ConfigError(Exception):
    """Invalid configuration value, attributed to its dotted key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables (prefix DMIMO_).

    Attributes:
        seed: Seed fallback when neither the config file nor a flag sets one
        trials: Trials-per-cell fallback
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        workers: Process pool size for sweeps (1 runs in-process)
        metrics_port: Prometheus metrics port; None disables the endpoint
    """

    model_config = SettingsConfigDict(
        env_prefix="DMIMO_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    trials: Optional[int] = Field(default=None, ge=1)

    # Logging
    log_level: str = Field(
        default="INFO",
        pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$"
    )

    # Execution
    workers: int = Field(default=1, ge=1, description="Sweep worker processes")

    # Metrics
    metrics_port: Optional[int] = Field(
        default=None,
        ge=1024,
        le=65535,
        description="Prometheus metrics port"
    )


# Global settings instance
_settings: Settings | None = None


def get_settings() -> Settings:
    """Get or create settings instance (singleton pattern).

    Returns:
        Settings instance
    """
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


class ResolvedConfig(BaseModel):
    """Fully resolved base scenario plus sweep grids."""

    model_config = ConfigDict(frozen=True)

    scenario: ScenarioConfig
    distances_m: List[float]
    powers_mw: List[float]


def flatten(mapping: Mapping[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Flatten nested mappings into dotted keys."""
    flat: Dict[str, Any] = {}
    for key, value in mapping.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, prefix=f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _unflatten(flat: Mapping[str, Any]) -> Dict[str, Any]:
    nested: Dict[str, Any] = {}
    for dotted, value in flat.items():
        *parents, leaf = dotted.split(".")
        node = nested
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = value
    return nested


def load_config_file(path: str | Path) -> Dict[str, Any]:
    """Read a YAML config file into flat dotted keys.

    Raises:
        ConfigError: If the file is unreadable, malformed or holds unknown keys
    """
    path = Path(path)
    try:
        with open(path, "r") as f:
            raw = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError("config", f"cannot read {path}: {e}") from e
    except yaml.YAMLError as e:
        raise ConfigError("config", f"malformed YAML in {path}: {e}") from e

    if raw is None:
        return {}
    if not isinstance(raw, Mapping):
        raise ConfigError("config", f"{path} must contain a mapping of keys to values")

    flat = flatten(raw)
    for key in flat:
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown configuration key")
    return flat


def parse_grid(key: str, value: Any) -> List[float]:
    """Parse a number, a list of numbers or a comma-separated string.

    Raises:
        ConfigError: If an entry is malformed or not positive, or the grid is empty
    """
    if isinstance(value, str):
        items: List[Any] = [v.strip() for v in value.split(",") if v.strip()]
    elif isinstance(value, (list, tuple)):
        items = list(value)
    else:
        items = [value]

    if not items:
        raise ConfigError(key, "grid must not be empty")

    grid = []
    for item in items:
        if isinstance(item, bool):
            raise ConfigError(key, f"malformed number {item!r}")
        try:
            number = float(item)
        except (TypeError, ValueError):
            raise ConfigError(key, f"malformed number {item!r}") from None
        if not number > 0:
            raise ConfigError(key, f"must be positive, got {item!r}")
        grid.append(number)
    return grid


def parse_config(
    path: str | Path | None = None,
    overrides: Optional[Mapping[str, Any]] = None,
    settings: Optional[Settings] = None,
) -> ResolvedConfig:
    """Resolve a scenario and sweep grids.

    Precedence: built-in defaults < config file < overrides (CLI flags).
    The seed and trial count fall back to DMIMO_SEED / DMIMO_TRIALS when
    neither the file nor a flag sets them.

    Args:
        path: Optional YAML config file with dotted keys
        overrides: Dotted keys set on the command line; None values are ignored
        settings: Runtime settings; defaults to get_settings()

    Raises:
        ConfigError: Naming the offending key
    """
    settings = settings or get_settings()
    values: Dict[str, Any] = load_config_file(path) if path is not None else {}

    for key, value in (overrides or {}).items():
        if key not in KNOWN_KEYS:
            raise ConfigError(key, "unknown configuration key")
        if value is not None:
            values[key] = value

    if "seed" not in values and settings.seed is not None:
        values["seed"] = settings.seed
    if "trials" not in values and settings.trials is not None:
        values["trials"] = settings.trials

    distances = parse_grid("d_m", values.pop("d_m")) if "d_m" in values else list(DEFAULT_DISTANCES_M)
    powers = (
        parse_grid("rho_r_mw", values.pop("rho_r_mw"))
        if "rho_r_mw" in values
        else list(DEFAULT_POWERS_MW)
    )

    try:
        scenario = ScenarioConfig.model_validate(
            {**_unflatten(values), "d_m": distances[0], "rho_r_mw": powers[0]}
        )
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigError(key, first["msg"]) from e

    logger.debug(
        f"Resolved config: {len(distances)} distances, {len(powers)} powers, seed={scenario.seed}"
    )
    return ResolvedConfig(scenario=scenario, distances_m=distances, powers_mw=powers)
