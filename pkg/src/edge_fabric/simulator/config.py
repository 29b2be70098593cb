# src/edge_fabric/simulator/config.py
from dataclasses import dataclass
from typing import Any, Dict, Optional

from config import settings
from edge_fabric.errors import ConfigError, FieldError
from edge_fabric.model.document import expect_object, get_int, get_number

SIM_KEYS = ("tick_ms", "control_interval_ms", "duration_s", "seed", "metrics_window_s", "drain_s",
            "adaptive_codecs", "ewma_alpha")


@dataclass(frozen=True)
class SimConfig:
    duration_s: float
    seed: int = 0
    tick_ms: int = settings.DEFAULT_TICK_MS
    control_interval_ms: int = settings.DEFAULT_CONTROL_INTERVAL_MS
    metrics_window_s: float = settings.DEFAULT_METRICS_WINDOW_S
    # Extra time after duration_s to flush queues and backlogs; no new records arrive.
    drain_s: float = 0.0
    adaptive_codecs: bool = True
    ewma_alpha: float = settings.DEFAULT_EWMA_ALPHA

    def __post_init__(self):
        if self.tick_ms <= 0:
            raise ConfigError(f"tick_ms must be positive, got {self.tick_ms}")
        if self.control_interval_ms <= 0 or self.control_interval_ms % self.tick_ms:
            raise ConfigError(f"control_interval_ms ({self.control_interval_ms}) must be a positive "
                              f"multiple of tick_ms ({self.tick_ms})")
        if self.duration_s <= 0:
            raise ConfigError(f"duration_s must be positive, got {self.duration_s}")
        if self.metrics_window_s <= 0:
            raise ConfigError(f"metrics_window_s must be positive, got {self.metrics_window_s}")
        if self.drain_s < 0:
            raise ConfigError(f"drain_s must be >= 0, got {self.drain_s}")
        if not 0 < self.ewma_alpha <= 1:
            raise ConfigError(f"ewma_alpha must be in (0, 1], got {self.ewma_alpha}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def tick_s(self) -> float:
        return self.tick_ms / 1000

    @property
    def ticks_per_interval(self) -> int:
        return self.control_interval_ms // self.tick_ms

    @property
    def total_ticks(self) -> int:
        return -(-round(self.duration_s * 1000) // self.tick_ms)


def parse_sim_config(raw: Dict[str, Any], path: str = "sim", seed: Optional[int] = None) -> SimConfig:
    """Build a SimConfig from its scenario-file object; `seed` overrides the file's seed."""
    expect_object(raw, path, ("duration_s",), SIM_KEYS)
    kwargs: Dict[str, Any] = {"duration_s": get_number(raw, "duration_s", path)}
    for key in ("tick_ms", "control_interval_ms", "seed"):
        if key in raw:
            kwargs[key] = get_int(raw, key, path)
    for key in ("metrics_window_s", "drain_s", "ewma_alpha"):
        if key in raw:
            kwargs[key] = get_number(raw, key, path)
    if "adaptive_codecs" in raw:
        if not isinstance(raw["adaptive_codecs"], bool):
            raise FieldError(f"{path}.adaptive_codecs", "expected true or false")
        kwargs["adaptive_codecs"] = raw["adaptive_codecs"]
    if seed is not None:
        kwargs["seed"] = seed
    return SimConfig(**kwargs)
