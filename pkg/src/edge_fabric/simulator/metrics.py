# src/edge_fabric/simulator/metrics.py
"""Metrics containers and the metrics / figure CSV formats."""
import copy
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Tuple, Union

import pandas as pd

METRICS_COLUMNS = ["window_start_s", "entity_kind", "entity_id", "metric", "value"]
FIGURE3_COLUMNS = ["t_s", "cap_bits_s", "sent_bits_s", "backlog_bytes", "codec", "batch_window_s"]
TOTAL_MARKER = "#TOTAL"


@dataclass
class ComponentMetrics:
    msgs_in: int = 0
    msgs_processed: int = 0
    msgs_out: int = 0
    cpu_seconds: float = 0.0
    mem_mb: float = 0.0
    queue_len: int = 0


@dataclass
class ChannelMetrics:
    bytes_offered_raw: int = 0
    bytes_sent_encoded: int = 0
    records_sent: int = 0
    sent_bits: int = 0
    backlog_bytes: int = 0
    codec: str = "json"
    batch_window_s: int = 1


@dataclass
class SiteMetrics:
    cpu_utilization: float = 0.0
    mem_utilization: float = 0.0


@dataclass
class LinkMetrics:
    sent_bits: int = 0
    cap_bits_s: float = 0.0


@dataclass
class EndpointMetrics:
    """Sources count injected records, sinks count delivered records (bytes at modeled size)."""
    records: int = 0
    bytes: float = 0.0


@dataclass
class MetricsWindow:
    start_s: float
    end_s: float
    sources: Dict[str, EndpointMetrics] = field(default_factory=dict)
    components: Dict[str, ComponentMetrics] = field(default_factory=dict)
    channels: Dict[str, ChannelMetrics] = field(default_factory=dict)
    sites: Dict[str, SiteMetrics] = field(default_factory=dict)
    links: Dict[str, LinkMetrics] = field(default_factory=dict)
    sinks: Dict[str, EndpointMetrics] = field(default_factory=dict)

    @property
    def length_s(self) -> float:
        return self.end_s - self.start_s

    def copy(self) -> "MetricsWindow":
        return copy.deepcopy(self)

    def cpu_units_used(self, component_id: str) -> float:
        length = self.length_s
        return self.components[component_id].cpu_seconds / length if length > 0 else 0.0


@dataclass(frozen=True)
class ChannelSecond:
    """One second of one uplink as seen on its first link."""
    t_s: int
    channel: str
    cap_bits_s: float
    sent_bits_s: int
    backlog_bytes: int
    codec: str
    batch_window_s: int


@dataclass
class MetricsSeries:
    windows: List[MetricsWindow] = field(default_factory=list)
    totals: MetricsWindow = None
    trace: List[ChannelSecond] = field(default_factory=list)

    @property
    def duration_s(self) -> float:
        return self.windows[-1].end_s if self.windows else 0.0


# Counters that add up across windows; everything else is a level.
ADDITIVE = {"msgs_in", "msgs_processed", "msgs_out", "cpu_seconds", "bytes_offered_raw", "bytes_sent_encoded",
            "records_sent", "sent_bits", "records", "bytes"}

_GROUPS = (("source", "sources"), ("component", "components"), ("channel", "channels"),
           ("site", "sites"), ("link", "links"), ("sink", "sinks"))


def _component_kind(entity_id: str) -> str:
    if entity_id.startswith(("enc:", "dec:")):
        return "codec"
    if entity_id.startswith("shadow:"):
        return "shadow"
    return "component"


def window_rows(window: MetricsWindow) -> List[Tuple[str, str, str, object]]:
    rows = []
    for kind, attr in _GROUPS:
        for entity_id, metrics in sorted(getattr(window, attr).items()):
            values = asdict(metrics)
            if kind == "component":
                kind_label = _component_kind(entity_id)
                values["cpu_units_used"] = window.cpu_units_used(entity_id)
                del values["cpu_seconds"]
            else:
                kind_label = kind
            for metric in sorted(values):
                rows.append((kind_label, entity_id, metric, values[metric]))
    return rows


def total_rows(totals: MetricsWindow) -> List[Tuple[str, str, str, object]]:
    rows = []
    for kind, attr in _GROUPS:
        for entity_id, metrics in sorted(getattr(totals, attr).items()):
            kind_label = _component_kind(entity_id) if kind == "component" else kind
            for metric, value in sorted(asdict(metrics).items()):
                if metric in ADDITIVE:
                    rows.append((kind_label, entity_id, metric, value))
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def metrics_frame(series: MetricsSeries) -> pd.DataFrame:
    rows = []
    for window in series.windows:
        start = _fmt(float(window.start_s))
        for kind, entity_id, metric, value in window_rows(window):
            rows.append((start, kind, entity_id, metric, _fmt(value)))
    return pd.DataFrame(rows, columns=METRICS_COLUMNS)


def write_metrics_csv(series: MetricsSeries, path: Union[str, Path]) -> None:
    """Data rows, then the cumulative totals as lines starting with #TOTAL."""
    frame = metrics_frame(series)
    frame.to_csv(path, index=False, lineterminator="\n")
    totals = pd.DataFrame(
        [(TOTAL_MARKER, kind, entity_id, metric, _fmt(value))
         for kind, entity_id, metric, value in total_rows(series.totals)],
        columns=METRICS_COLUMNS,
    )
    totals.to_csv(path, mode="a", index=False, header=False, lineterminator="\n")


def read_metrics_csv(path: Union[str, Path]) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Return (window rows, totals rows) of a metrics CSV."""
    raw = pd.read_csv(path, dtype=str, keep_default_na=False)
    is_total = raw["window_start_s"] == TOTAL_MARKER
    data = raw[~is_total].reset_index(drop=True)
    totals = raw[is_total].drop(columns=["window_start_s"]).reset_index(drop=True)
    return data, totals


def figure3_frame(series: MetricsSeries, channel: str = None) -> pd.DataFrame:
    """Per-second cap, sent bits, backlog and decision for one uplink (the first one by default)."""
    names = sorted({row.channel for row in series.trace})
    if channel is None and names:
        channel = names[0]
    rows = [(row.t_s, row.cap_bits_s, row.sent_bits_s, row.backlog_bytes, row.codec, row.batch_window_s)
            for row in series.trace if row.channel == channel]
    return pd.DataFrame(rows, columns=FIGURE3_COLUMNS)
