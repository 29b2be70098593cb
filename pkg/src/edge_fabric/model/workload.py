# src/edge_fabric/model/workload.py
"""
Synthetic sensor timeseries and trace replay.

Generation uses numpy's PCG64 bit generator. Every (source, sensor) pair gets its own
stream spawned from SeedSequence(seed) with spawn key (source index, sensor index), so a
sensor's values do not depend on how many other sensors are configured.
"""
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import pandas as pd

from edge_fabric.errors import FieldError, FormatError, OrderError
from edge_fabric.model.document import (
    child, expect_object, get_enum, get_int, get_list, get_number, get_str,
)

logger = logging.getLogger("edge_fabric.workload")

SENSOR_KINDS = ("constant", "sine_noise", "random_walk")
TRACE_COLUMNS = ["timestamp_ms", "source_id", "sensor_id", "value"]
MAX_SENSOR_ID_BYTES = 64


class Record(NamedTuple):
    timestamp_ms: int
    sensor_id: str
    value: float


@dataclass(frozen=True)
class SensorModel:
    kind: str
    level: float = 0.0
    amplitude: float = 1.0
    period_s: float = 60.0
    noise_sd: float = 0.0
    step_sd: float = 1.0
    start: float = 0.0


@dataclass(frozen=True)
class SourceWorkload:
    source_id: str
    sensor_count: int
    model: SensorModel
    rate: float
    sensor_prefix: Optional[str] = None

    def sensor_ids(self) -> List[str]:
        prefix = self.sensor_prefix if self.sensor_prefix is not None else self.source_id
        return [f"{prefix}-{i:03d}" for i in range(self.sensor_count)]


@dataclass(frozen=True)
class WorkloadSpec:
    sources: Tuple[SourceWorkload, ...]
    duration_s: float
    seed: int = 0


def exact(value: float) -> Fraction:
    """The decimal a float was written as (0.2 -> 1/5), not its binary expansion."""
    return Fraction(repr(float(value)))


def sample_count(rate: float, duration_s: float) -> int:
    """Samples with timestamp_ms < duration_s * 1000 for one sensor at `rate` msgs/s."""
    return math.ceil(exact(duration_s) * exact(rate))


def _first_index_at(t_ms: int, rate: Fraction) -> int:
    # floor(k * 1000 / rate) >= t  <=>  k >= t * rate / 1000
    return math.ceil(Fraction(t_ms) * rate / 1000)


def timestamps_ms(indices: np.ndarray, rate: Fraction) -> np.ndarray:
    # floor(k * 1000 * den / num) in exact integer arithmetic
    num, den = rate.numerator, rate.denominator
    return (indices.astype(np.int64) * (1000 * den)) // num


def quadrant_sine(ts_ms: np.ndarray, period_s: float) -> np.ndarray:
    """
    sin(2*pi*t/P) evaluated per quarter period so that the quarter points are exact.

    Returns 0, 1, 0, -1 (with no negative zeros) at t = 0, P/4, P/2, 3P/4.
    """
    period_ms = exact(period_s) * 1000
    pn, pd_ = period_ms.numerator, period_ms.denominator
    m = (ts_ms.astype(np.int64) * pd_) % pn
    quadrant = (4 * m) // pn
    r = (4 * m - quadrant * pn) / pn
    half_pi = np.pi / 2
    values = np.select(
        [quadrant == 0, quadrant == 1, quadrant == 2],
        [np.sin(half_pi * r), np.cos(half_pi * r), -np.sin(half_pi * r)],
        default=-np.cos(half_pi * r),
    )
    return values + 0.0


class _SensorStream:
    """Per-sensor generator state carried across chunks."""

    def __init__(self, seed: int, source_index: int, sensor_index: int, model: SensorModel):
        seq = np.random.SeedSequence(entropy=seed, spawn_key=(source_index, sensor_index))
        self.rng = np.random.Generator(np.random.PCG64(seq))
        self.model = model
        self.walk = model.start
        self.started = False

    def values(self, ts: np.ndarray) -> np.ndarray:
        n = len(ts)
        model = self.model
        if model.kind == "constant":
            return np.full(n, model.level, dtype=np.float64)
        if model.kind == "sine_noise":
            base = model.level + model.amplitude * quadrant_sine(ts, model.period_s)
            if model.noise_sd > 0:
                base = base + self.rng.normal(0.0, model.noise_sd, n)
            return base + 0.0
        steps = self.rng.normal(0.0, model.step_sd, n) if model.step_sd > 0 else np.zeros(n)
        if not self.started and n:
            steps[0] = 0.0
            self.started = True
        # Accumulate from the carried value so chunk boundaries do not change the sums.
        out = np.cumsum(np.concatenate([[self.walk], steps]))[1:]
        if n:
            self.walk = float(out[-1])
        return out


def generate(spec: WorkloadSpec, chunk_s: float = 10.0) -> Iterator[Tuple[str, Record]]:
    """
    Lazily produce the workload as (source_id, Record) pairs.

    Records come out ordered by timestamp_ms, then source_id, then sensor_id. A sensor at
    rate r emits at floor(k * 1000 / r) ms for k = 0, 1, ... while that is below the duration.

    Args:
        spec: workload description, seed included
        chunk_s: generation chunk length; only affects memory use

    Yields:
        (source_id, Record) in global order
    """
    streams = []
    order = sorted(range(len(spec.sources)), key=lambda i: spec.sources[i].source_id)
    for rank, i in enumerate(order):
        src = spec.sources[i]
        ids = src.sensor_ids()
        by_name = sorted(range(len(ids)), key=lambda j: ids[j])
        name_rank = {j: r for r, j in enumerate(by_name)}
        rate = exact(src.rate)
        total = sample_count(src.rate, spec.duration_s)
        for j, sensor_id in enumerate(ids):
            streams.append((rank, name_rank[j], src.source_id, sensor_id, rate, total,
                            _SensorStream(spec.seed, i, j, src.model)))

    duration_ms = math.ceil(exact(spec.duration_s) * 1000)
    chunk_ms = max(int(chunk_s * 1000), 1)
    emitted = 0
    for t0 in range(0, duration_ms, chunk_ms):
        t1 = min(t0 + chunk_ms, duration_ms)
        parts_ts, parts_src, parts_sensor, parts_val = [], [], [], []
        for idx, (src_rank, sensor_rank, source_id, sensor_id, rate, total, stream) in enumerate(streams):
            k0 = min(_first_index_at(t0, rate), total)
            k1 = min(_first_index_at(t1, rate), total)
            if k1 <= k0:
                continue
            ts = timestamps_ms(np.arange(k0, k1, dtype=np.int64), rate)
            parts_ts.append(ts)
            parts_val.append(stream.values(ts))
            parts_src.append(np.full(len(ts), src_rank, dtype=np.int64))
            parts_sensor.append(np.full(len(ts), idx, dtype=np.int64))
        if not parts_ts:
            continue
        ts = np.concatenate(parts_ts)
        values = np.concatenate(parts_val)
        src_rank = np.concatenate(parts_src)
        stream_idx = np.concatenate(parts_sensor)
        sensor_rank = np.array([streams[s][1] for s in range(len(streams))], dtype=np.int64)[stream_idx]
        perm = np.lexsort((sensor_rank, src_rank, ts))
        for t, s, v in zip(ts[perm].tolist(), stream_idx[perm].tolist(), values[perm].tolist()):
            entry = streams[s]
            yield entry[2], Record(t, entry[3], v)
        emitted += len(perm)
    logger.debug(f"Generated {emitted} records over {spec.duration_s}s")


def export_trace(stream: Iterable[Tuple[str, Record]], path: Union[str, Path]) -> int:
    """Write (source_id, Record) pairs as a trace CSV. Returns the number of rows written."""
    rows = [(r.timestamp_ms, source_id, r.sensor_id, r.value) for source_id, r in stream]
    frame = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    frame["timestamp_ms"] = frame["timestamp_ms"].astype("int64")
    frame["value"] = frame["value"].astype("float64")
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    logger.info(f"Exported {len(frame)} trace rows to {path}")
    return len(frame)


_TOKENIZE_LINE = re.compile(r"line (\d+)")
_UNSIGNED = re.compile(r"[0-9]+")


def replay(path: Union[str, Path]) -> Iterator[Tuple[str, Record]]:
    """
    Read a trace CSV back as (source_id, Record) pairs in file order.

    Raises:
        FormatError: bad header or row (line numbers count the header as line 1)
        OrderError: timestamps decrease within one source
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.ParserError as e:
        match = _TOKENIZE_LINE.search(str(e))
        raise FormatError(int(match.group(1)) if match else 0, "wrong number of fields")
    except pd.errors.EmptyDataError:
        raise FormatError(1, "missing header")
    if list(frame.columns) != TRACE_COLUMNS:
        raise FormatError(1, f"header must be {','.join(TRACE_COLUMNS)}")

    last: Dict[str, int] = {}
    records = []
    for offset, (ts_text, source_id, sensor_id, value_text) in enumerate(frame.itertuples(index=False, name=None)):
        line = offset + 2
        if not all(isinstance(x, str) for x in (ts_text, source_id, sensor_id, value_text)):
            raise FormatError(line, "missing field")
        if not _UNSIGNED.fullmatch(ts_text):
            raise FormatError(line, f"timestamp_ms {ts_text!r} is not an unsigned integer")
        try:
            value = float(value_text)
        except ValueError:
            raise FormatError(line, f"value {value_text!r} is not a number")
        if not source_id:
            raise FormatError(line, "empty source_id")
        if not sensor_id or len(sensor_id.encode("utf-8")) > MAX_SENSOR_ID_BYTES:
            raise FormatError(line, "sensor_id must be 1-64 UTF-8 bytes")
        ts = int(ts_text)
        if ts >= 2 ** 64:
            raise FormatError(line, "timestamp_ms exceeds 64 bits")
        if ts < last.get(source_id, 0):
            raise OrderError(f"line {line}: timestamp {ts} goes backwards for source {source_id}")
        last[source_id] = ts
        records.append((source_id, Record(ts, sensor_id, value)))
    logger.info(f"Replaying {len(records)} records from {path}")
    return iter(records)


def parse_sensor_model(raw, path: str) -> SensorModel:
    expect_object(raw, path, ("kind",), ("level", "amplitude", "period_s", "noise_sd", "step_sd", "start"))
    kind = get_enum(raw, "kind", path, SENSOR_KINDS)
    params = {}
    for key in ("level", "amplitude", "start"):
        if key in raw:
            params[key] = get_number(raw, key, path)
    for key in ("noise_sd", "step_sd"):
        if key in raw:
            params[key] = get_number(raw, key, path, minimum=0)
    if "period_s" in raw:
        params["period_s"] = get_number(raw, "period_s", path, minimum=0, strict_min=True)
    return SensorModel(kind=kind, **params)


def parse_workload(raw, path: str = "workload") -> WorkloadSpec:
    """Build a WorkloadSpec from its scenario-file object."""
    expect_object(raw, path, ("sources", "duration_s"), ("seed",))
    sources = []
    for i, item in enumerate(get_list(raw, "sources", path)):
        spath = child(child(path, "sources"), i)
        expect_object(item, spath, ("source_id", "sensor_count", "model", "rate"), ("sensor_prefix",))
        src = SourceWorkload(
            source_id=get_str(item, "source_id", spath),
            sensor_count=get_int(item, "sensor_count", spath, minimum=1),
            model=parse_sensor_model(item["model"], child(spath, "model")),
            rate=get_number(item, "rate", spath, minimum=0, strict_min=True),
            sensor_prefix=get_str(item, "sensor_prefix", spath, allow_none=True),
        )
        if any(len(s.encode("utf-8")) > MAX_SENSOR_ID_BYTES for s in src.sensor_ids()):
            raise FieldError(spath, "generated sensor ids exceed 64 UTF-8 bytes")
        sources.append(src)
    seed = get_int(raw, "seed", path, minimum=0) if "seed" in raw else 0
    return WorkloadSpec(tuple(sources), get_number(raw, "duration_s", path, minimum=0), seed)
