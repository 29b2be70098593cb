# src/edge_fabric/control/comm_optimizer.py
"""
Per-uplink communication controller.

Each control interval the controller picks a codec and a batch window for its channel:
the cheapest codec whose estimated encoded rate fits the bandwidth cap and whose encoder
fits the sending site's spare CPU. When nothing fits, it falls back to the densest codec,
batches harder, and lets a backlog build; once the cap recovers it drains at full rate.

All functions here are pure: they take a ControllerState and return a new one.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from edge_fabric import codecs
from edge_fabric.codecs.formats import json_size
from edge_fabric.codecs.types import JSON, Batch, CodecId, EncodedBatch
from edge_fabric.model.topology import CodecCpuTable
from edge_fabric.model.workload import Record

logger = logging.getLogger("edge_fabric.comm_opt")

WINDOW_LADDER = (1, 2, 5, 10, 30, 60)
BASE_PRIORS = {"json": 1.0, "binpack": 0.45, "delta": 0.30}
DEFLATE_PRIOR_FACTOR = 0.6
# Slack on top of the per-interval send budget, in seconds of the observed cap.
BUDGET_BURST_S = 0.25
BYTES_PER_GIB = 2 ** 30

Arrival = Tuple[str, Record]


def prior_ratios() -> Dict[CodecId, float]:
    priors = {}
    for codec in codecs.all_codecs():
        base = BASE_PRIORS.get(codec.base, 1.0)
        priors[codec] = base * DEFLATE_PRIOR_FACTOR if codec.deflate else base
    return priors


@dataclass(frozen=True)
class ControlDecision:
    codec: CodecId
    batch_window_s: int
    send_budget_bits: float
    drain: bool
    estimated_rate_bits: float = 0.0


@dataclass(frozen=True)
class ControllerState:
    channel_id: str
    ratio_estimates: Dict[CodecId, float] = field(default_factory=prior_ratios)
    # Codecs whose estimate is still the untouched prior.
    sentinel: FrozenSet[CodecId] = field(default_factory=lambda: frozenset(codecs.all_codecs()))
    batch_window_s: int = WINDOW_LADDER[0]
    current_codec: CodecId = JSON
    # Arrivals not yet cut into batches, one tuple per tick of arrivals.
    pending: Tuple[Tuple[Arrival, ...], ...] = ()
    # Canonical JSON size of the pending arrivals, one array per arrival group.
    pending_bytes: int = 0
    backlog: Tuple[EncodedBatch, ...] = ()
    backlog_bytes: int = 0
    last_observed_cap: float = 0.0
    ewma_alpha: float = 0.3
    comfortable_intervals: int = 0
    per_gb_cost: float = 0.0
    codec_cpu: CodecCpuTable = field(default_factory=CodecCpuTable)
    interval_s: float = 1.0
    adaptive: bool = True
    drain: bool = False

    @property
    def pending_count(self) -> int:
        return sum(len(chunk) for chunk in self.pending)

    @property
    def buffered_bytes(self) -> int:
        """Encoded backlog plus records still waiting for their batch window to close."""
        return self.backlog_bytes + self.pending_bytes


def new_controller(channel_id: str, per_gb_cost: float = 0.0, codec_cpu: CodecCpuTable = CodecCpuTable(),
                   ewma_alpha: float = 0.3, default_codec: CodecId = JSON, adaptive: bool = True,
                   interval_s: float = 1.0) -> ControllerState:
    if not 0 < ewma_alpha <= 1:
        raise ValueError(f"ewma_alpha must be in (0, 1], got {ewma_alpha}")
    return ControllerState(channel_id=channel_id, current_codec=default_codec, ewma_alpha=ewma_alpha,
                           per_gb_cost=per_gb_cost, codec_cpu=codec_cpu, interval_s=interval_s,
                           adaptive=adaptive)


def dollar_rate(encoded_bits_per_s: float, per_gb_cost: float) -> float:
    """$/h for a sustained encoded rate."""
    return encoded_bits_per_s / 8 * 3600 / BYTES_PER_GIB * per_gb_cost


def _ladder_step(window: int, step: int) -> int:
    idx = WINDOW_LADDER.index(window)
    return WINDOW_LADDER[min(max(idx + step, 0), len(WINDOW_LADDER) - 1)]


def tick(state: ControllerState, observed_cap: float, arrived: Sequence[Arrival],
         edge_cpu_headroom: float, raw_bytes: Optional[int] = None) -> Tuple[ControllerState, ControlDecision]:
    """
    One control interval.

    Args:
        state: controller state after the previous interval
        observed_cap: bandwidth cap in bits/s seen during the interval that just ended
        arrived: (source_id, Record) pairs that reached the channel since the last call
        edge_cpu_headroom: spare cpu-units/s at the sending site
        raw_bytes: canonical JSON size of `arrived` when the caller already knows it

    Returns:
        (new state, decision for the coming interval)
    """
    pending = state.pending + ((tuple(arrived),) if arrived else ())
    records = [r for _, r in arrived]
    if raw_bytes is None:
        raw_bytes = json_size(records) if records else 0
    raw_rate = 8 * raw_bytes / state.interval_s
    msg_rate = len(records) / state.interval_s
    order = {c: i for i, c in enumerate(codecs.all_codecs())}

    window = state.batch_window_s
    congested = False
    if not state.adaptive:
        codec = state.current_codec
    else:
        options = []
        for c, ratio in sorted(state.ratio_estimates.items(), key=lambda kv: order.get(kv[0], len(order))):
            encoded = raw_rate * ratio
            cpu = msg_rate * state.codec_cpu.encoder_cost(c.base, c.deflate)
            options.append((c, ratio, encoded, cpu, cpu <= edge_cpu_headroom + 1e-12))
        fits = [o for o in options if o[4] and o[2] <= observed_cap]
        if fits:
            codec = min(fits, key=lambda o: (dollar_rate(o[2], state.per_gb_cost), o[3], order.get(o[0], 99)))[0]
        else:
            congested = True
            cpu_ok = [o for o in options if o[4]]
            if cpu_ok:
                codec = min(cpu_ok, key=lambda o: (o[1], o[3], order.get(o[0], 99)))[0]
            else:
                codec = min(options, key=lambda o: (o[3], order.get(o[0], 99)))[0]
            window = _ladder_step(window, +1)

    encoded_rate = raw_rate * state.ratio_estimates.get(codec, 1.0)
    drain = state.backlog_bytes > 0 and observed_cap > encoded_rate
    burst = BUDGET_BURST_S * observed_cap
    if drain:
        budget = observed_cap * state.interval_s + burst
    else:
        budget = min(observed_cap, encoded_rate) * state.interval_s + burst

    comfortable = state.comfortable_intervals
    if state.adaptive and not congested and state.backlog_bytes == 0 and observed_cap >= 2 * encoded_rate:
        comfortable += 1
        if comfortable >= 2 and window > WINDOW_LADDER[0]:
            window = _ladder_step(window, -1)
            comfortable = 0
    else:
        comfortable = 0

    if codec != state.current_codec or window != state.batch_window_s:
        logger.debug(f"{state.channel_id}: {state.current_codec.name}/{state.batch_window_s}s -> "
                     f"{codec.name}/{window}s (cap {observed_cap:.0f} b/s, need {encoded_rate:.0f} b/s)")
    new_state = replace(state, pending=pending, pending_bytes=state.pending_bytes + raw_bytes,
                        current_codec=codec, batch_window_s=window,
                        last_observed_cap=observed_cap, comfortable_intervals=comfortable, drain=drain)
    return new_state, ControlDecision(codec, window, max(budget, 0.0), drain, encoded_rate)


def observe_encoding(state: ControllerState, codec: CodecId, raw_bytes: int, encoded_bytes: int) -> ControllerState:
    """Fold one measured ratio into the EWMA for `codec`; the first measurement replaces the prior."""
    if raw_bytes <= 0:
        return state
    observed = encoded_bytes / raw_bytes
    estimates = dict(state.ratio_estimates)
    if codec in state.sentinel:
        estimates[codec] = observed
    else:
        alpha = state.ewma_alpha
        estimates[codec] = (1 - alpha) * estimates[codec] + alpha * observed
    if estimates[codec] <= 0:
        estimates[codec] = 1e-9
    return replace(state, ratio_estimates=estimates, sentinel=state.sentinel - {codec})


def enqueue_and_cut_batches(state: ControllerState, now_s: float) -> Tuple[ControllerState, List[Batch]]:
    """
    Cut pending records into batches at the last multiple of the batch window.

    Records with timestamp below floor(now / w) * w leave pending; they are grouped into one
    batch per (window slot, source), each batch stably sorted by timestamp.
    """
    window_ms = state.batch_window_s * 1000
    boundary_ms = math.floor(round(now_s * 1000) / window_ms) * window_ms
    keep: List[Arrival] = []
    groups: Dict[Tuple[int, str], List[Record]] = {}
    for chunk in state.pending:
        for source_id, record in chunk:
            if record.timestamp_ms < boundary_ms:
                groups.setdefault((record.timestamp_ms // window_ms, source_id), []).append(record)
            else:
                keep.append((source_id, record))
    if not groups:
        return state, []
    batches = [Batch(tuple(sorted(groups[key], key=lambda r: r.timestamp_ms)), key[1]) for key in sorted(groups)]
    pending = (tuple(keep),) if keep else ()
    pending_bytes = json_size([r for _, r in keep]) if keep else 0
    return replace(state, pending=pending, pending_bytes=pending_bytes), batches


def push_backlog(state: ControllerState, batches: Sequence[EncodedBatch]) -> ControllerState:
    if not batches:
        return state
    return replace(state, backlog=state.backlog + tuple(batches),
                   backlog_bytes=state.backlog_bytes + sum(b.size for b in batches))


def pop_backlog(state: ControllerState) -> Tuple[ControllerState, EncodedBatch]:
    head = state.backlog[0]
    return replace(state, backlog=state.backlog[1:], backlog_bytes=state.backlog_bytes - head.size), head


def replace_backlog(state: ControllerState, batches: Sequence[EncodedBatch]) -> ControllerState:
    return replace(state, backlog=tuple(batches), backlog_bytes=sum(b.size for b in batches))
