# src/edge_fabric/simulator/engine.py
"""
Fixed-tick simulation of a physical plan.

Each tick (tick_ms of simulated time, starting at t0):
  0. on a control boundary, every uplink controller decides codec and batch window from the
     cap seen during the previous tick, and newly cut batches are encoded into the backlog
  1. records with timestamp below t0 + tick are injected at their sources
  2. components run in topological order within their site's CPU budget, then shadows
  3. each link's token bucket is refilled and channel backlogs are transmitted head first
  4. metrics are accumulated; windows and the per-second channel trace are closed as due
"""
import logging
import math
from collections import deque
from dataclasses import replace
from typing import Callable, Deque, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from edge_fabric import codecs
from edge_fabric.codecs.formats import json_size
from edge_fabric.codecs.types import Batch, CodecId, EncodedBatch
from edge_fabric.control import comm_optimizer as comm
from edge_fabric.errors import ConfigError, InternalInvariantViolation
from edge_fabric.fabric.compiler import static_memory
from edge_fabric.fabric.plan import PhysicalPlan
from edge_fabric.model.spec_model import topological_order
from edge_fabric.model.topology import LinkSpec, bandwidth_at, edge_headroom
from edge_fabric.model.workload import Record, WorkloadSpec, exact, generate
from edge_fabric.simulator.config import SimConfig
from edge_fabric.simulator.metrics import (
    ChannelMetrics, ChannelSecond, ComponentMetrics, EndpointMetrics, LinkMetrics, MetricsSeries,
    MetricsWindow, SiteMetrics,
)
from edge_fabric.simulator.token_bucket import DEFERRED, TokenBucket, transmit

logger = logging.getLogger("edge_fabric.simulator")

Arrival = Tuple[str, Record]


class Simulation:
    """
    One deterministic run over a plan.

    The engine owns the active plan, component queues, channel controllers and token
    buckets. Drive it with run(), or tick by tick with step() and inspect with snapshot().
    """

    def __init__(self, plan: PhysicalPlan, workload: Iterable[Arrival], config: SimConfig):
        self.config = config
        self.tick_index = 0
        self._workload: Iterator[Arrival] = iter(workload)
        self._peeked: Optional[Arrival] = None
        self._workload_done = False

        self.queues: Dict[str, Deque[Arrival]] = {}
        self.counters: Dict[str, List[int]] = {}
        self.controllers: Dict[str, comm.ControllerState] = {}
        self.decisions: Dict[str, comm.ControlDecision] = {}
        self.arrivals: Dict[str, List[Arrival]] = {}
        self.buckets: Dict[str, TokenBucket] = {}
        self._interval_sent: Dict[str, float] = {}
        self._interval_cpu: Dict[str, float] = {}
        self._second_sent: Dict[str, int] = {}
        self._trace_second = 0

        self._windows: List[MetricsWindow] = []
        self._trace: List[ChannelSecond] = []
        self._window_ms = max(int(round(config.metrics_window_s * 1000)), 1)
        self._window: Optional[MetricsWindow] = None
        self._window_end_ms = 0

        self.plan: Optional[PhysicalPlan] = None
        self._install(plan)
        self._open_window(0)

    # ------------------------------------------------------------------ plan wiring

    def _install(self, plan: PhysicalPlan) -> None:
        spec = plan.spec
        topology = plan.topology
        self.plan = plan
        self.order = topological_order(spec)
        self.component_decl = {c.id: c for c in spec.components}
        self.selectivity = {c.id: exact(c.selectivity) for c in spec.components}
        self.successors = {node: spec.successors(node) for node in spec.all_ids()}
        self.source_bytes = {s.id: s.bytes_per_msg for s in spec.sources}
        self.channel_of = {ch.edge: ch for ch in plan.channels}
        self.uplinks = sorted(plan.uplinks(), key=lambda ch: ch.id)
        self.shadow_of = {sh.component: sh for sh in plan.shadows}

        self.links: Dict[str, LinkSpec] = {}
        for ch in self.uplinks:
            for ln in topology.route(ch.from_site, ch.to_site):
                self.links[ln.link_id] = ln

        # counters: [inputs consumed, outputs emitted, rounding offset]
        for index, c in enumerate(spec.components):
            self.queues.setdefault(c.id, deque())
            if c.id not in self.counters:
                self.counters[c.id] = [0, 0, self._rounding_offset(c.id, index, shadow=False)]
        for sh in plan.shadows:
            self.queues.setdefault(sh.id, deque())
            if sh.id not in self.counters:
                index = [c.id for c in spec.components].index(sh.component)
                self.counters[sh.id] = [0, 0, self._rounding_offset(sh.component, index, shadow=True)]
        live_shadows = {sh.id for sh in plan.shadows}
        for qid in [q for q in self.queues if q.startswith("shadow:") and q not in live_shadows]:
            del self.queues[qid]
            del self.counters[qid]

        now_s = self.now_ms / 1000
        for ch in self.uplinks:
            cost = sum(self.links[ln].per_gb_cost for ln in ch.links)
            if ch.id not in self.controllers:
                self.controllers[ch.id] = comm.new_controller(
                    ch.id, cost, topology.codec_cpu, self.config.ewma_alpha, plan.default_codec,
                    self.config.adaptive_codecs, self.config.control_interval_ms / 1000)
                self.decisions[ch.id] = comm.ControlDecision(plan.default_codec, comm.WINDOW_LADDER[0],
                                                             math.inf, False)
            else:
                self.controllers[ch.id] = replace(self.controllers[ch.id], per_gb_cost=cost)
            self.arrivals.setdefault(ch.id, [])
            self._interval_sent.setdefault(ch.id, 0.0)
            self._second_sent.setdefault(ch.id, 0)
            first = ch.first_link
            if first not in self.buckets:
                self.buckets[first] = TokenBucket(bandwidth_at(self.links[first], now_s))

    def _rounding_offset(self, component_id: str, index: int, shadow: bool) -> int:
        """
        Seeded dither for a component's selectivity, in units of 1/denominator.

        After n inputs the component has emitted floor((n * numerator + offset) / denominator),
        which stays within one message of n * selectivity and is exact whenever that is whole.
        """
        den = self.selectivity[component_id].denominator
        if den == 1:
            return 0
        seq = np.random.SeedSequence(entropy=self.config.seed, spawn_key=(1, index, int(shadow)))
        rng = np.random.Generator(np.random.PCG64(seq))
        # Denominators of long decimals overflow int64.
        return int.from_bytes(rng.bytes(16), "little") % den

    def swap_plan(self, plan: PhysicalPlan) -> None:
        """Switch to a new plan between ticks, keeping queues, controllers and backlogs by identity."""
        if plan.spec != self.plan.spec:
            raise ConfigError("swap_plan needs a plan over the same spec")
        old = dict(self.controllers)
        self._install(plan)
        live = {ch.id for ch in self.uplinks}
        for channel_id, state in sorted(old.items()):
            if channel_id in live:
                continue
            # The edge became local: hand over everything still buffered.
            ch = next(c for c in self.plan.channels if c.id == channel_id)
            buffered = [a for chunk in state.pending for a in chunk] + self.arrivals.pop(channel_id, [])
            for enc in state.backlog:
                batch = codecs.decode(enc.codec, enc.payload, enc.source_id)
                buffered.extend((batch.source_id, r) for r in batch.records)
            for source_id, record in buffered:
                self._deliver(ch.edge[0], ch.edge[1], source_id, record)
            del self.controllers[channel_id]
            self.decisions.pop(channel_id, None)
        logger.info(f"Swapped plan at t={self.now_ms / 1000:g}s: {len(self.uplinks)} uplink(s)")

    # ------------------------------------------------------------------ clock

    @property
    def now_ms(self) -> int:
        return self.tick_index * self.config.tick_ms

    def _site_of(self, entity_id: str) -> str:
        if entity_id.startswith("shadow:"):
            return self.shadow_of[entity_id[len("shadow:"):]].site_id
        if entity_id.startswith(("enc:", "dec:")):
            return self.plan.codec_component(entity_id).site_id
        return self.plan.site_of(entity_id)

    # ------------------------------------------------------------------ metrics plumbing

    def _open_window(self, start_ms: int) -> None:
        w = MetricsWindow(start_ms / 1000, (start_ms + self._window_ms) / 1000)
        spec = self.plan.spec
        for s in spec.sources:
            w.sources[s.id] = EndpointMetrics()
        for c in spec.components:
            w.components[c.id] = ComponentMetrics(mem_mb=c.mem_mb)
        for cc in self.plan.injected:
            w.components[cc.id] = ComponentMetrics()
        for sh in self.plan.shadows:
            w.components[sh.id] = ComponentMetrics(mem_mb=self.component_decl[sh.component].mem_mb)
        for ch in self.uplinks:
            w.channels[ch.id] = ChannelMetrics()
        for site in self.plan.topology.sites:
            w.sites[site.id] = SiteMetrics()
        for link_id in self.links:
            w.links[link_id] = LinkMetrics()
        for k in spec.sinks:
            w.sinks[k.id] = EndpointMetrics()
        self._window = w
        self._window_end_ms = start_ms + self._window_ms

    def _component(self, entity_id: str) -> ComponentMetrics:
        m = self._window.components.get(entity_id)
        if m is None:
            m = self._window.components[entity_id] = ComponentMetrics()
        return m

    def _channel(self, channel_id: str) -> ChannelMetrics:
        m = self._window.channels.get(channel_id)
        if m is None:
            m = self._window.channels[channel_id] = ChannelMetrics()
        return m

    def _link(self, link_id: str) -> LinkMetrics:
        m = self._window.links.get(link_id)
        if m is None:
            m = self._window.links[link_id] = LinkMetrics()
        return m

    def _fill_levels(self, window: MetricsWindow, end_ms: int) -> None:
        """Point-in-time values: queue lengths, backlogs, decisions, utilizations."""
        window.end_s = end_ms / 1000
        for qid, queue in self.queues.items():
            if qid in window.components:
                window.components[qid].queue_len = len(queue)
        for ch in self.uplinks:
            m = window.channels.setdefault(ch.id, ChannelMetrics())
            state = self.controllers[ch.id]
            m.backlog_bytes = state.buffered_bytes
            m.codec = self.decisions[ch.id].codec.name
            m.batch_window_s = self.decisions[ch.id].batch_window_s
        last_tick_s = max(end_ms - self.config.tick_ms, 0) / 1000
        for link_id, ln in self.links.items():
            window.links.setdefault(link_id, LinkMetrics()).cap_bits_s = bandwidth_at(ln, last_tick_s)

        length = window.length_s
        cpu_by_site: Dict[str, float] = {}
        for entity_id, m in window.components.items():
            try:
                site_id = self._site_of(entity_id)
            except (KeyError, StopIteration):
                continue
            cpu_by_site[site_id] = cpu_by_site.get(site_id, 0.0) + m.cpu_seconds
        memory = static_memory(self.plan.spec, self.plan.placement, self.plan.shadows)
        for site in self.plan.topology.sites:
            cpu_util = cpu_by_site.get(site.id, 0.0) / (site.cpu_units * length) if length > 0 else 0.0
            used_mem = memory.get(site.id, 0.0)
            if site.mem_mb > 0:
                mem_util = used_mem / site.mem_mb
            else:
                mem_util = 1.0 if used_mem > 0 else 0.0
            window.sites[site.id] = SiteMetrics(min(max(cpu_util, 0.0), 1.0), min(max(mem_util, 0.0), 1.0))

    def _close_window(self, end_ms: int) -> None:
        self._fill_levels(self._window, end_ms)
        self._windows.append(self._window)

    def snapshot(self) -> MetricsWindow:
        """Copy of the window in progress, levels filled as of now. Does not touch engine state."""
        window = self._window.copy()
        self._fill_levels(window, max(self.now_ms, int(round(window.start_s * 1000))))
        return window

    # ------------------------------------------------------------------ record flow

    def _out_bytes(self, node: str) -> float:
        if node in self.source_bytes:
            return float(self.source_bytes[node])
        return self.component_decl[node].out_bytes_per_msg

    def _deliver(self, u: str, v: str, source_id: str, record: Record) -> None:
        if v in self.component_decl:
            self.queues[v].append((source_id, record))
            self._component(v).msgs_in += 1
            shadow = self.shadow_of.get(v)
            if shadow is not None:
                self.queues[shadow.id].append((source_id, record))
                self._component(shadow.id).msgs_in += 1
        else:
            m = self._window.sinks.setdefault(v, EndpointMetrics())
            m.records += 1
            m.bytes += self._out_bytes(u)

    def _route(self, node: str, source_id: str, record: Record) -> None:
        for v in self.successors[node]:
            ch = self.channel_of[(node, v)]
            if ch.is_uplink:
                self.arrivals[ch.id].append((source_id, record))
            else:
                self._deliver(node, v, source_id, record)

    def _next_record(self) -> Optional[Arrival]:
        if self._peeked is None and not self._workload_done:
            try:
                self._peeked = next(self._workload)
            except StopIteration:
                self._workload_done = True
        return self._peeked

    def _inject(self, until_ms: int) -> None:
        while True:
            item = self._next_record()
            if item is None or item[1].timestamp_ms >= until_ms:
                return
            self._peeked = None
            source_id, record = item
            if source_id not in self.source_bytes:
                raise ConfigError(f"workload source {source_id} is not declared in spec {self.plan.spec.name}")
            m = self._window.sources[source_id]
            m.records += 1
            m.bytes += self.source_bytes[source_id]
            self._route(source_id, source_id, record)

    def _run_queue(self, queue_id: str, component_id: str, site_id: str, budget: Dict[str, float],
                   discard: bool) -> None:
        queue = self.queues[queue_id]
        if not queue:
            return
        decl = self.component_decl[component_id]
        site = self.plan.topology.site(site_id)
        demand = decl.cpu_units_per_msg / site.realized_speed
        if demand > 0:
            n = min(len(queue), int(budget[site_id] / demand + 1e-9))
        else:
            n = len(queue)
        if n <= 0:
            return
        used = n * demand
        budget[site_id] = max(budget[site_id] - used, 0.0)
        self._interval_cpu[site_id] = self._interval_cpu.get(site_id, 0.0) + (0.0 if discard else used)
        m = self._component(queue_id)
        m.msgs_processed += n
        m.cpu_seconds += used
        counters = self.counters[queue_id]
        sel = self.selectivity[component_id]
        num, den = sel.numerator, sel.denominator
        for _ in range(n):
            source_id, record = queue.popleft()
            counters[0] += 1
            emit = (counters[0] * num + counters[2]) // den - counters[1]
            if emit <= 0:
                continue
            counters[1] += emit
            m.msgs_out += emit
            if not discard:
                for _ in range(emit):
                    self._route(component_id, source_id, record)

    def _process(self) -> None:
        tick_s = self.config.tick_s
        budget = {site.id: site.cpu_units * tick_s for site in self.plan.topology.sites}
        for node in self.order:
            if node in self.component_decl:
                self._run_queue(node, node, self.plan.site_of(node), budget, discard=False)
        for sh in self.plan.shadows:
            self._run_queue(sh.id, sh.component, sh.site_id, budget, discard=True)

    # ------------------------------------------------------------------ uplinks

    def _split(self, codec: CodecId, batch: Batch, limit_bits: float,
               raw_bytes: Optional[int] = None) -> List[Tuple[Batch, EncodedBatch]]:
        """Encode a batch, splitting it by record count until every chunk fits limit_bits."""
        whole = codecs.encode(codec, batch, raw_bytes)
        if whole.bits <= limit_bits or len(batch) == 1:
            return [(batch, whole)]
        pieces = math.ceil(whole.bits / limit_bits)
        while True:
            pieces = min(pieces, len(batch))
            bounds = np.linspace(0, len(batch), pieces + 1).round().astype(int)
            parts = [Batch(batch.records[a:b], batch.source_id) for a, b in zip(bounds, bounds[1:]) if b > a]
            encoded = [(p, codecs.encode(codec, p)) for p in parts]
            largest = max(e.bits for _, e in encoded)
            if largest <= limit_bits or pieces == len(batch):
                return encoded
            pieces = max(pieces + 1, math.ceil(pieces * largest / limit_bits))

    def _rechunk(self, state: comm.ControllerState, limit_bits: float) -> comm.ControllerState:
        if all(b.bits <= limit_bits or b.record_count == 1 for b in state.backlog):
            return state
        rebuilt: List[EncodedBatch] = []
        for enc in state.backlog:
            if enc.bits <= limit_bits or enc.record_count == 1:
                rebuilt.append(enc)
                continue
            batch = codecs.decode(enc.codec, enc.payload, enc.source_id)
            rebuilt.extend(e for _, e in self._split(enc.codec, batch, limit_bits))
        return comm.replace_backlog(state, rebuilt)

    def _headroom(self, site_id: str) -> float:
        site = self.plan.topology.site(site_id)
        interval_s = self.config.control_interval_ms / 1000
        used_cpu = self._interval_cpu.get(site_id, 0.0) / interval_s
        used_mem = static_memory(self.plan.spec, self.plan.placement).get(site_id, 0.0)
        return edge_headroom(site, used_cpu, used_mem)[0]

    def _control(self, now_ms: int) -> None:
        now_s = now_ms / 1000
        seen_s = (now_ms - self.config.tick_ms) / 1000
        cpu_table = self.plan.topology.codec_cpu
        for ch in self.uplinks:
            cap = bandwidth_at(self.links[ch.first_link], seen_s)
            arrived = self.arrivals[ch.id]
            self.arrivals[ch.id] = []
            raw = json_size([r for _, r in arrived]) if arrived else 0
            self._channel(ch.id).bytes_offered_raw += raw

            state, decision = comm.tick(self.controllers[ch.id], cap, arrived, self._headroom(ch.from_site), raw)
            state, batches = comm.enqueue_and_cut_batches(state, now_s)
            limit = cap * 1.0
            fresh: List[EncodedBatch] = []
            for i, batch in enumerate(batches):
                chunks = self._split(decision.codec, batch, limit)
                if i == 0 and self.config.adaptive_codecs:
                    for trial in codecs.encode_all(chunks[0][0], chunks[0][1].raw_bytes):
                        state = comm.observe_encoding(state, trial.codec, trial.raw_bytes, trial.size)
                fresh.extend(e for _, e in chunks)
            if fresh:
                encoded = sum(e.record_count for e in fresh)
                enc = self._component(ch.encoder_id)
                enc.msgs_in += encoded
                enc.msgs_processed += encoded
                enc.msgs_out += encoded
                enc.cpu_seconds += encoded * cpu_table.encoder_cost(decision.codec.base, decision.codec.deflate)
            state = comm.push_backlog(state, fresh)
            state = self._rechunk(state, limit)
            self.controllers[ch.id] = state
            self.decisions[ch.id] = decision
            self._interval_sent[ch.id] = 0.0
        self._interval_cpu = {}

    def _receive(self, ch, enc: EncodedBatch) -> None:
        batch = codecs.decode(enc.codec, enc.payload, enc.source_id)
        if len(batch) != enc.record_count:
            raise InternalInvariantViolation(f"{ch.id}: decoded {len(batch)} of {enc.record_count} records")
        cost = self.plan.topology.codec_cpu.decoder_cost(enc.codec.base, enc.codec.deflate)
        dec = self._component(ch.decoder_id)
        dec.msgs_in += enc.record_count
        dec.msgs_processed += enc.record_count
        dec.msgs_out += enc.record_count
        dec.cpu_seconds += enc.record_count * cost
        u, v = ch.edge
        for record in batch.records:
            self._deliver(u, v, batch.source_id, record)

    def _transmit(self, now_ms: int) -> None:
        now_s = now_ms / 1000
        for link_id in sorted({ch.first_link for ch in self.uplinks}):
            bucket = self.buckets[link_id]
            cap = bandwidth_at(self.links[link_id], now_s)
            if cap < bucket.cap_bits_per_s:
                bucket.set_cap(cap)
                for ch in self.uplinks:
                    if ch.first_link == link_id:
                        self.controllers[ch.id] = self._rechunk(self.controllers[ch.id], cap * 1.0)
            else:
                bucket.set_cap(cap)
            bucket.refill(self.config.tick_s)
            for ch in self.uplinks:
                if ch.first_link != link_id:
                    continue
                state = self.controllers[ch.id]
                budget = self.decisions[ch.id].send_budget_bits
                while state.backlog and self._interval_sent[ch.id] < budget:
                    if transmit(bucket, state.backlog[0].bits, head_of_line=True) == DEFERRED:
                        break
                    state, head = comm.pop_backlog(state)
                    self._interval_sent[ch.id] += head.bits
                    self._second_sent[ch.id] += head.bits
                    m = self._channel(ch.id)
                    m.bytes_sent_encoded += head.size
                    m.sent_bits += head.bits
                    m.records_sent += head.record_count
                    for hop in ch.links:
                        self._link(hop).sent_bits += head.bits
                    self.controllers[ch.id] = state
                    self._receive(ch, head)
                self.controllers[ch.id] = state

    def _close_seconds(self, end_ms: int) -> None:
        while (self._trace_second + 1) * 1000 <= end_ms:
            t_s = self._trace_second
            for ch in self.uplinks:
                state = self.controllers[ch.id]
                decision = self.decisions[ch.id]
                self._trace.append(ChannelSecond(
                    t_s, ch.id, bandwidth_at(self.links[ch.first_link], t_s), self._second_sent[ch.id],
                    state.buffered_bytes, decision.codec.name, decision.batch_window_s,
                ))
                self._second_sent[ch.id] = 0
            self._trace_second += 1

    # ------------------------------------------------------------------ driver

    @property
    def total_ticks(self) -> int:
        return self.config.total_ticks

    def idle(self) -> bool:
        if self._next_record() is not None:
            return False
        if any(self.queues.values()) or any(self.arrivals.values()):
            return False
        return all(not s.backlog and not s.pending for s in self.controllers.values())

    def step(self) -> None:
        """Advance one tick."""
        k = self.tick_index
        t0 = self.now_ms
        t1 = t0 + self.config.tick_ms
        if k > 0 and k % self.config.ticks_per_interval == 0:
            self._control(t0)
        if k < self.total_ticks:
            self._inject(t1)
        self._process()
        self._transmit(t0)
        self.tick_index += 1
        self._close_seconds(t1)
        while t1 >= self._window_end_ms:
            self._close_window(self._window_end_ms)
            self._open_window(self._window_end_ms)

    def run(self) -> MetricsSeries:
        """Run to duration_s, then drain for up to drain_s, and return the metrics."""
        for _ in range(self.total_ticks - self.tick_index):
            self.step()
        drain_ticks = int(round(self.config.drain_s * 1000)) // self.config.tick_ms
        extra = 0
        while extra < drain_ticks and not self.idle():
            self.step()
            extra += 1
        end_ms = self.now_ms
        if self._window.start_s * 1000 < end_ms:
            self._close_window(end_ms)
        if not self.idle():
            logger.warning(f"Run ended at {end_ms / 1000:g}s with undelivered records")
        series = MetricsSeries(self._windows, totals(self._windows), self._trace)
        logger.info(f"Simulated {self.plan.spec.name} for {end_ms / 1000:g}s "
                    f"({len(self._windows)} windows, {extra} drain ticks)")
        return series


def totals(windows: List[MetricsWindow]) -> MetricsWindow:
    """Sum counters across windows; levels come from the last window."""
    if not windows:
        return MetricsWindow(0.0, 0.0)
    total = windows[-1].copy()
    total.start_s = windows[0].start_s
    for group in ("sources", "components", "channels", "links", "sinks"):
        merged = getattr(total, group)
        for entity_id, metrics in merged.items():
            for field_name in ("msgs_in", "msgs_processed", "msgs_out", "cpu_seconds", "bytes_offered_raw",
                               "bytes_sent_encoded", "records_sent", "sent_bits", "records", "bytes"):
                if hasattr(metrics, field_name):
                    setattr(metrics, field_name, sum(
                        getattr(getattr(w, group)[entity_id], field_name)
                        for w in windows if entity_id in getattr(w, group)))
    return total


def run(plan: PhysicalPlan, workload: Iterable[Arrival], config: SimConfig) -> MetricsSeries:
    return Simulation(plan, workload, config).run()


def simulation_runner(workload: WorkloadSpec, config: SimConfig) -> Callable[[PhysicalPlan, float], MetricsSeries]:
    """A callable that simulates any plan for a given number of seconds over this workload."""
    def _run(plan: PhysicalPlan, duration_s: float) -> MetricsSeries:
        spec = WorkloadSpec(workload.sources, duration_s, workload.seed)
        sim_config = SimConfig(duration_s=duration_s, seed=config.seed, tick_ms=config.tick_ms,
                               control_interval_ms=config.control_interval_ms,
                               metrics_window_s=config.metrics_window_s, drain_s=0.0,
                               adaptive_codecs=config.adaptive_codecs, ewma_alpha=config.ewma_alpha)
        return Simulation(plan, generate(spec), sim_config).run()
    return _run
