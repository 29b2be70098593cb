# src/edge_fabric/analysis/cost_model.py
"""
Dollar cost of running a physical plan, per entity and per pricing dimension.

Usage comes either from a simulated MetricsWindow (observed) or from a RateVector
(modeled). Each line is rounded half-even to integer micro-dollars per hour from exact
decimal arithmetic, so totals are exact sums of their parts.
"""
import logging
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple, Union

import pandas as pd

from edge_fabric.analysis.rates import RateVector, modeled_cpu
from edge_fabric.control.comm_optimizer import prior_ratios
from edge_fabric.errors import MissingMetric
from edge_fabric.fabric.plan import PhysicalPlan
from edge_fabric.simulator.metrics import MetricsWindow

logger = logging.getLogger("edge_fabric.analysis")

COMPUTE = "compute"
INVOCATIONS = "invocations"
INGRESS = "ingress"
STORAGE_WRITE = "storage_write"
PROVISIONED = "provisioned"
TRANSFER = "transfer"
DIMENSIONS = (COMPUTE, INVOCATIONS, INGRESS, STORAGE_WRITE, PROVISIONED, TRANSFER)

COST_COLUMNS = ["entity", "dimension", "usd_per_hour_micro"]
TOTAL_ENTITY = "#TOTAL"

_HOUR = Decimal(3600)
_MICRO = Decimal(10) ** 6
_GIB = Decimal(2) ** 30


def _d(value) -> Decimal:
    return Decimal(repr(float(value)))


def to_micro(usd_per_hour: Decimal) -> int:
    return int((usd_per_hour * _MICRO).quantize(Decimal(1), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class CostLine:
    entity: str
    dimension: str
    micro_usd_h: int


@dataclass(frozen=True)
class CostBreakdown:
    lines: Tuple[CostLine, ...] = ()

    @property
    def total(self) -> int:
        """Micro-dollars per hour."""
        return sum(line.micro_usd_h for line in self.lines)

    @property
    def total_usd(self) -> float:
        return self.total / 1e6

    def by_entity(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for line in self.lines:
            out[line.entity] = out.get(line.entity, 0) + line.micro_usd_h
        return out

    def entity_total(self, entity: str) -> int:
        return sum(line.micro_usd_h for line in self.lines if line.entity == entity)

    def dimension_total(self, dimension: str) -> int:
        return sum(line.micro_usd_h for line in self.lines if line.dimension == dimension)


@dataclass
class Usage:
    """Per-second usage figures the pricing is applied to."""
    cpu_units: Dict[str, float] = field(default_factory=dict)
    msgs_per_s: Dict[str, float] = field(default_factory=dict)
    channel_bytes_per_s: Dict[str, float] = field(default_factory=dict)
    sink_msgs_per_s: Dict[str, float] = field(default_factory=dict)
    sink_bytes_per_s: Dict[str, float] = field(default_factory=dict)


def modeled_ratio(plan: PhysicalPlan) -> float:
    """Encoded-to-raw size assumed for modeled channel bytes under the plan's default codec."""
    return prior_ratios().get(plan.default_codec, 1.0)


def usage_from_rates(plan: PhysicalPlan, rates: RateVector,
                     cpu_overrides: Optional[Mapping[str, float]] = None) -> Usage:
    usage = Usage()
    for entity_id, (_, cpu) in modeled_cpu(plan, rates, cpu_overrides).items():
        usage.cpu_units[entity_id] = cpu
    for c in plan.spec.components:
        usage.msgs_per_s[c.id] = rates.msgs_in[c.id]
    for sh in plan.shadows:
        usage.msgs_per_s[sh.id] = rates.msgs_in[sh.component]
    for cc in plan.injected:
        usage.msgs_per_s[cc.id] = rates.channel_msgs(cc.edge)
    ratio = modeled_ratio(plan)
    for ch in plan.uplinks():
        usage.channel_bytes_per_s[ch.id] = rates.channel_bytes(ch.edge) * ratio
    for k in plan.spec.sinks:
        usage.sink_msgs_per_s[k.id] = rates.msgs_in[k.id]
        usage.sink_bytes_per_s[k.id] = sum(rates.bytes_out[p] for p in plan.spec.predecessors(k.id))
    return usage


def usage_from_window(plan: PhysicalPlan, window: MetricsWindow) -> Usage:
    length = window.length_s
    if length <= 0:
        raise MissingMetric(f"metrics window [{window.start_s:g}, {window.end_s:g}) is empty")
    entity_ids = ([c.id for c in plan.spec.components] + [cc.id for cc in plan.injected]
                  + [sh.id for sh in plan.shadows])
    usage = Usage()
    for entity_id in entity_ids:
        m = window.components.get(entity_id)
        if m is None:
            raise MissingMetric(f"no metrics for component {entity_id}")
        usage.cpu_units[entity_id] = m.cpu_seconds / length
        usage.msgs_per_s[entity_id] = m.msgs_in / length
    for ch in plan.uplinks():
        m = window.channels.get(ch.id)
        if m is None:
            raise MissingMetric(f"no metrics for channel {ch.id}")
        usage.channel_bytes_per_s[ch.id] = m.bytes_sent_encoded / length
    for k in plan.spec.sinks:
        m = window.sinks.get(k.id)
        if m is None:
            raise MissingMetric(f"no metrics for sink {k.id}")
        usage.sink_msgs_per_s[k.id] = m.records / length
        usage.sink_bytes_per_s[k.id] = m.bytes / length
    return usage


def _entity_site(plan: PhysicalPlan, entity_id: str) -> str:
    if entity_id.startswith("shadow:"):
        return plan.shadow_of(entity_id[len("shadow:"):]).site_id
    if entity_id.startswith(("enc:", "dec:")):
        return plan.codec_component(entity_id).site_id
    return plan.site_of(entity_id)


def price(plan: PhysicalPlan, usage: Usage) -> CostBreakdown:
    """Apply site and link pricing to a usage profile."""
    topology = plan.topology
    lines: List[CostLine] = []

    for entity_id in sorted(usage.cpu_units):
        pricing = topology.site(_entity_site(plan, entity_id)).pricing
        compute = _d(usage.cpu_units[entity_id]) * _d(pricing.per_cpu_unit_second) * _HOUR
        calls = _d(usage.msgs_per_s.get(entity_id, 0.0)) * _HOUR / _MICRO * _d(pricing.per_million_invocations)
        lines.append(CostLine(entity_id, COMPUTE, to_micro(compute)))
        lines.append(CostLine(entity_id, INVOCATIONS, to_micro(calls)))

    link_bytes: Dict[str, Decimal] = {}
    link_price: Dict[str, float] = {}
    for ch in plan.uplinks():
        per_s = _d(usage.channel_bytes_per_s.get(ch.id, 0.0))
        dec_site = topology.site(ch.to_site)
        ingress = per_s * _HOUR / _GIB * _d(dec_site.pricing.per_gb_ingress)
        lines.append(CostLine(ch.decoder_id, INGRESS, to_micro(ingress)))
        for hop in topology.route(ch.from_site, ch.to_site):
            link_bytes[hop.link_id] = link_bytes.get(hop.link_id, Decimal(0)) + per_s
            link_price[hop.link_id] = hop.per_gb_cost
    for link_id in sorted(link_bytes):
        transfer = link_bytes[link_id] * _HOUR / _GIB * _d(link_price[link_id])
        lines.append(CostLine(link_id, TRANSFER, to_micro(transfer)))

    for k in plan.spec.sinks:
        pricing = topology.site(plan.site_of(k.id)).pricing
        calls = _d(usage.sink_msgs_per_s.get(k.id, 0.0)) * _HOUR / _MICRO * _d(pricing.per_million_invocations)
        writes = _d(usage.sink_bytes_per_s.get(k.id, 0.0)) * _HOUR / _GIB * _d(pricing.per_gb_storage_write)
        lines.append(CostLine(k.id, INVOCATIONS, to_micro(calls)))
        lines.append(CostLine(k.id, STORAGE_WRITE, to_micro(writes)))

    for site in topology.sites:
        unit = site.pricing.provisioned_unit
        if unit is not None:
            lines.append(CostLine(site.id, PROVISIONED, to_micro(Decimal(unit.units) * _d(unit.per_unit_hour))))

    return CostBreakdown(tuple(sorted(lines, key=lambda ln: (ln.entity, ln.dimension))))


def cost_rate(plan: PhysicalPlan, usage: Union[MetricsWindow, RateVector],
              cpu_overrides: Optional[Mapping[str, float]] = None) -> CostBreakdown:
    """
    $/h of a plan under observed metrics or modeled steady-state rates.

    Args:
        plan: the physical plan being priced
        usage: a MetricsWindow from the simulator, or a RateVector from steady_rates
        cpu_overrides: entity id -> cpu-units/s replacing the model (RateVector only)

    Returns:
        CostBreakdown in micro-dollars per hour

    Raises:
        MissingMetric: the window lacks an entity of the plan
    """
    if isinstance(usage, RateVector):
        return price(plan, usage_from_rates(plan, usage, cpu_overrides))
    return price(plan, usage_from_window(plan, usage))


def cost_frame(breakdown: CostBreakdown) -> pd.DataFrame:
    rows = [(ln.entity, ln.dimension, ln.micro_usd_h) for ln in breakdown.lines]
    rows.append((TOTAL_ENTITY, "total", breakdown.total))
    return pd.DataFrame(rows, columns=COST_COLUMNS)


def write_cost_csv(breakdown: CostBreakdown, path: Union[str, Path]) -> None:
    cost_frame(breakdown).to_csv(path, index=False, lineterminator="\n")


def read_cost_csv(path: Union[str, Path]) -> CostBreakdown:
    frame = pd.read_csv(path, dtype={"entity": str, "dimension": str, "usd_per_hour_micro": "int64"},
                        keep_default_na=False)
    frame = frame[frame["entity"] != TOTAL_ENTITY]
    return CostBreakdown(tuple(CostLine(e, d, int(v)) for e, d, v in frame.itertuples(index=False)))


def render_cost_table(breakdown: CostBreakdown) -> str:
    """Entities by descending cost with their nonzero dimensions, then the total."""
    per_entity = breakdown.by_entity()
    lines = [f"{'entity':<32} {'dimension':<14} {'usd/h':>14}"]
    for entity in sorted(per_entity, key=lambda e: (-per_entity[e], e)):
        for ln in breakdown.lines:
            if ln.entity == entity and ln.micro_usd_h:
                lines.append(f"{entity:<32} {ln.dimension:<14} {ln.micro_usd_h / 1e6:>14.6f}")
    lines.append(f"{'total':<32} {'':<14} {breakdown.total / 1e6:>14.6f}")
    return "\n".join(lines) + "\n"
