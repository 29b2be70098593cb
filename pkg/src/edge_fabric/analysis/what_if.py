# src/edge_fabric/analysis/what_if.py
"""
What-if predictions for component moves.

predict_move prices the hypothetical plan from modeled rates; refine_with_shadow runs a
shadow replica on the target site in the simulator and replaces the modeled CPU footprint
with what the replica actually consumed.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional

from edge_fabric.analysis.cost_model import cost_rate
from edge_fabric.analysis.rates import RateVector, site_cpu_demand, steady_rates
from edge_fabric.errors import CapacityError, PreconditionError
from edge_fabric.fabric.compiler import add_shadow, apply_move, static_memory
from edge_fabric.fabric.plan import PhysicalPlan
from edge_fabric.simulator.metrics import MetricsSeries

logger = logging.getLogger("edge_fabric.analysis")

MODELED = "modeled"
SHADOW_REFINED = "shadow_refined"

Runner = Callable[[PhysicalPlan, float], MetricsSeries]


@dataclass(frozen=True)
class Prediction:
    component: str
    target: str
    predicted_total: int
    # Micro-dollars per hour; negative is a saving.
    delta: int
    feasible: bool
    cpu_units: float
    mem_mb: float
    confidence: str = MODELED
    cpu_fraction: float = 0.0
    mem_fraction: float = 0.0

    @property
    def saving(self) -> int:
        return -self.delta


def _overloaded(hypothetical: PhysicalPlan, rates: RateVector, overrides: Optional[Mapping[str, float]],
                target: str) -> bool:
    """True when the target or any edge site exceeds its CPU or memory after the change."""
    demand = site_cpu_demand(hypothetical, rates, overrides)
    memory = static_memory(hypothetical.spec, hypothetical.placement, hypothetical.shadows)
    topology = hypothetical.topology
    checked = {s.id for s in topology.edge_sites()} | {target}
    for site_id in sorted(checked):
        site = topology.site(site_id)
        if demand.get(site_id, 0.0) > site.cpu_units + 1e-9 or memory.get(site_id, 0.0) > site.mem_mb + 1e-9:
            return True
    return False


def _assess(plan: PhysicalPlan, hypothetical: PhysicalPlan, component: str, target: str, rates: RateVector,
            cpu_units: Optional[float] = None, confidence: str = MODELED) -> Prediction:
    overrides = {component: cpu_units} if cpu_units is not None else None
    before = cost_rate(plan, rates).total
    after = cost_rate(hypothetical, rates, overrides).total
    site = plan.topology.site(target)
    decl = plan.spec.component(component)
    if cpu_units is None:
        cpu_units = rates.msgs_in[component] * decl.cpu_units_per_msg / site.speed_factor

    feasible = not _overloaded(hypothetical, rates, overrides, target)
    cpu_fraction = cpu_units / site.cpu_units if site.cpu_units > 0 else float("inf")
    if site.mem_mb > 0:
        mem_fraction = decl.mem_mb / site.mem_mb
    else:
        mem_fraction = float("inf") if decl.mem_mb > 0 else 0.0
    return Prediction(component, target, after, after - before, feasible, cpu_units, decl.mem_mb, confidence,
                      cpu_fraction, mem_fraction)


def predict_move(plan: PhysicalPlan, component: str, target: str,
                 rates: Optional[RateVector] = None) -> Prediction:
    """
    Price the plan with `component` moved to `target`, leaving `plan` untouched.

    Feasible iff, after the move, the target and every edge site fit their CPU (codec
    components included) and static memory.

    Raises:
        PlacementError: the move is not legal
    """
    rates = rates or steady_rates(plan.spec)
    hypothetical = apply_move(plan, component, target, check_capacity=False)
    if hypothetical is plan:
        total = cost_rate(plan, rates).total
        current = _assess(plan, plan, component, target, rates)
        return replace(current, predicted_total=total, delta=0, feasible=True)
    return _assess(plan, hypothetical, component, target, rates)


def refine_with_shadow(prediction: Prediction, plan: PhysicalPlan, runner: Runner,
                       shadow_duration_s: float = 60.0, rates: Optional[RateVector] = None) -> Prediction:
    """
    Re-derive a prediction's CPU footprint from a shadow replica run in the simulator.

    Args:
        prediction: a feasible modeled prediction
        plan: the plan the prediction was made against
        runner: simulates a plan for a number of seconds (see simulator.engine.simulation_runner)
        shadow_duration_s: simulated seconds to observe the shadow for
        rates: steady-state rates; derived from the spec when omitted

    Raises:
        ShadowExists: the component already has a shadow
        CapacityError: the shadow cannot keep up with its input on the target site
    """
    if not prediction.feasible:
        raise PreconditionError(f"cannot shadow infeasible move {prediction.component} -> {prediction.target}")
    rates = rates or steady_rates(plan.spec)
    component, target = prediction.component, prediction.target
    shadowed = add_shadow(plan, component, target)
    series = runner(shadowed, shadow_duration_s)
    shadow_id = shadowed.shadow_of(component).id
    observed = series.totals.components[shadow_id]

    # A shadow more than a second of input behind on its site cannot carry the component.
    in_rate = observed.msgs_in / shadow_duration_s if shadow_duration_s > 0 else 0.0
    if observed.queue_len > max(in_rate, 1.0):
        raise CapacityError(f"shadow of {component} on {target} fell {observed.queue_len} messages behind")

    if observed.msgs_processed == 0:
        cpu_units = prediction.cpu_units
    else:
        per_msg = observed.cpu_seconds / observed.msgs_processed
        cpu_units = rates.msgs_in[component] * per_msg

    hypothetical = apply_move(plan, component, target, check_capacity=False)
    refined = _assess(plan, hypothetical, component, target, rates, cpu_units, SHADOW_REFINED)
    logger.info(f"Shadow of {component} on {target}: {prediction.cpu_units:.4f} -> {cpu_units:.4f} cpu-units, "
                f"delta {prediction.delta} -> {refined.delta} micro-usd/h")
    return refined
