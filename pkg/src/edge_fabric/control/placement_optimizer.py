# src/edge_fabric/control/placement_optimizer.py
"""
Greedy placement loop.

Everything movable starts in the cloud. Each iteration ranks components by their current
cost, predicts every move to a candidate site, and applies the feasible move with the most
dollars saved per fraction of the target's CPU consumed; memory only gates feasibility.
The loop stops when no move saves at least min_saving or max_iterations moves have been made.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Set, Tuple, Union

import pandas as pd

from edge_fabric.analysis.cost_model import cost_rate
from edge_fabric.analysis.rates import RateVector, edge_cpu_utilization, steady_rates
from edge_fabric.analysis.what_if import Prediction, Runner, predict_move, refine_with_shadow
from edge_fabric.errors import CapacityError, ConfigError, FieldError
from edge_fabric.fabric.compiler import apply_move, compile, placement_from_components
from edge_fabric.fabric.plan import PhysicalPlan, Placement
from edge_fabric.model.document import expect_object, get_int, get_list, get_number
from edge_fabric.model.spec_model import LogicalSpec
from edge_fabric.model.topology import Topology

logger = logging.getLogger("edge_fabric.placement_opt")

EPSILON = 1e-9
MOVES_COLUMNS = ["iteration", "component", "from", "to", "delta_usd_h_micro", "total_usd_h_micro", "edge_cpu_util"]
FIGURE2_COLUMNS = ["iteration", "total_usd_h_micro", "edge_cpu_util"]
OPTIMIZER_KEYS = ("max_iterations", "min_saving_usd_per_hour", "candidate_sites", "use_shadowing",
                  "shadow_duration_s")


@dataclass(frozen=True)
class OptimizerConfig:
    max_iterations: int = 100
    min_saving_usd_per_hour: float = 1e-6
    # None means every edge site.
    candidate_sites: Optional[Tuple[str, ...]] = None
    use_shadowing: bool = False
    shadow_duration_s: float = 60.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}")
        if self.min_saving_usd_per_hour < 0:
            raise ConfigError(f"min_saving_usd_per_hour must be >= 0, got {self.min_saving_usd_per_hour}")
        if self.shadow_duration_s <= 0:
            raise ConfigError(f"shadow_duration_s must be positive, got {self.shadow_duration_s}")

    @property
    def min_saving_micro(self) -> int:
        return max(int(round(self.min_saving_usd_per_hour * 1e6)), 0)


def parse_optimizer_config(raw: Dict[str, Any], path: str = "optimizer") -> OptimizerConfig:
    expect_object(raw, path, (), OPTIMIZER_KEYS)
    kwargs: Dict[str, Any] = {}
    if "max_iterations" in raw:
        kwargs["max_iterations"] = get_int(raw, "max_iterations", path)
    for key in ("min_saving_usd_per_hour", "shadow_duration_s"):
        if key in raw:
            kwargs[key] = get_number(raw, key, path)
    if raw.get("candidate_sites") is not None:
        sites = get_list(raw, "candidate_sites", path)
        if not all(isinstance(s, str) for s in sites):
            raise FieldError(f"{path}.candidate_sites", "expected an array of site ids")
        kwargs["candidate_sites"] = tuple(sites)
    if "use_shadowing" in raw:
        if not isinstance(raw["use_shadowing"], bool):
            raise FieldError(f"{path}.use_shadowing", "expected true or false")
        kwargs["use_shadowing"] = raw["use_shadowing"]
    return OptimizerConfig(**kwargs)


@dataclass(frozen=True)
class MoveRecord:
    iteration: int
    component: str
    from_site: str
    to_site: str
    predicted_delta: int
    total_after: int
    edge_cpu_util: float
    site_cpu_util: Tuple[Tuple[str, float], ...] = ()
    confidence: str = "modeled"


def initial_placement(spec: LogicalSpec, topology: Topology) -> Placement:
    """Every unpinned component in the cloud; sources at their sites, sinks in the cloud."""
    cloud = topology.cloud.id
    return placement_from_components(
        spec, topology, {c.id: c.pinned_site or cloud for c in spec.components})


def _candidate_sites(plan: PhysicalPlan, config: OptimizerConfig) -> List[str]:
    if config.candidate_sites is not None:
        return sorted(s for s in config.candidate_sites if plan.topology.has_site(s))
    return [s.id for s in plan.topology.edge_sites()]


def efficiency(prediction: Prediction) -> float:
    """Saving per fraction of the target's CPU the moved component consumes."""
    return prediction.saving / max(prediction.cpu_fraction, EPSILON)


def select_move(plan: PhysicalPlan, config: OptimizerConfig = OptimizerConfig(),
                rates: Optional[RateVector] = None,
                exclude: Optional[Set[Tuple[str, str]]] = None) -> Optional[Tuple[str, str, Prediction]]:
    """
    The most cost-efficient qualifying move, or None.

    Components are visited most expensive first. A move qualifies when it is feasible and
    saves at least min_saving; among qualifying moves the highest efficiency wins, ties going
    to the larger saving, then the smaller component id, then the smaller site id.
    """
    rates = rates or steady_rates(plan.spec)
    current = cost_rate(plan, rates).by_entity()
    movable = [c.id for c in plan.spec.components if c.pinned_site is None]
    movable.sort(key=lambda c: (-current.get(c, 0), c))
    sites = _candidate_sites(plan, config)
    excluded = exclude or set()

    best = None
    best_key = None
    for component in movable:
        for site in sites:
            if site == plan.site_of(component) or (component, site) in excluded:
                continue
            prediction = predict_move(plan, component, site, rates)
            if not prediction.feasible or prediction.saving < max(config.min_saving_micro, 1):
                continue
            key = (-efficiency(prediction), prediction.delta, component, site)
            if best_key is None or key < best_key:
                best, best_key = (component, site, prediction), key
    if best is not None:
        logger.debug(f"Best move {best[0]} -> {best[1]}: saves {best[2].saving} micro-usd/h")
    return best


def optimize(spec: LogicalSpec, topology: Topology, config: OptimizerConfig = OptimizerConfig(),
             runner: Optional[Runner] = None) -> Tuple[Placement, List[MoveRecord]]:
    """
    Run the greedy loop from the all-in-cloud placement.

    Args:
        spec: validated logical spec
        topology: sites and links
        config: loop limits and candidate sites
        runner: simulator access, required when config.use_shadowing is set

    Returns:
        (final placement, one MoveRecord per accepted move)
    """
    if config.use_shadowing and runner is None:
        raise ConfigError("use_shadowing needs a simulation runner")
    rates = steady_rates(spec)
    plan = compile(spec, topology, initial_placement(spec, topology))
    total = cost_rate(plan, rates).total
    logger.info(f"Optimizing {spec.name}: start at {total / 1e6:.6f} usd/h")

    moves: List[MoveRecord] = []
    rejected: Set[Tuple[str, str]] = set()
    while len(moves) < config.max_iterations:
        choice = select_move(plan, config, rates, rejected)
        if choice is None:
            break
        component, target, prediction = choice
        if config.use_shadowing:
            try:
                prediction = refine_with_shadow(prediction, plan, runner, config.shadow_duration_s, rates)
            except CapacityError as e:
                logger.info(f"Rejected {component} -> {target}: {e}")
                rejected.add((component, target))
                continue
            if not prediction.feasible or prediction.saving < max(config.min_saving_micro, 1):
                logger.info(f"Rejected {component} -> {target} after shadowing")
                rejected.add((component, target))
                continue
        try:
            moved = apply_move(plan, component, target)
        except CapacityError as e:
            logger.info(f"Rejected {component} -> {target}: {e}")
            rejected.add((component, target))
            continue

        origin = plan.site_of(component)
        plan = moved
        rejected.clear()
        total = cost_rate(plan, rates).total
        util, per_site = edge_cpu_utilization(plan, rates)
        moves.append(MoveRecord(len(moves) + 1, component, origin, target, prediction.delta, total, util,
                                tuple(sorted(per_site.items())), prediction.confidence))
        logger.info(f"Iteration {len(moves)}: moved {component} {origin} -> {target}, "
                    f"total {total / 1e6:.6f} usd/h, edge cpu {util:.3f}")
    return plan.placement, moves


def moves_frame(moves: List[MoveRecord]) -> pd.DataFrame:
    rows = [(m.iteration, m.component, m.from_site, m.to_site, m.predicted_delta, m.total_after,
             repr(float(m.edge_cpu_util))) for m in moves]
    return pd.DataFrame(rows, columns=MOVES_COLUMNS)


def write_moves_csv(moves: List[MoveRecord], path: Union[str, Path]) -> None:
    moves_frame(moves).to_csv(path, index=False, lineterminator="\n")


def read_moves_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, dtype={"component": str, "from": str, "to": str}, keep_default_na=False)


def figure2_frame(spec: LogicalSpec, topology: Topology, moves: List[MoveRecord]) -> pd.DataFrame:
    """Cost and aggregate edge utilization per iteration, iteration 0 being the all-cloud start."""
    rates = steady_rates(spec)
    start = compile(spec, topology, initial_placement(spec, topology))
    rows = [(0, cost_rate(start, rates).total, repr(float(edge_cpu_utilization(start, rates)[0])))]
    rows.extend((m.iteration, m.total_after, repr(float(m.edge_cpu_util))) for m in moves)
    return pd.DataFrame(rows, columns=FIGURE2_COLUMNS)
