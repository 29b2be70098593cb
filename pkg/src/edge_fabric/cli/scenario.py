# src/edge_fabric/cli/scenario.py
"""
Scenario files: one JSON document naming everything a command needs.

    {
      "spec": "spec.json",
      "topology": "topology.json",
      "workload": "workload.json" | {...},     (or "trace": "records.csv")
      "sim": {...} | "sim.json",
      "optimizer": {...} | "optimizer.json",
      "placement": "placement.json",
      "output_dir": "out"
    }

Relative paths resolve against the scenario file's directory.
"""
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Optional, Tuple, Union

from edge_fabric.control.placement_optimizer import OptimizerConfig, initial_placement, parse_optimizer_config
from edge_fabric.errors import ConfigError, FieldError, InvariantError
from edge_fabric.fabric.compiler import parse_placement
from edge_fabric.fabric.plan import Placement
from edge_fabric.model.document import expect_object, get_str, load_document
from edge_fabric.model.spec_model import LogicalSpec, ValidationReport, parse_spec, validate
from edge_fabric.model.topology import Topology, parse_topology
from edge_fabric.model.workload import Record, WorkloadSpec, generate, parse_workload, replay
from edge_fabric.simulator.config import SimConfig, parse_sim_config

logger = logging.getLogger("edge_fabric.cli")

SCENARIO_KEYS = ("workload", "trace", "sim", "optimizer", "placement", "output_dir")


@dataclass(frozen=True)
class Scenario:
    path: Path
    spec: LogicalSpec
    topology: Topology
    report: ValidationReport
    sim: Optional[SimConfig] = None
    workload: Optional[WorkloadSpec] = None
    trace_path: Optional[Path] = None
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    placement: Optional[Placement] = None
    output_dir: Optional[Path] = None

    def require_valid(self) -> None:
        if not self.report.ok:
            raise InvariantError(self.report.findings[0].code, f"{self.path}: spec is invalid\n{self.report.render()}")

    def require_sim(self) -> SimConfig:
        if self.sim is None:
            raise ConfigError(f"{self.path}: scenario has no sim section or workload to derive one from")
        return self.sim

    def start_placement(self) -> Placement:
        return self.placement or initial_placement(self.spec, self.topology)

    def records(self) -> Iterator[Tuple[str, Record]]:
        if self.trace_path is not None:
            return replay(self.trace_path)
        if self.workload is None:
            raise ConfigError(f"{self.path}: scenario has neither a workload nor a trace")
        return generate(self.workload)


def _resolve(base: Path, raw: Any, key: str) -> Path:
    if not isinstance(raw, str):
        raise FieldError(key, "expected a file path")
    path = Path(raw)
    return path if path.is_absolute() else base / path


def _read(path: Path, key: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{key}: cannot read {path} ({e.strerror or e})")


def _section(base: Path, doc: dict, key: str) -> Optional[Any]:
    """An inline object, or the parsed contents of the file a string value names."""
    value = doc.get(key)
    if value is None or isinstance(value, dict):
        return value
    return load_document(_read(_resolve(base, value, key), key))


def load_scenario(path: Union[str, Path], seed: Optional[int] = None) -> Scenario:
    """
    Read a scenario file and everything it references.

    Args:
        path: scenario JSON file
        seed: overrides the workload and simulation seeds when given

    Raises:
        ConfigError: a referenced file is missing or unreadable
        InputError: any referenced document fails to parse
    """
    path = Path(path)
    base = path.parent
    doc = expect_object(load_document(_read(path, "scenario")), "<root>", ("spec", "topology"), SCENARIO_KEYS)
    spec = parse_spec(_read(_resolve(base, doc["spec"], "spec"), "spec"))
    topology = parse_topology(_read(_resolve(base, doc["topology"], "topology"), "topology"))
    report = validate(spec, topology)

    workload = None
    raw_workload = _section(base, doc, "workload")
    if raw_workload is not None:
        workload = parse_workload(raw_workload)
        if seed is not None:
            workload = replace(workload, seed=seed)
    trace_path = _resolve(base, doc["trace"], "trace") if doc.get("trace") is not None else None
    if trace_path is not None and workload is not None:
        raise ConfigError(f"{path}: give either workload or trace, not both")
    if trace_path is not None and not trace_path.is_file():
        raise ConfigError(f"trace: cannot read {trace_path}")

    raw_sim = _section(base, doc, "sim")
    if raw_sim is not None:
        sim = parse_sim_config(raw_sim, seed=seed)
    elif workload is not None:
        sim = SimConfig(duration_s=workload.duration_s, seed=seed if seed is not None else workload.seed)
    else:
        sim = None

    raw_optimizer = _section(base, doc, "optimizer")
    optimizer = parse_optimizer_config(raw_optimizer) if raw_optimizer is not None else OptimizerConfig()

    placement = None
    if doc.get("placement") is not None:
        placement_path = _resolve(base, doc["placement"], "placement")
        placement = parse_placement(_read(placement_path, "placement"), spec, topology)

    output_dir = None
    if doc.get("output_dir") is not None:
        output_dir = _resolve(base, get_str(doc, "output_dir", "<root>"), "output_dir")

    logger.info(f"Loaded scenario {path} (spec {spec.name}, {len(topology.sites)} sites)")
    return Scenario(path, spec, topology, report, sim, workload, trace_path, optimizer, placement, output_dir)
