# src/edge_fabric/model/topology.py
import bisect
import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from edge_fabric.errors import FieldError, InvariantError
from edge_fabric.model.document import (
    as_number, child, dump_document, expect_object, get_enum, get_int, get_list, get_number,
    get_str, load_document,
)

logger = logging.getLogger("edge_fabric.topology")

SITE_TYPES = ("edge", "cloud")
# Anything at or above this is treated as unbounded cloud capacity.
UNBOUNDED_CPU = 1e6


@dataclass(frozen=True)
class ProvisionedUnit:
    unit_name: str
    units: int
    per_unit_hour: float


@dataclass(frozen=True)
class PricingTable:
    per_cpu_unit_second: float = 0.0
    per_million_invocations: float = 0.0
    per_gb_ingress: float = 0.0
    per_gb_storage_write: float = 0.0
    provisioned_unit: Optional[ProvisionedUnit] = None


@dataclass(frozen=True)
class Site:
    id: str
    site_type: str
    cpu_units: float
    mem_mb: float
    speed_factor: float
    pricing: PricingTable = field(default_factory=PricingTable)
    # Speed the hardware actually delivers; models get speed_factor, the simulator gets this.
    effective_speed_factor: Optional[float] = None

    @property
    def is_edge(self) -> bool:
        return self.site_type == "edge"

    @property
    def realized_speed(self) -> float:
        if self.effective_speed_factor is None:
            return self.speed_factor
        return self.effective_speed_factor


@dataclass(frozen=True)
class BandwidthSchedule:
    steps: Tuple[Tuple[float, float], ...]

    def starts(self) -> List[float]:
        return [start for start, _ in self.steps]


@dataclass(frozen=True)
class LinkSpec:
    from_site: str
    to_site: str
    bandwidth_schedule: BandwidthSchedule
    latency_ms: float = 0.0
    per_gb_cost: float = 0.0

    @property
    def link_id(self) -> str:
        return f"{self.from_site}->{self.to_site}"


@dataclass(frozen=True)
class CodecCpuTable:
    """CPU-units per message for the auto-inserted encoders; decoders cost decoder_factor of that."""
    json: float = 0.00002
    binpack: float = 0.00005
    delta: float = 0.00012
    deflate: float = 0.00030
    decoder_factor: float = 0.6

    def encoder_cost(self, base: str, deflate: bool) -> float:
        cost = getattr(self, base)
        return cost + self.deflate if deflate else cost

    def decoder_cost(self, base: str, deflate: bool) -> float:
        return self.encoder_cost(base, deflate) * self.decoder_factor


@dataclass(frozen=True)
class Topology:
    sites: Tuple[Site, ...]
    links: Tuple[LinkSpec, ...]
    codec_cpu: CodecCpuTable = field(default_factory=CodecCpuTable)

    def site(self, site_id: str) -> Site:
        for s in self.sites:
            if s.id == site_id:
                return s
        raise KeyError(site_id)

    def has_site(self, site_id: str) -> bool:
        return any(s.id == site_id for s in self.sites)

    @property
    def cloud(self) -> Site:
        return next(s for s in self.sites if s.site_type == "cloud")

    def edge_sites(self) -> List[Site]:
        return sorted((s for s in self.sites if s.is_edge), key=lambda s: s.id)

    def link(self, from_site: str, to_site: str) -> LinkSpec:
        """
        The link carrying traffic from_site -> to_site.

        Only edge->cloud uplinks are mandatory; a cloud->edge hop without its own declaration
        reuses the uplink's schedule and pricing in the reverse direction.
        """
        for ln in self.links:
            if ln.from_site == from_site and ln.to_site == to_site:
                return ln
        for ln in self.links:
            if ln.from_site == to_site and ln.to_site == from_site:
                return replace(ln, from_site=from_site, to_site=to_site)
        raise KeyError(f"{from_site}->{to_site}")

    def route(self, from_site: str, to_site: str) -> Tuple[LinkSpec, ...]:
        """Hops between two sites on the star: direct when the cloud is an endpoint, else via cloud."""
        if from_site == to_site:
            return ()
        cloud_id = self.cloud.id
        if cloud_id in (from_site, to_site):
            return (self.link(from_site, to_site),)
        return (self.link(from_site, cloud_id), self.link(cloud_id, to_site))


def bandwidth_at(link: LinkSpec, t: float) -> float:
    """Cap of the last schedule step starting at or before t."""
    steps = link.bandwidth_schedule.steps
    idx = bisect.bisect_right(link.bandwidth_schedule.starts(), t) - 1
    return steps[max(idx, 0)][1]


def edge_headroom(site: Site, used_cpu: float, used_mem: float) -> Tuple[float, float]:
    return max(site.cpu_units - used_cpu, 0.0), max(site.mem_mb - used_mem, 0.0)


def _parse_pricing(raw, path: str) -> PricingTable:
    if raw is None:
        return PricingTable()
    expect_object(raw, path, (), ("per_cpu_unit_second", "per_million_invocations", "per_gb_ingress",
                                  "per_gb_storage_write", "provisioned_unit"))
    rates = {}
    for key in ("per_cpu_unit_second", "per_million_invocations", "per_gb_ingress", "per_gb_storage_write"):
        rates[key] = get_number(raw, key, path, minimum=0) if key in raw else 0.0
    unit = None
    if raw.get("provisioned_unit") is not None:
        upath = child(path, "provisioned_unit")
        uraw = expect_object(raw["provisioned_unit"], upath, ("unit_name", "units", "per_unit_hour"))
        unit = ProvisionedUnit(
            unit_name=get_str(uraw, "unit_name", upath),
            units=get_int(uraw, "units", upath, minimum=0),
            per_unit_hour=get_number(uraw, "per_unit_hour", upath, minimum=0),
        )
    return PricingTable(provisioned_unit=unit, **rates)


def _parse_schedule(raw, path: str) -> BandwidthSchedule:
    if not isinstance(raw, list):
        raise FieldError(path, "expected an array of [start_second, cap_bits_per_s] pairs")
    steps = []
    for i, step in enumerate(raw):
        spath = child(path, i)
        if not isinstance(step, list) or len(step) != 2:
            raise FieldError(spath, "expected a [start_second, cap_bits_per_s] pair")
        steps.append((as_number(step[0], child(spath, 0)), as_number(step[1], child(spath, 1))))
    if not steps:
        raise InvariantError("BAD_SCHEDULE", f"{path} is empty")
    if steps[0][0] != 0:
        raise InvariantError("BAD_SCHEDULE", f"{path} must start at second 0")
    for (a, _), (b, _) in zip(steps, steps[1:]):
        if b <= a:
            raise InvariantError("BAD_SCHEDULE", f"{path} start seconds must strictly increase")
    for _, cap in steps:
        if cap < 1:
            raise InvariantError("BAD_SCHEDULE", f"{path} caps must be at least 1 bit/s")
    return BandwidthSchedule(tuple(steps))


def _parse_codec_cpu(raw) -> CodecCpuTable:
    if raw is None:
        return CodecCpuTable()
    names = ("json", "binpack", "delta", "deflate", "decoder_factor")
    expect_object(raw, "codec_cpu", (), names)
    return CodecCpuTable(**{k: get_number(raw, k, "codec_cpu", minimum=0) for k in names if k in raw})


def _check_invariants(topology: Topology) -> None:
    ids = [s.id for s in topology.sites]
    dups = sorted({i for i in ids if ids.count(i) > 1})
    if dups:
        raise InvariantError("DUP_SITE", f"site ids declared more than once: {', '.join(dups)}")
    clouds = [s for s in topology.sites if s.site_type == "cloud"]
    if not clouds:
        raise InvariantError("NO_CLOUD", "topology has no cloud site")
    if len(clouds) > 1:
        raise InvariantError("MULTIPLE_CLOUD", f"topology has {len(clouds)} cloud sites")
    cloud_id = clouds[0].id
    for s in topology.sites:
        if s.cpu_units <= 0 or s.speed_factor <= 0 or s.realized_speed <= 0:
            raise InvariantError("BAD_CAPACITY", f"site {s.id} needs positive cpu_units and speed")
        if s.is_edge and s.cpu_units >= UNBOUNDED_CPU:
            raise InvariantError("BAD_CAPACITY", f"edge site {s.id} must have finite cpu_units")
    seen = set()
    for ln in topology.links:
        if ln.from_site == ln.to_site:
            raise InvariantError("BAD_LINK", f"link {ln.link_id} loops back to its own site")
        for end in (ln.from_site, ln.to_site):
            if end not in ids:
                raise InvariantError("BAD_LINK", f"link {ln.link_id} names unknown site {end}")
        if cloud_id not in (ln.from_site, ln.to_site):
            raise InvariantError("BAD_LINK", f"link {ln.link_id} must connect an edge site to the cloud")
        if ln.link_id in seen:
            raise InvariantError("BAD_LINK", f"link {ln.link_id} declared more than once")
        seen.add(ln.link_id)
    for s in topology.sites:
        if s.is_edge and f"{s.id}->{cloud_id}" not in seen:
            raise InvariantError("MISSING_UPLINK", f"edge site {s.id} has no link to {cloud_id}")


def parse_topology(text: str) -> Topology:
    """
    Parse a topology document.

    Args:
        text: JSON with "sites", "links" and an optional "codec_cpu" override table

    Returns:
        Topology that satisfies the star invariants
    """
    doc = expect_object(load_document(text), "", ("sites", "links"), ("codec_cpu",))
    sites = []
    for i, raw in enumerate(get_list(doc, "sites", "")):
        path = child("sites", i)
        expect_object(raw, path, ("id", "site_type", "cpu_units", "mem_mb", "speed_factor"),
                      ("pricing", "effective_speed_factor"))
        effective = raw.get("effective_speed_factor")
        sites.append(Site(
            id=get_str(raw, "id", path),
            site_type=get_enum(raw, "site_type", path, SITE_TYPES),
            cpu_units=get_number(raw, "cpu_units", path),
            mem_mb=get_number(raw, "mem_mb", path, minimum=0),
            speed_factor=get_number(raw, "speed_factor", path),
            pricing=_parse_pricing(raw.get("pricing"), child(path, "pricing")),
            effective_speed_factor=(None if effective is None
                                    else as_number(effective, child(path, "effective_speed_factor"))),
        ))
    links = []
    for i, raw in enumerate(get_list(doc, "links", "")):
        path = child("links", i)
        expect_object(raw, path, ("from", "to", "bandwidth_schedule"), ("latency_ms", "per_gb_cost"))
        links.append(LinkSpec(
            from_site=get_str(raw, "from", path),
            to_site=get_str(raw, "to", path),
            bandwidth_schedule=_parse_schedule(raw["bandwidth_schedule"], child(path, "bandwidth_schedule")),
            latency_ms=get_number(raw, "latency_ms", path, minimum=0) if "latency_ms" in raw else 0.0,
            per_gb_cost=get_number(raw, "per_gb_cost", path, minimum=0) if "per_gb_cost" in raw else 0.0,
        ))
    topology = Topology(tuple(sites), tuple(links), _parse_codec_cpu(doc.get("codec_cpu")))
    _check_invariants(topology)
    logger.debug(f"Parsed topology: {len(sites)} sites, {len(links)} links")
    return topology


def topology_to_dict(topology: Topology) -> Dict:
    sites = []
    for s in topology.sites:
        p = s.pricing
        pricing = {
            "per_cpu_unit_second": p.per_cpu_unit_second,
            "per_million_invocations": p.per_million_invocations,
            "per_gb_ingress": p.per_gb_ingress,
            "per_gb_storage_write": p.per_gb_storage_write,
        }
        if p.provisioned_unit is not None:
            u = p.provisioned_unit
            pricing["provisioned_unit"] = {"unit_name": u.unit_name, "units": u.units,
                                           "per_unit_hour": u.per_unit_hour}
        entry = {"id": s.id, "site_type": s.site_type, "cpu_units": s.cpu_units, "mem_mb": s.mem_mb,
                 "speed_factor": s.speed_factor, "pricing": pricing}
        if s.effective_speed_factor is not None:
            entry["effective_speed_factor"] = s.effective_speed_factor
        sites.append(entry)
    links = [{"from": ln.from_site, "to": ln.to_site,
              "bandwidth_schedule": [[start, cap] for start, cap in ln.bandwidth_schedule.steps],
              "latency_ms": ln.latency_ms, "per_gb_cost": ln.per_gb_cost} for ln in topology.links]
    doc = {"sites": sites, "links": links}
    if topology.codec_cpu != CodecCpuTable():
        c = topology.codec_cpu
        doc["codec_cpu"] = {"json": c.json, "binpack": c.binpack, "delta": c.delta,
                            "deflate": c.deflate, "decoder_factor": c.decoder_factor}
    return doc


def serialize_topology(topology: Topology) -> str:
    return dump_document(topology_to_dict(topology))
