# src/edge_fabric/fabric/report.py
from edge_fabric.fabric.compiler import static_memory
from edge_fabric.fabric.plan import PhysicalPlan


def render_plan_report(plan: PhysicalPlan) -> str:
    """Deterministic text summary of a plan: sites, channels, injected codecs and shadows."""
    lines = [f"plan: {plan.spec.name}", f"default codec: {plan.default_codec.name}", "", "sites:"]
    memory = static_memory(plan.spec, plan.placement, plan.shadows)
    for site in sorted(plan.topology.sites, key=lambda s: s.id):
        nodes = plan.placement.nodes_at(site.id)
        codecs = [c.id for c in plan.injected_at(site.id)]
        lines.append(f"  {site.id} ({site.site_type}) mem {memory.get(site.id, 0.0):g}/{site.mem_mb:g} MiB")
        lines.append(f"    nodes: {', '.join(nodes) if nodes else '-'}")
        if codecs:
            lines.append(f"    codecs: {', '.join(codecs)}")

    lines += ["", "channels:"]
    for ch in plan.channels:
        if ch.is_uplink:
            lines.append(f"  uplink {ch.id} {ch.from_site} => {ch.to_site} via {' + '.join(ch.links)}")
        else:
            lines.append(f"  local  {ch.id} @ {ch.from_site}")

    lines += ["", "injected:"]
    for c in plan.injected:
        lines.append(f"  {c.id} {c.role} @ {c.site_id} cpu/msg {c.cpu_units_per_msg:.6f}")
    if not plan.injected:
        lines.append("  (none)")

    if plan.shadows:
        lines += ["", "shadows:"]
        for sh in plan.shadows:
            lines.append(f"  {sh.id} @ {sh.site_id}")
    return "\n".join(lines) + "\n"
