from edge_fabric.fabric.compiler import (
    add_shadow, apply_move, compile, parse_placement, placement_from_components, remove_shadow,
    serialize_placement, static_memory,
)
from edge_fabric.fabric.plan import (
    DECODER, ENCODER, LOCAL, UPLINK, Channel, CodecComponent, PhysicalPlan, Placement, ShadowReplica,
)
from edge_fabric.fabric.report import render_plan_report
