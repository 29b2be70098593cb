# src/edge_fabric/analysis/__init__.py
"""Cost rates and what-if predictions."""
from edge_fabric.analysis.cost_model import CostBreakdown, CostLine, cost_rate, render_cost_table, write_cost_csv
from edge_fabric.analysis.rates import RateVector, edge_cpu_utilization, site_cpu_demand, steady_rates
from edge_fabric.analysis.what_if import Prediction, predict_move, refine_with_shadow

__all__ = [
    "CostBreakdown", "CostLine", "Prediction", "RateVector", "cost_rate", "edge_cpu_utilization",
    "predict_move", "refine_with_shadow", "render_cost_table", "site_cpu_demand", "steady_rates",
    "write_cost_csv",
]
