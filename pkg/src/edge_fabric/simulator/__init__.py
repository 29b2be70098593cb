# src/edge_fabric/simulator/__init__.py
from edge_fabric.simulator.config import SimConfig, parse_sim_config
from edge_fabric.simulator.engine import Simulation, run, simulation_runner
from edge_fabric.simulator.metrics import MetricsSeries, MetricsWindow, read_metrics_csv, write_metrics_csv
from edge_fabric.simulator.token_bucket import DEFERRED, SENT, SENT_OVERSHOOT, TokenBucket, transmit

__all__ = [
    "DEFERRED", "MetricsSeries", "MetricsWindow", "SENT", "SENT_OVERSHOOT", "SimConfig", "Simulation",
    "TokenBucket", "parse_sim_config", "read_metrics_csv", "run", "simulation_runner", "transmit",
    "write_metrics_csv",
]
