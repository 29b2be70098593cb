"""edge_fabric: simulate, cost and optimize edge/cloud IoT dataflow applications."""

__version__ = "0.1.0"
