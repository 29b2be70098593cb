# src/edge_fabric/control/__init__.py
"""Control loops: greedy placement and per-uplink communication."""
