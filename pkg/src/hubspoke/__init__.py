"""Hub-and-spoke urban logistics network design toolkit.

Pipeline: cluster demand points (fuzzy c-means) -> rebalance with an expert
in the loop -> place hubs by center of gravity -> expand flow-distribution
scenarios S0..S3 -> price each scenario with a CVRPTW solver.
"""

__version__ = "0.1.0"
