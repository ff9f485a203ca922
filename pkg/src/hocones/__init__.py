"""High-order tangent cones and high-order necessary optimality conditions."""

__version__ = "0.1.0"
