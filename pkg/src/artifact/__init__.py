"""Error-controlled evaluation of nearly singular layer potentials on axisymmetric surfaces."""

__version__ = "0.1.0"
