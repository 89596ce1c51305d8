"""Grid-based numerical laboratory for pluripotential theory in C^1 and C^2."""

__version__ = "0.1.0"
