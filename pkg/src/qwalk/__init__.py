"""Optimized hypercube quantum-walk search under systematic coin phase errors."""

from qwalk.config import WalkConfig
from qwalk.trajectory import Trajectory

__all__ = ["WalkConfig", "Trajectory"]
__version__ = "0.1.0"
