"""Numerical experiments with Hardy's Z-function along a Jacob's ladder."""

from .ladder import LadderModel, build_ladder
from .zeta_engine import hardy_z, hardy_z_array, rs_theta

__all__ = ["LadderModel", "build_ladder", "hardy_z", "hardy_z_array", "rs_theta"]
__version__ = "0.1.0"
