"""Mild-solution toolkit for the fractionally dissipated Navier-Stokes equations."""

__version__ = "0.1.0"

from .params import ModelParams, derive_force_indices, derive_morrey_indices  # noqa: E402
from .grid import SpaceGrid, TimeGrid, VectorField, SpaceTimeVectorField  # noqa: E402

__all__ = ["__version__", "ModelParams", "derive_force_indices", "derive_morrey_indices",
           "SpaceGrid", "TimeGrid", "VectorField", "SpaceTimeVectorField"]
