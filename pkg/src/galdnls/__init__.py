"""Simulation and analytic bounds for generalized Ablowitz-Ladik and discrete NLS
lattices over nonzero backgrounds."""
from .lattice import Boundary, ComplexField, LatticeGrid, NormKind, L2, L3, L4, LINF, norm, distance
from .models import Background, Equation, Model, ModelSpec, NonlinearityKind, rhs
from .integrate import IntegratorConfig, Method, TimeSeries, evolve, gl4_step, rk4_explicit_step

__all__ = [
    "Boundary", "ComplexField", "LatticeGrid", "NormKind", "L2", "L3", "L4", "LINF", "norm", "distance",
    "Background", "Equation", "Model", "ModelSpec", "NonlinearityKind", "rhs",
    "IntegratorConfig", "Method", "TimeSeries", "evolve", "gl4_step", "rk4_explicit_step",
]

__version__ = "0.1.0"
