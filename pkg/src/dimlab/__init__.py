"""Exact and numerical dimensions of finite measures on the line."""

from .errors import DimlabError
from .exact import bowen_solve, correlation_integral_exact, exact_dims
from .measures import (
    SymbolicMeasure,
    atom_family,
    atoms,
    ball_mass,
    density,
    dirac,
    lebesgue,
    mass,
    mix,
    normalize,
    restrict,
    sample,
    self_similar,
)
from .tv import setwise_converges, tv_converges, tv_distance, weak_converges

__version__ = "0.1.0"

__all__ = [
    "DimlabError",
    "SymbolicMeasure",
    "atom_family",
    "atoms",
    "ball_mass",
    "bowen_solve",
    "correlation_integral_exact",
    "density",
    "dirac",
    "exact_dims",
    "lebesgue",
    "mass",
    "mix",
    "normalize",
    "restrict",
    "sample",
    "self_similar",
    "setwise_converges",
    "tv_converges",
    "tv_distance",
    "weak_converges",
]
