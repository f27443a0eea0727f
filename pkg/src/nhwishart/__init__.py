"""Correlated non-Hermitian Wishart / chiral Dirac random-matrix ensembles."""

from .core import EnsembleParams, Grid2D, SeedSpec, make_params, params_from_json, params_to_json
from .scaled import ScaledComplex, scaled_value

__all__ = [
    "EnsembleParams",
    "Grid2D",
    "SeedSpec",
    "make_params",
    "params_from_json",
    "params_to_json",
    "ScaledComplex",
    "scaled_value",
]
