"""Numerical calibrations for fractional and local variational problems."""

from fraccal.quadrature import (
    AmbientFunction,
    ConfigError,
    DomainError,
    FracParams,
    NumericError,
    QuadratureScheme,
    TailModel,
    frac_laplacian,
    frac_laplacian_eps,
    gradient_constant,
    l1s_norm,
    normalization_constant,
    riesz_kernel,
)
from fraccal.extrapolate import RichardsonResult, richardson_extrapolate

__all__ = [
    "AmbientFunction",
    "ConfigError",
    "DomainError",
    "FracParams",
    "NumericError",
    "QuadratureScheme",
    "RichardsonResult",
    "TailModel",
    "frac_laplacian",
    "frac_laplacian_eps",
    "gradient_constant",
    "l1s_norm",
    "normalization_constant",
    "richardson_extrapolate",
    "riesz_kernel",
]
