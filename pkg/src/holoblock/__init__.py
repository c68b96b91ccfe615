"""Numerical criteria for weighted composition operators ``W_{psi,phi} f = psi (f o phi)``
from ``F(p,q,s)`` to Bloch-type spaces on the unit ball of C^n."""

__version__ = "0.1.0"

from .criteria import (CriterionParams, ProfileConfig, SymbolPair, Verdict, VerdictPolicy, analyze,
                       bloch_to_bloch_verdict, criterion_D, criterion_Q, profile, rayleigh_sup)
from .geometry import BallPoint, MoebiusMap, green, moebius_apply, one_minus_phi_sq
from .quadrature import QuadratureSpec, integrate, integrate_green_weighted, monomial_moment
from .spaces import SpaceParams, bloch_norm, fpqs_seminorm, g_growth
from .symbols import SelfMapSymbol, coord, from_dict, validate_self_map

__all__ = [
    "BallPoint", "CriterionParams", "MoebiusMap", "ProfileConfig", "QuadratureSpec", "SelfMapSymbol",
    "SpaceParams", "SymbolPair", "Verdict", "VerdictPolicy", "analyze", "bloch_norm",
    "bloch_to_bloch_verdict", "coord", "criterion_D", "criterion_Q", "fpqs_seminorm", "from_dict",
    "g_growth", "green", "integrate", "integrate_green_weighted", "moebius_apply", "monomial_moment",
    "one_minus_phi_sq", "profile", "rayleigh_sup", "validate_self_map", "__version__",
]
