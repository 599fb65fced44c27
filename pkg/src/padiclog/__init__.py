"""Exact arithmetic for twisted group rings of p-adic tower groups at
finite level: the additive class isomorphism, the integral logarithm
on K1-style unit groups, congruence systems characterizing the image,
and smoothed L-value approximants with their norm congruences.

Everything is computed over Z/p^m with integer matrices; no floating
point, no truncation beyond the stated precision.
"""

from .congruence import (
    Verdict,
    verify_additive_iso,
    verify_integral_log,
    verify_log_laws,
    verify_log_relation,
    verify_theorem1_samples,
)
from .groups import BoundExceeded, FiniteGroup, GroupSeed, LevelGroup, SeedError, parse_seed
from .k1 import K1Context, integral_log
from .rings import ClassCtx, RingCtx
from .zeta import (
    RayClassLevel,
    ZetaInstance,
    check_abelian_congruence,
    check_interpolation,
    check_j_compatibility,
    check_k_independence,
    partial_zeta,
    read_delta_table,
    rw_approximant,
    write_delta_table,
)

__all__ = [
    "BoundExceeded",
    "ClassCtx",
    "FiniteGroup",
    "GroupSeed",
    "K1Context",
    "LevelGroup",
    "RayClassLevel",
    "RingCtx",
    "SeedError",
    "Verdict",
    "ZetaInstance",
    "check_abelian_congruence",
    "check_interpolation",
    "check_j_compatibility",
    "check_k_independence",
    "integral_log",
    "parse_seed",
    "partial_zeta",
    "read_delta_table",
    "rw_approximant",
    "verify_additive_iso",
    "verify_integral_log",
    "verify_log_laws",
    "verify_log_relation",
    "verify_theorem1_samples",
    "write_delta_table",
]

__version__ = "0.1.0"
