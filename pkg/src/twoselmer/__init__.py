"""2-Selmer groups of elliptic curves over Q, quadratic twists, and explicit
searches for the primes and characters that drive Selmer-rank divergence."""

__version__ = "0.1.0"

from .arith import INFINITY, Place, hilbert_symbol, is_square_in_Qv, legendre, square_class
from .curves import CurveQ, classify_two_torsion_field, quadratic_twist, same_two_torsion_field
from .descent import (
    SelmerVariant,
    complete_two_descent,
    kramer_parity_check,
    quadratic_field_descent,
    selmer,
    verify_ptd,
)
from .characters import QuadChar, construct_global_character, find_prime
from .procedures import (
    TwistCertificate,
    demo_case1,
    demo_case2,
    demo_case3,
    gap_amplifier,
    multiquadratic_test,
    twist_trichotomy,
)

__all__ = [
    "INFINITY", "Place", "hilbert_symbol", "is_square_in_Qv", "legendre",
    "square_class", "CurveQ", "classify_two_torsion_field", "quadratic_twist",
    "same_two_torsion_field", "SelmerVariant", "complete_two_descent",
    "kramer_parity_check", "quadratic_field_descent", "selmer", "verify_ptd",
    "QuadChar", "construct_global_character", "find_prime", "TwistCertificate",
    "demo_case1", "demo_case2", "demo_case3", "gap_amplifier",
    "multiquadratic_test", "twist_trichotomy", "__version__",
]
