from .bumps import SHIPPED_BUMPS, BumpFunction, martingale_bumps
from .generator import JUMP_REACH, DriftField, GstModel, check_unitary_equivalence

__all__ = [
    "BumpFunction",
    "DriftField",
    "GstModel",
    "JUMP_REACH",
    "SHIPPED_BUMPS",
    "check_unitary_equivalence",
    "martingale_bumps",
]
