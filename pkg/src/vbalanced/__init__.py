"""Boltzmann samplers for v-balanced words and necklaces.

A word over colors ``0..k-1`` is v-balanced when its color counts are a
multiple of ``v``; a necklace is such a word up to rotation.
"""
from .distributions import RandomSource
from .errors import ConvergenceError, DivergenceError, DomainError, RejectionError, VBalancedError
from .gfseries import BalanceVector, cyc_gf, cyc_pointed_gf, make_context, radius, seq_gf
from .oracle import canonical_rotation, count_necklaces, count_sequences, enumerate_necklaces, is_balanced
from .samplers import (
    Necklace,
    gamma_cyc11_dyck,
    gamma_cyc_v,
    gamma_seq_v,
    gamma_theta_cyc_v,
    mean_size,
    rejection_target,
    tune,
    unpoint,
)

__version__ = "0.1.0"

__all__ = [
    "BalanceVector", "ConvergenceError", "DivergenceError", "DomainError", "Necklace",
    "RandomSource", "RejectionError", "VBalancedError", "canonical_rotation", "count_necklaces",
    "count_sequences", "cyc_gf", "cyc_pointed_gf", "enumerate_necklaces", "gamma_cyc11_dyck",
    "gamma_cyc_v", "gamma_seq_v", "gamma_theta_cyc_v", "is_balanced", "make_context",
    "mean_size", "radius", "rejection_target", "seq_gf", "tune", "unpoint",
]
