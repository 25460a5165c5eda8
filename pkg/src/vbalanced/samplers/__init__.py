"""Boltzmann samplers: classical constructions, v-balanced sequences and cycles."""
from .balanced import (
    cached_context,
    composed_mean_size,
    draw_seq_length,
    fill_balanced,
    gamma_cyc_v,
    gamma_seq_v,
    gamma_theta_cyc_v,
    necklace_generator,
    necklaces_of_necklaces,
    sequence_generator,
    unpoint,
)
from .combinators import BoltzmannGenerator, Deferred, atom, cyc, cycle_gf, product, rep_n, seq, union
from .dyck import DOWN, UP, arc_gf, dyck_cycle_total, gamma_cyc11_dyck, gamma_dyck
from .structures import (
    Cycle,
    Necklace,
    PointedNecklace,
    cost_meter,
    flatten,
    size_of,
    string_to_word,
    word_to_string,
)
from .targeting import RejectionResult, ResolutionWarning, mean_size, rejection_target, size_window, solve_mean, tune

__all__ = [
    "BoltzmannGenerator", "Cycle", "DOWN", "Deferred", "Necklace", "PointedNecklace",
    "RejectionResult", "ResolutionWarning", "UP", "arc_gf", "atom", "cached_context",
    "composed_mean_size", "cost_meter", "cyc", "cycle_gf", "draw_seq_length", "dyck_cycle_total", "fill_balanced",
    "flatten", "gamma_cyc11_dyck", "gamma_cyc_v", "gamma_dyck", "gamma_seq_v",
    "gamma_theta_cyc_v", "mean_size", "necklace_generator", "necklaces_of_necklaces", "product", "rejection_target",
    "rep_n", "seq", "sequence_generator", "size_of", "size_window", "solve_mean", "string_to_word", "tune",
    "union", "unpoint", "word_to_string",
]
