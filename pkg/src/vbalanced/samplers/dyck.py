"""The Dyck-path route to (1,1)-balanced cycles.

A (1,1)-balanced cycle is a cycle of indecomposable Dyck paths ``up D down``,
so it can be sampled with the classical cycle construction alone.  This is an
independent cross-check of the pointing route.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..distributions import RandomSource, cyc_index_k, geometric, logarithmic
from ..errors import DivergenceError, DomainError
from ..gfseries import BalanceVector, dyck_gf
from .combinators import cycle_gf
from .structures import WORD_DTYPE, Necklace, record_atoms

UP, DOWN = 0, 1
BRIDGE = BalanceVector((1, 1))


def _check(x: float) -> None:
    if not (x >= 0.0):
        raise DomainError(f"Dyck parameter must be non-negative, got {x!r}")
    if x >= 0.5:
        raise DivergenceError(f"Dyck sampler diverges for x >= 1/2, got {x!r}")


def arc_gf(x: float) -> float:
    """Indecomposable Dyck paths ``x^2 D(x)``."""
    return x * x * dyck_gf(x)


def _dyck_steps(rng: RandomSource, x: float, out: list) -> None:
    lam = arc_gf(x)
    # explicit stack of arcs still to open at each depth
    stack = [geometric(rng, lam)]
    while stack:
        if stack[-1] == 0:
            stack.pop()
            if stack:
                out.append(DOWN)
            continue
        stack[-1] -= 1
        out.append(UP)
        stack.append(geometric(rng, lam))


def gamma_dyck(rng: RandomSource, x: float) -> np.ndarray:
    """Boltzmann sampler for Dyck paths; 0 is an up step, 1 a down step."""
    _check(x)
    out: list[int] = []
    _dyck_steps(rng, x, out)
    record_atoms(len(out))
    return np.asarray(out, dtype=WORD_DTYPE)


@lru_cache(maxsize=64)
def dyck_cycle_total(x: float) -> float:
    """Generating function of ``Cyc(up D down)`` at ``x``."""
    return cycle_gf(arc_gf, x)


def gamma_cyc11_dyck(rng: RandomSource, x: float) -> Necklace:
    """Boltzmann sampler for (1,1)-balanced cycles via cycles of Dyck arcs."""
    _check(x)
    if x == 0.0:
        raise DomainError("x must be positive")
    k = cyc_index_k(rng, lambda i: arc_gf(x ** i), dyck_cycle_total(x))
    xk = x ** k
    j = logarithmic(rng, arc_gf(xk))
    block: list[int] = []
    for _ in range(j):
        block.append(UP)
        _dyck_steps(rng, xk, block)
        block.append(DOWN)
    record_atoms(len(block) * k)
    word = np.tile(np.asarray(block, dtype=WORD_DTYPE), k)
    return Necklace(word, BRIDGE, repeats=k)
