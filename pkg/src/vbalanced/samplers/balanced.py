"""Samplers for v-balanced sequences and cycles.

The cycle sampler works on the pointed class: a pointed v-balanced cycle is
an ``n``-fold repetition of a non-empty balanced sequence, with ``n`` weighted
by Euler's totient.  The point is then removed by drawing the Boltzmann
parameter itself from the unpointing law.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np

from ..distributions import RandomSource, bernoulli, theta_index, unpoint_u
from ..errors import DivergenceError, DomainError
from ..gfseries import (
    DEFAULT_TOL,
    _totient_cached,
    SERIES_GUARD,
    BalanceVector,
    ClosedFormContext,
    as_balance,
    make_context,
    max_parameter,
    radius,
    ratio_factors,
    seq_terms,
)
from .combinators import BoltzmannGenerator, cyc
from .structures import WORD_DTYPE, Necklace, PointedNecklace, record_atoms

Window = tuple[int, int]
SCALAR_STEPS = 32
MAX_CHUNK = 1 << 16


@lru_cache(maxsize=64)
def cached_context(v: BalanceVector, x: float, tol: float = DEFAULT_TOL, method: str = "auto"):
    return make_context(v, x, tol, method)


def check_boltzmann_parameter(v: BalanceVector, x: float) -> None:
    if not (x > 0.0):
        raise DomainError(f"Boltzmann parameter must be positive, got {x!r}")
    top = max_parameter(v)
    if x > top or (v.has_closed_form() and x >= top):
        raise DivergenceError(f"x={x!r} is out of range for v=({v}) (must stay below {top!r})")


def seq_normalizer(v: BalanceVector, x: float, include_empty: bool) -> float:
    """``S_v(x)``, or ``S_v(x) - 1`` when the empty sequence is excluded."""
    if x <= SERIES_GUARD * radius(v):
        terms = seq_terms(v, x)
        return math.fsum(terms) if include_empty else math.fsum(terms[1:])
    ctx = ClosedFormContext(v, x)
    return ctx.s_v if include_empty else ctx.s_v_minus_one


def draw_seq_length(
    rng: RandomSource,
    v: BalanceVector,
    y: float,
    normalizer: float,
    include_empty: bool,
    max_index: int | None = None,
) -> int | None:
    """Draw ``l`` with ``P(l) = s_l y^(|v| l) / normalizer``.

    Terms are accumulated lazily through the ratio recurrence, so the cost is
    linear in the drawn ``l``.  Returns None as soon as ``l`` would exceed
    ``max_index``.
    """
    z = y ** v.weight
    factors = ratio_factors(v)
    target = rng.uniform() * normalizer
    if include_empty:
        p, t = 0, 1.0
    else:
        p, t = 1, z
        for a, b, c, d in factors:
            t *= b / d
    acc = t
    # short draws dominate: scalar steps first, then vectorized chunks
    for _ in range(SCALAR_STEPS):
        if acc > target:
            return _within(p, max_index)
        if max_index is not None and p >= max_index:
            return None
        r = z
        for a, b, c, d in factors:
            r *= (a * p + b) / (c * p + d)
        t *= r
        p += 1
        if t <= acc * 1e-18:
            # remaining mass is round-off in the normalizer
            return _within(p, max_index)
        acc += t
    chunk = 2 * SCALAR_STEPS
    while acc <= target:
        if max_index is not None:
            if p >= max_index:
                return None
            chunk = min(chunk, max_index - p)
        ps = np.arange(p, p + chunk, dtype=float)
        ratios = np.full(chunk, z)
        for a, b, c, d in factors:
            ratios *= (a * ps + b) / (c * ps + d)
        terms = t * np.cumprod(ratios)
        cums = acc + np.cumsum(terms)
        i = int(np.searchsorted(cums, target, side="right"))
        if i < chunk:
            return _within(p + i + 1, max_index)
        p += chunk
        t, acc = float(terms[-1]), float(cums[-1])
        if t <= acc * 1e-18:
            return _within(p, max_index)
        chunk = min(2 * chunk, MAX_CHUNK)
    return _within(p, max_index)


def _within(p: int, max_index: int | None) -> int | None:
    return None if max_index is not None and p > max_index else p


def fill_balanced(rng: RandomSource, v: BalanceVector, l: int) -> np.ndarray:
    """A uniformly random word with exactly ``v_i l`` atoms of color ``i``."""
    word = np.repeat(np.arange(v.k, dtype=WORD_DTYPE), [vi * l for vi in v.parts])
    rng.shuffle(word)
    record_atoms(len(word))
    return word


def gamma_seq_v(
    rng: RandomSource,
    v,
    x: float,
    include_empty: bool = True,
    *,
    normalizer: float | None = None,
    window: Window | None = None,
) -> np.ndarray | None:
    """Boltzmann sampler for v-balanced sequences.

    With ``window=(lo, hi)`` the length is drawn first and None is returned
    without building a word when the size falls outside the window.
    """
    v = as_balance(v)
    check_boltzmann_parameter(v, x)
    if normalizer is None:
        normalizer = seq_normalizer(v, x, include_empty)
    max_index = None if window is None else window[1] // v.weight
    l = draw_seq_length(rng, v, x, normalizer, include_empty, max_index)
    if l is None or (window is not None and v.weight * l < window[0]):
        return None
    return fill_balanced(rng, v, l)


def gamma_theta_cyc_v(
    rng: RandomSource,
    v,
    x: float,
    ctx=None,
    *,
    window: Window | None = None,
) -> PointedNecklace | None:
    """Boltzmann sampler for pointed v-balanced cycles.

    Draws the repetition order ``n``, then one non-empty balanced sequence at
    ``x^n``, and repeats it ``n`` times; the point sits on atom 0.
    """
    v = as_balance(v)
    if ctx is None:
        check_boltzmann_parameter(v, x)
        ctx = cached_context(v, x)
    n = theta_index(rng, ctx)
    max_index = None if window is None else window[1] // (n * v.weight)
    if max_index == 0:
        return None
    l = draw_seq_length(rng, v, x ** n, ctx.seq_minus_one(n), False, max_index)
    if l is None or (window is not None and n * v.weight * l < window[0]):
        return None
    block = fill_balanced(rng, v, l)
    word = np.tile(block, n)
    record_atoms(len(word) - len(block))
    return PointedNecklace(word, v, point=0, repeats=n)


def _forget_point(obj):
    forget = getattr(obj, "forget", None)
    return forget() if forget is not None else obj


def unpoint(
    rng: RandomSource,
    pointed_sampler: Callable[[RandomSource, float], object],
    gf: Callable[[float], float],
    x: float,
    *,
    empty_sampler: Callable[[RandomSource], object] | None = None,
):
    """Boltzmann sampler for a class from one for its pointed class.

    ``gf`` evaluates the class generating function ``C``; ``c0 = C(0)``.  The
    parameter is randomized to ``u x`` with ``u`` drawn from the density
    ``C*(xu) / (u (C(x) - c0))`` and the pointed sample's point is discarded.
    """
    c0 = gf(0.0)
    cx = gf(x)
    if not (cx > c0):
        raise DomainError("class has no objects of positive size")
    u = unpoint_u(rng, lambda w: (gf(w * x) - c0) / (cx - c0))
    if c0 > 0.0 and bernoulli(rng, c0 / cx):
        if empty_sampler is None:
            raise DomainError("c0 > 0 requires an empty_sampler")
        return empty_sampler(rng)
    return _forget_point(pointed_sampler(rng, u * x))


def gamma_cyc_v(
    rng: RandomSource,
    v,
    x: float,
    ctx=None,
    *,
    window: Window | None = None,
) -> Necklace | None:
    """Boltzmann sampler for v-balanced cycles (necklaces)."""
    v = as_balance(v)
    if ctx is None:
        check_boltzmann_parameter(v, x)
        ctx = cached_context(v, x)

    def gf(y):
        return ctx.cyc_scaled(y / x)

    def pointed(r, y):
        return gamma_theta_cyc_v(r, v, y, ctx.at(y), window=window)

    return unpoint(rng, pointed, gf, x)


def necklace_generator(v) -> BoltzmannGenerator:
    """``Cyc_v`` as a composable generator."""
    v = as_balance(v)
    return BoltzmannGenerator(
        lambda y: cached_context(v, y).c_v,
        lambda rng, y: gamma_cyc_v(rng, v, y),
        name=f"Cyc_({v})",
    )


def sequence_generator(v, include_empty: bool = False) -> BoltzmannGenerator:
    """``Seq_v`` (by default without the empty word) as a composable generator."""
    v = as_balance(v)
    return BoltzmannGenerator(
        lambda y: seq_normalizer(v, y, include_empty),
        lambda rng, y: gamma_seq_v(rng, v, y, include_empty),
        name=f"Seq_({v})",
    )


def necklaces_of_necklaces(v) -> BoltzmannGenerator:
    """``Cyc(Cyc_v)``: cycles whose components are v-balanced necklaces."""
    return cyc(necklace_generator(v))


def composed_mean_size(v, x: float) -> float:
    """Expected size of ``Cyc(Cyc_v)`` at ``x``.

    ``x G'(x) / G(x)`` with ``G = sum_k -phi(k)/k log(1 - A(x^k))``, whose
    pointed form is ``sum_k phi(k) A*(x^k) / (1 - A(x^k))``.
    """
    v = as_balance(v)
    check_boltzmann_parameter(v, x)
    pointed, total, k = 0.0, 0.0, 1
    while True:
        xk = x ** k
        if xk < 1e-300:
            break
        ctx = cached_context(v, xk)
        a = ctx.c_v
        if a >= 1.0:
            raise DivergenceError(f"Cyc(Cyc_v) diverges: A(x^{k}) = {a!r} >= 1")
        phi = _totient_cached(k)
        term = phi * ctx.c_v_pointed / (1.0 - a)
        pointed += term
        total -= phi / k * math.log1p(-a)
        if term <= 1e-16 * pointed:
            break
        k += 1
    return pointed / total
