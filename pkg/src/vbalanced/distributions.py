"""Probability laws used by the samplers.

Every law takes a :class:`RandomSource` so that a whole run consumes a single
seeded stream and is bit-reproducible.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import ConvergenceError, DomainError
from .gfseries import _totient_cached

MAX_CDF_TERMS = 1_000_000


class RandomSource:
    """Seedable stream of uniform reals and integers (PCG64 underneath)."""

    def __init__(self, seed=None):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            self._seq = np.random.SeedSequence(seed)
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(self._seq))

    def uniform(self) -> float:
        """A real in ``[0, 1)``."""
        return self._gen.random()

    def integers(self, low: int, high: int) -> int:
        """An integer in ``[low, high)``."""
        return int(self._gen.integers(low, high))

    def shuffle(self, array: np.ndarray) -> None:
        self._gen.shuffle(array)

    def spawn(self, n: int) -> list["RandomSource"]:
        """Independent child streams, derived deterministically from this seed."""
        return [RandomSource(s) for s in self._seq.spawn(n)]

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def bernoulli(rng: RandomSource, p: float) -> bool:
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"Bernoulli parameter must lie in [0, 1], got {p!r}")
    return rng.uniform() < p


def geometric(rng: RandomSource, lam: float) -> int:
    """``P(l) = (1 - lam) lam^l`` for ``l >= 0``, by inversion."""
    if not (0.0 <= lam < 1.0):
        raise DomainError(f"geometric parameter must lie in [0, 1), got {lam!r}")
    if lam == 0.0:
        return 0
    u = 1.0 - rng.uniform()  # in (0, 1]
    return int(math.floor(math.log(u) / math.log(lam)))


def logarithmic(rng: RandomSource, lam: float) -> int:
    """``P(j) = lam^j / (j log(1/(1 - lam)))`` for ``j >= 1``."""
    if not (0.0 < lam < 1.0):
        raise DomainError(f"logarithmic parameter must lie in (0, 1), got {lam!r}")
    target = rng.uniform() * -math.log1p(-lam)
    power, acc, j = lam, lam, 1
    while acc <= target:
        j += 1
        power *= lam
        term = power / j
        if term == 0.0 or j > MAX_CDF_TERMS:
            # the residual is round-off in the normalizer
            break
        acc += term
    return j


def cyc_index_k(rng: RandomSource, inner_gf_at: Callable[[int], float], cyc_total: float) -> int:
    """Draw ``K`` with ``P(K=k) = -phi(k) log(1 - A(x^k)) / (k Cyc_A(x))``.

    ``inner_gf_at(k)`` must return ``A(x^k)``.
    """
    if not (cyc_total > 0.0):
        raise DomainError(f"cycle generating function value must be positive, got {cyc_total!r}")
    u = rng.uniform()
    acc = 0.0
    last_positive = 1
    for k in range(1, MAX_CDF_TERMS + 1):
        a = inner_gf_at(k)
        if not (0.0 <= a < 1.0):
            raise DomainError(f"A(x^{k}) = {a!r} is outside [0, 1)")
        mass = -_totient_cached(k) / k * math.log1p(-a) / cyc_total
        if mass > 0.0:
            last_positive = k
        acc += mass
        if u < acc:
            return k
        if a == 0.0:
            break
    if acc >= 1.0 - 1e-9:
        return last_positive
    raise ConvergenceError(f"cycle index CDF reached only {acc!r}; inconsistent cycle total {cyc_total!r}")


def theta_index(rng: RandomSource, ctx) -> int:
    """Repetition order ``n`` with ``P(N=n) = phi(n) (S_v(x^n) - 1) / C_v*(x)``.

    Sequential accumulation against one uniform draw, as in the pointed-cycle
    sampler's while loop.  ``ctx`` is an evaluation context at ``x``.
    """
    total = ctx.c_v_pointed
    if not (total > 0.0):
        raise DomainError("pointed cycle series must be positive")
    u = rng.uniform()
    acc = 0.0
    n = 0
    for n, mass in ctx.theta_masses():
        acc += mass / total
        if u < acc:
            return n
        if n >= MAX_CDF_TERMS or (mass <= 1e-18 * total and acc >= 1.0 - 1e-9):
            break
    if acc >= 1.0 - 1e-9 and n > 0:
        return n
    raise ConvergenceError(f"theta index CDF reached only {acc!r}")


def unpoint_u(rng: RandomSource, cdf: Callable[[float], float], *, xtol: float = 1e-15) -> float:
    """Draw ``u`` in ``(0, 1]`` by inverting a continuous CDF on ``[0, 1]``.

    For unpointing, ``cdf(w) = (C(xw) - c0) / (C(x) - c0)``, whose derivative
    is the density ``C*(xu) / (u (C(x) - c0))``.
    """
    top = cdf(1.0)
    if abs(top - 1.0) > 1e-6:
        raise ConvergenceError(f"cdf(1) = {top!r}; the unpointing law is inconsistent")
    # normalizing by cdf(1) keeps the root bracketed despite round-off
    target = rng.uniform() * top
    if target == 0.0:
        return math.ulp(0.0)
    return brentq(lambda w: cdf(w) - target, 0.0, 1.0, xtol=xtol, maxiter=200)
