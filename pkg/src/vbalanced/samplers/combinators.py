"""Boltzmann samplers for the classical unlabelled constructions.

A :class:`BoltzmannGenerator` pairs a generating-function evaluator with a
draw procedure so that composed samplers have the values their laws need.
"""
from __future__ import annotations

import math
from typing import Any, Callable

from ..distributions import RandomSource, bernoulli, cyc_index_k, geometric, logarithmic
from ..errors import DivergenceError
from ..gfseries import _totient_cached
from .structures import Cycle


class BoltzmannGenerator:
    """A generating function ``gf(x)`` with a sampler ``draw(rng, x)``."""

    def __init__(self, gf: Callable[[float], float], draw: Callable[[RandomSource, float], Any], name: str = ""):
        self.gf = gf
        self._draw = draw
        self.name = name

    def draw(self, rng: RandomSource, x: float):
        return self._draw(rng, x)

    def __call__(self, rng: RandomSource, x: float):
        return self._draw(rng, x)

    def __repr__(self):
        return f"<BoltzmannGenerator {self.name or 'anonymous'}>"


class Deferred(BoltzmannGenerator):
    """Placeholder for recursive specifications; call :meth:`define` once built.

    The generating function must be supplied up front since it is the
    fixed point of the specification.
    """

    def __init__(self, gf: Callable[[float], float], name: str = "deferred"):
        super().__init__(gf, self._forward, name)
        self.target: BoltzmannGenerator | None = None

    def define(self, target: BoltzmannGenerator) -> None:
        self.target = target

    def _forward(self, rng, x):
        if self.target is None:
            raise RuntimeError(f"{self.name} used before being defined")
        return self.target.draw(rng, x)


def atom(color: int = 0) -> BoltzmannGenerator:
    return BoltzmannGenerator(lambda x: x, lambda rng, x: color, name=f"Z{color}")


def product(a: BoltzmannGenerator, b: BoltzmannGenerator) -> BoltzmannGenerator:
    return BoltzmannGenerator(
        lambda x: a.gf(x) * b.gf(x),
        lambda rng, x: (a.draw(rng, x), b.draw(rng, x)),
        name=f"({a.name} x {b.name})",
    )


def union(a: BoltzmannGenerator, b: BoltzmannGenerator) -> BoltzmannGenerator:
    def draw(rng, x):
        ax, bx = a.gf(x), b.gf(x)
        if bernoulli(rng, ax / (ax + bx)):
            return a.draw(rng, x)
        return b.draw(rng, x)

    return BoltzmannGenerator(lambda x: a.gf(x) + b.gf(x), draw, name=f"({a.name} + {b.name})")


def seq(c: BoltzmannGenerator) -> BoltzmannGenerator:
    """Sequences of ``c``-objects; ``c`` must have no object of size 0."""

    def gf(x):
        cx = c.gf(x)
        if cx >= 1.0:
            raise DivergenceError(f"Seq diverges: C(x) = {cx!r} >= 1")
        return 1.0 / (1.0 - cx)

    def draw(rng, x):
        cx = c.gf(x)
        if cx >= 1.0:
            raise DivergenceError(f"Seq diverges: C(x) = {cx!r} >= 1")
        return [c.draw(rng, x) for _ in range(geometric(rng, cx))]

    return BoltzmannGenerator(gf, draw, name=f"Seq({c.name})")


def rep_n(c: BoltzmannGenerator, n: int) -> BoltzmannGenerator:
    """``n`` copies of one ``c``-object drawn at ``x^n``."""
    if n < 1:
        raise ValueError(f"repetition count must be positive, got {n}")

    def draw(rng, x):
        return [c.draw(rng, x ** n)] * n

    return BoltzmannGenerator(lambda x: c.gf(x ** n), draw, name=f"Rep{n}({c.name})")


def cycle_gf(inner_gf: Callable[[float], float], x: float) -> float:
    """``sum_k -phi(k)/k log(1 - A(x^k))``."""
    total, k = 0.0, 1
    while True:
        xk = x ** k
        if xk == 0.0:
            break
        a = inner_gf(xk)
        if a >= 1.0:
            raise DivergenceError(f"Cyc diverges: A(x^{k}) = {a!r} >= 1")
        term = -_totient_cached(k) / k * math.log1p(-a)
        total += term
        if term <= 1e-17 * total:
            break
        k += 1
    return total


def cyc(c: BoltzmannGenerator) -> BoltzmannGenerator:
    """Unlabelled cycles of ``c``-objects; ``c`` must have no object of size 0."""

    def draw(rng, x):
        total = cycle_gf(c.gf, x)
        k = cyc_index_k(rng, lambda i: c.gf(x ** i), total)
        xk = x ** k
        j = logarithmic(rng, c.gf(xk))
        block = [c.draw(rng, xk) for _ in range(j)]
        return Cycle(tuple(block * k), period=j)

    return BoltzmannGenerator(lambda x: cycle_gf(c.gf, x), draw, name=f"Cyc({c.name})")
