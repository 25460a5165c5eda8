"""Generating functions of v-balanced sequences and cycles.

All series terms are produced by their ratio recurrence, so no factorial is
ever formed in floating point.  Two evaluation back ends share one interface:

* :class:`EvalContext` tabulates the series at a fixed ``x``; evaluations at
  any smaller parameter ``u*x`` are obtained by rescaling the stored terms.
* :class:`ClosedFormContext` handles ``v = (1, 1)`` through the closed form
  ``S(x) = (1 - 4x^2)^(-1/2)``, which stays accurate arbitrarily close to the
  singularity ``x = 1/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import ConvergenceError, DivergenceError, DomainError

DEFAULT_TOL = 1e-12
#: Series evaluation refuses parameters beyond this fraction of the radius.
SERIES_GUARD = 0.999
MAX_TERMS = 10_000_000


@dataclass(frozen=True)
class BalanceVector:
    """The balance constraint ``v = (v_1, ..., v_k)``."""

    parts: tuple[int, ...]
    weight: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise DomainError("balance vector must have at least one part")
        for p in parts:
            if isinstance(p, bool) or int(p) != p or p < 1:
                raise DomainError(f"balance vector parts must be positive integers, got {parts!r}")
        parts = tuple(int(p) for p in parts)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "weight", sum(parts))

    @classmethod
    def parse(cls, text: str) -> "BalanceVector":
        try:
            parts = tuple(int(s) for s in text.replace(" ", "").split(",") if s)
        except ValueError:
            raise DomainError(f"cannot parse balance vector {text!r}") from None
        return cls(parts)

    @property
    def k(self) -> int:
        """Number of colors."""
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __str__(self):
        return ",".join(map(str, self.parts))

    def repetition_index(self, counts: Sequence[int]) -> int | None:
        """Return ``p`` when ``counts == p * v`` with ``p >= 0``, else None."""
        counts = list(counts)
        if len(counts) != self.k:
            return None
        if counts[0] % self.parts[0]:
            return None
        p = counts[0] // self.parts[0]
        if all(c == p * vi for c, vi in zip(counts, self.parts)):
            return p
        return None

    def has_closed_form(self) -> bool:
        return self.parts == (1, 1)


def as_balance(v) -> BalanceVector:
    if isinstance(v, BalanceVector):
        return v
    if isinstance(v, str):
        return BalanceVector.parse(v)
    return BalanceVector(tuple(v))


def totient(n: int) -> int:
    """Euler's totient, by trial-division factorization."""
    if n < 1:
        raise DomainError(f"totient is defined for n >= 1, got {n}")
    result, m, p = n, n, 2
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1 if p == 2 else 2
    if m > 1:
        result -= result // m
    return result


@lru_cache(maxsize=4096)
def _totient_cached(n: int) -> int:
    return totient(n)


def divisors(n: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def radius(v) -> float:
    """Radius of convergence ``(prod v_i^v_i)^(1/|v|) / |v|`` of ``S_v``."""
    v = as_balance(v)
    log_num = sum(vi * math.log(vi) for vi in v.parts)
    return math.exp(log_num / v.weight) / v.weight


def _ratio_factors(v: BalanceVector) -> list[tuple[int, int, int, int]]:
    # (a, b, c, d) with factor (a*p + b) / (c*p + d); numerator and
    # denominator factors paired so every quotient stays bounded.
    num = [(v.weight, j) for j in range(1, v.weight + 1)]
    den = [(vi, j) for vi in v.parts for j in range(1, vi + 1)]
    num.sort(key=lambda t: t[1] / t[0])
    den.sort(key=lambda t: t[1] / t[0])
    return [(a, b, c, d) for (a, b), (c, d) in zip(num, den)]


@lru_cache(maxsize=256)
def ratio_factors(v: BalanceVector) -> tuple[tuple[int, int, int, int], ...]:
    return tuple(_ratio_factors(v))


def term_ratio(v: BalanceVector, p: int) -> float:
    """``s_{p+1} / s_p`` for the multinomial ``s_p = (|v|p)! / prod (v_i p)!``."""
    r = 1.0
    for a, b, c, d in ratio_factors(v):
        r *= (a * p + b) / (c * p + d)
    return r


def singular_ratio(v, y: float) -> float:
    """``(y / rho)^|v|``, the limit of the term ratio; it bounds every ratio."""
    v = as_balance(v)
    return (y / radius(v)) ** v.weight


def check_parameter(v: BalanceVector, y: float, *, guard: float = SERIES_GUARD) -> None:
    if not (y >= 0.0) or math.isnan(y):
        raise DomainError(f"Boltzmann parameter must be non-negative, got {y!r}")
    rho = radius(v)
    if y >= rho:
        raise DivergenceError(f"x={y!r} is outside the disc of convergence (radius {rho!r}) for v=({v})")
    if y > guard * rho:
        raise DivergenceError(
            f"x={y!r} exceeds {guard} of the radius {rho!r} for v=({v}); series evaluation refused"
        )


def seq_terms(v, y: float, tol: float = DEFAULT_TOL, *, max_terms: int = MAX_TERMS) -> np.ndarray:
    """Terms ``t_p = s_p y^(|v|p)``, ``p = 0..P``, truncated once the tail is below ``tol``."""
    v = as_balance(v)
    check_parameter(v, y)
    if y == 0.0:
        return np.ones(1)
    z = y ** v.weight
    q = singular_ratio(v, y)
    tail_factor = q / (1.0 - q)
    factors = ratio_factors(v)
    terms = [1.0]
    t, total, p = 1.0, 1.0, 0
    while True:
        r = z
        for a, b, c, d in factors:
            r *= (a * p + b) / (c * p + d)
        t *= r
        p += 1
        terms.append(t)
        total += t
        if t * tail_factor <= 0.5 * tol * total:
            break
        if p >= max_terms:
            raise ConvergenceError(f"series for v=({v}) at x={y!r} did not converge in {max_terms} terms")
    return np.asarray(terms)


def seq_gf(v, x: float, tol: float = DEFAULT_TOL) -> float:
    """``S_v(x)``, including the empty sequence."""
    return math.fsum(seq_terms(v, x, tol))


def _outer_sum(v: BalanceVector, x: float, tol: float, inner) -> float:
    check_parameter(v, x)
    if x == 0.0:
        return 0.0
    # outer terms decay at least like x^(|v| n)
    geometric = 1.0 / (1.0 - x ** v.weight)
    total, n = 0.0, 1
    while True:
        xn = x ** n
        if xn == 0.0:
            break
        contrib = inner(n, seq_terms(v, xn, tol))
        total += contrib
        if contrib * geometric <= tol * total:
            break
        n += 1
        if n > MAX_TERMS:
            raise ConvergenceError("outer cycle sum did not converge")
    return total


def cyc_gf(v, x: float, tol: float = DEFAULT_TOL) -> float:
    """``C_v(x) = sum_n phi(n)/n sum_{p>0} t_p(x^n) / (|v| p)``."""
    v = as_balance(v)

    def inner(n, terms):
        p = np.arange(1, len(terms))
        return _totient_cached(n) / n * math.fsum(terms[1:] / (v.weight * p))

    return _outer_sum(v, x, tol, inner)


def cyc_pointed_gf(v, x: float, tol: float = DEFAULT_TOL) -> float:
    """``C_v*(x) = sum_n phi(n) (S_v(x^n) - 1)``; equals ``x C_v'(x)``."""
    v = as_balance(v)
    return _outer_sum(v, x, tol, lambda n, terms: _totient_cached(n) * math.fsum(terms[1:]))


def dyck_gf(x: float) -> float:
    """Dyck path series ``D(x) = (1 - sqrt(1 - 4x^2)) / (2x^2)``, with ``D(0) = 1``."""
    if not (x >= 0.0):
        raise DomainError(f"Dyck series parameter must be non-negative, got {x!r}")
    if x >= 0.5:
        raise DivergenceError(f"Dyck series diverges for x >= 1/2, got {x!r}")
    # rationalized form, free of cancellation near 0
    return 2.0 / (1.0 + math.sqrt((1.0 - 2.0 * x) * (1.0 + 2.0 * x)))


# --------------------------------------------------------------------------
# exact coefficients


def multinomial_counts(v, p_max: int) -> list[int]:
    """Exact ``s_p`` for ``p = 0..p_max`` via the integer ratio recurrence."""
    v = as_balance(v)
    out = [1]
    s = 1
    for p in range(p_max):
        num = den = 1
        for a, b, c, d in ratio_factors(v):
            num *= a * p + b
            den *= c * p + d
        s = s * num // den
        out.append(s)
    return out


def cyc_series_coefficients(v, m_max: int) -> dict[int, int]:
    """Coefficients of ``x^(|v| m)`` in ``C_v``, accumulated over ``(n, p)`` pairs.

    Uses exact rational arithmetic; every coefficient must come out integral.
    """
    v = as_balance(v)
    s = multinomial_counts(v, m_max)
    acc = {m: Fraction(0) for m in range(1, m_max + 1)}
    for n in range(1, m_max + 1):
        for p in range(1, m_max // n + 1):
            acc[n * p] += Fraction(totient(n) * s[p], n * v.weight * p)
    out = {}
    for m, c in acc.items():
        if c.denominator != 1:
            raise ArithmeticError(f"non-integral coefficient {c} at m={m}")
        out[m] = c.numerator
    return out


# --------------------------------------------------------------------------
# evaluation contexts


class _ContextBase:
    v: BalanceVector
    x: float
    tol: float
    method: str

    def seq_minus_one(self, n: int) -> float:
        raise NotImplementedError

    def theta_masses(self) -> Iterator[tuple[int, float]]:
        """Yield ``(n, phi(n) (S_v(x^n) - 1))`` for ``n = 1, 2, ...``."""
        raise NotImplementedError

    def cyc_scaled(self, w: float) -> float:
        """``C_v(w x)`` for ``0 <= w <= 1``."""
        raise NotImplementedError

    def at(self, y: float) -> "_ContextBase":
        """A context for parameter ``y <= x`` reusing this one's work."""
        raise NotImplementedError

    @property
    def mean_size(self) -> float:
        """Expected Boltzmann size ``C_v*(x) / C_v(x)`` of a cycle."""
        return self.c_v_pointed / self.c_v

    def __repr__(self):
        return f"{type(self).__name__}(v=({self.v}), x={self.x!r}, tol={self.tol!r})"


class EvalContext(_ContextBase):
    """Cached values of ``S_v``, ``C_v`` and ``C_v*`` at ``x``.

    The cycle series is stored as a flat table over pairs ``(n, l)``:
    ``weight = phi(n) t_l(x^n)`` for an object of size ``n |v| l``.  Scaling
    the parameter to ``u x`` multiplies each weight by ``u^size``.
    """

    method = "series"

    def __init__(self, v, x: float, tol: float = DEFAULT_TOL):
        v = as_balance(v)
        if not (x > 0.0):
            raise DomainError(f"EvalContext requires x > 0, got {x!r}")
        base = seq_terms(v, x, tol)
        w = v.weight
        ls = np.arange(1, len(base), dtype=np.float64)
        rows_n, rows_sizes, rows_weights, starts = [], [], [], []
        masses = []
        pointed = 0.0
        geometric = 1.0 / (1.0 - x ** w)
        n, offset = 1, 0
        while True:
            row = base[1:] * np.power(x, (n - 1) * w * ls)
            nz = np.flatnonzero(row > row[0] * 1e-30) if row[0] > 0 else np.array([], dtype=int)
            if nz.size == 0:
                break
            row = row[: nz[-1] + 1]
            mass = _totient_cached(n) * math.fsum(row)
            starts.append(offset)
            rows_n.append(np.full(len(row), n, dtype=np.int64))
            rows_sizes.append(n * w * ls[: len(row)])
            rows_weights.append(_totient_cached(n) * row)
            masses.append(mass)
            offset += len(row)
            pointed += mass
            if mass * geometric <= tol * pointed:
                break
            n += 1
        self._init(
            v, x, tol,
            base=base,
            sizes=np.concatenate(rows_sizes),
            weights=np.concatenate(rows_weights),
            starts=np.asarray(starts, dtype=np.int64),
        )

    def _init(self, v, x, tol, *, base, sizes, weights, starts):
        self.v, self.x, self.tol = v, x, tol
        self._base = base
        self._sizes = sizes
        self._weights = weights
        self._starts = starts
        self._cyc_weights = weights / sizes

    @cached_property
    def s_v(self) -> float:
        return math.fsum(self._base)

    @cached_property
    def s_v_minus_one(self) -> float:
        return math.fsum(self._base[1:])

    @cached_property
    def _masses(self) -> np.ndarray:
        return np.add.reduceat(self._weights, self._starts)

    @cached_property
    def c_v_pointed(self) -> float:
        return math.fsum(self._masses)

    @cached_property
    def c_v(self) -> float:
        return math.fsum(self._cyc_weights)

    def seq_minus_one(self, n: int) -> float:
        if n == 1:
            return self.s_v_minus_one
        if n > len(self._starts):
            return 0.0
        return float(self._masses[n - 1]) / _totient_cached(n)

    def theta_masses(self):
        for i, m in enumerate(self._masses):
            yield i + 1, float(m)

    def cyc_scaled(self, w: float) -> float:
        if w >= 1.0:
            return self.c_v
        if w <= 0.0:
            return 0.0
        return float(np.dot(self._cyc_weights, np.power(w, self._sizes)))

    def at(self, y: float) -> "EvalContext":
        if y == self.x:
            return self
        u = y / self.x
        if not (0.0 < u <= 1.0):
            raise DomainError(f"can only rescale to 0 < y <= x, got y={y!r}, x={self.x!r}")
        out = EvalContext.__new__(EvalContext)
        p = np.arange(len(self._base), dtype=np.float64)
        out._init(
            self.v, y, self.tol,
            base=self._base * np.power(u, self.v.weight * p),
            sizes=self._sizes,
            weights=self._weights * np.power(u, self._sizes),
            starts=self._starts,
        )
        return out

    @property
    def table_size(self) -> int:
        return len(self._weights)


@lru_cache(maxsize=None)
def _cyc_weight(n: int) -> float:
    return _totient_cached(n) / n


def _bridge_gap(z: float) -> float:
    # sqrt(1 - 4 z^2), factored to keep relative precision near z = 1/2
    return math.sqrt((1.0 - 2.0 * z) * (1.0 + 2.0 * z))


class ClosedFormContext(_ContextBase):
    """Evaluation context for ``v = (1, 1)`` from closed forms.

    ``S(z) - 1 = 4z^2 / ((1 + g) g)`` and the cycle inner sum
    ``sum_p C(2p, p) z^(2p) / (2p) = log(2 / (1 + g))`` with
    ``g = sqrt(1 - 4 z^2)``.  Valid for every ``0 < x < 1/2``.
    """

    method = "closed"

    def __init__(self, v, x: float, tol: float = DEFAULT_TOL):
        v = as_balance(v)
        if not v.has_closed_form():
            raise DomainError(f"no closed form available for v=({v})")
        if not (x > 0.0):
            raise DomainError(f"ClosedFormContext requires x > 0, got {x!r}")
        if x >= 0.5:
            raise DivergenceError(f"x={x!r} is outside the disc of convergence (radius 0.5) for v=(1,1)")
        self.v, self.x, self.tol = v, x, tol

    @staticmethod
    def _seq_minus_one_at(z: float) -> float:
        g = _bridge_gap(z)
        return 4.0 * z * z / ((1.0 + g) * g)

    @staticmethod
    def _cyc_inner_at(z: float) -> float:
        g = _bridge_gap(z)
        return math.log1p(4.0 * z * z / ((1.0 + g) * (1.0 + g)))

    @cached_property
    def s_v(self) -> float:
        return 1.0 / _bridge_gap(self.x)

    @cached_property
    def s_v_minus_one(self) -> float:
        return self._seq_minus_one_at(self.x)

    def seq_minus_one(self, n: int) -> float:
        return self._seq_minus_one_at(self.x ** n)

    def theta_masses(self):
        n = 1
        while True:
            z = self.x ** n
            if z == 0.0:
                return
            yield n, _totient_cached(n) * self._seq_minus_one_at(z)
            n += 1

    def _sum(self, y, inner, weight) -> float:
        total, n = 0.0, 1
        while True:
            z = y ** n
            if z == 0.0:
                break
            term = weight(n) * inner(z)
            total += term
            # outer terms decay like 4^(1-n) at worst
            if term <= 1e-17 * total:
                break
            n += 1
        return total

    @cached_property
    def c_v_pointed(self) -> float:
        return self._sum(self.x, self._seq_minus_one_at, _totient_cached)

    @cached_property
    def c_v(self) -> float:
        return self._sum(self.x, self._cyc_inner_at, lambda n: _totient_cached(n) / n)

    def cyc_scaled(self, w: float) -> float:
        if w >= 1.0:
            return self.c_v
        if w <= 0.0:
            return 0.0
        # inlined: this runs inside the root finder of every unpointing draw
        y = self.x * w
        total, n = 0.0, 1
        while True:
            z = y ** n
            if z == 0.0:
                break
            g = math.sqrt((1.0 - 2.0 * z) * (1.0 + 2.0 * z))
            term = _cyc_weight(n) * math.log1p(4.0 * z * z / ((1.0 + g) * (1.0 + g)))
            total += term
            if term <= 1e-17 * total:
                break
            n += 1
        return total

    def at(self, y: float) -> "ClosedFormContext":
        if y == self.x:
            return self
        return ClosedFormContext(self.v, y, self.tol)


def make_context(v, x: float, tol: float = DEFAULT_TOL, method: str = "auto") -> _ContextBase:
    """Build the evaluation context for ``(v, x)``.

    ``method="auto"`` uses the series table up to the series guard and the
    closed form beyond it when ``v`` has one.
    """
    v = as_balance(v)
    if method == "series":
        return EvalContext(v, x, tol)
    if method == "closed":
        return ClosedFormContext(v, x, tol)
    if method != "auto":
        raise DomainError(f"unknown evaluation method {method!r}")
    if x <= SERIES_GUARD * radius(v) or not v.has_closed_form():
        return EvalContext(v, x, tol)
    return ClosedFormContext(v, x, tol)


def max_parameter(v) -> float:
    """Largest Boltzmann parameter any back end accepts for ``v`` (exclusive)."""
    v = as_balance(v)
    return radius(v) if v.has_closed_form() else SERIES_GUARD * radius(v)

