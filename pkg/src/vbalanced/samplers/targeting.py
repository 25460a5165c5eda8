"""Size targeting: parameter tuning and rejection to a size window."""
from __future__ import annotations

import inspect
import math
import warnings
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from ..distributions import RandomSource
from ..errors import DivergenceError, DomainError, RejectionError
from ..gfseries import (
    SERIES_GUARD,
    ClosedFormContext,
    as_balance,
    make_context,
    radius,
    seq_terms,
)
from .structures import size_of

TUNE_RTOL = 1e-6


class ResolutionWarning(UserWarning):
    """Tuning stopped at floating-point resolution before meeting its tolerance."""


@dataclass
class RejectionResult:
    obj: Any
    size: int
    attempts: int


def size_window(n: int, eps: float) -> tuple[int, int]:
    if not (0.0 < eps <= 1.0):
        raise DomainError(f"eps must lie in (0, 1], got {eps!r}")
    return math.ceil(n * (1.0 - eps)), math.floor(n * (1.0 + eps))


def _accepts_window(sampler) -> bool:
    try:
        return "window" in inspect.signature(sampler).parameters
    except (TypeError, ValueError):
        return False


def rejection_target(
    rng: RandomSource,
    sampler: Callable,
    x: float,
    n: int,
    eps: float,
    *,
    max_attempts: int = 1_000_000,
    granularity: int = 1,
    size_of: Callable[[Any], int] = size_of,
) -> RejectionResult:
    """Draw until the size lands in ``[n(1-eps), n(1+eps)]``.

    Samplers taking a ``window`` keyword may reject early (returning None)
    before building an out-of-window object.
    """
    lo, hi = size_window(n, eps)
    if granularity > 1 and (hi // granularity) * granularity < lo:
        raise RejectionError(f"no size in [{lo}, {hi}] is a multiple of {granularity}", attempts=0)
    windowed = _accepts_window(sampler)
    for attempt in range(1, max_attempts + 1):
        obj = sampler(rng, x, window=(lo, hi)) if windowed else sampler(rng, x)
        if obj is None:
            continue
        size = size_of(obj)
        if lo <= size <= hi:
            return RejectionResult(obj, size, attempt)
    raise RejectionError(
        f"no object of size in [{lo}, {hi}] after {max_attempts} attempts at x={x!r}; is x tuned?",
        attempts=max_attempts,
    )


def mean_size(v, x: float, kind: str = "cycle") -> float:
    """Expected Boltzmann size ``x C'(x) / C(x)``."""
    v = as_balance(v)
    if kind == "cycle":
        return make_context(v, x).mean_size
    if kind == "sequence":
        if x <= SERIES_GUARD * radius(v):
            terms = seq_terms(v, x)
            sizes = v.weight * np.arange(len(terms), dtype=float)
            return math.fsum(sizes * terms) / math.fsum(terms)
        # bridges: x S'(x) / S(x) = 4x^2 / (1 - 4x^2) = S^2 - 1
        return ClosedFormContext(v, x).s_v ** 2 - 1.0
    raise DomainError(f"unknown kind {kind!r}")


def minimal_size(v, kind: str = "cycle") -> int:
    v = as_balance(v)
    return v.weight if kind == "cycle" else 0


def tune(v, target_mean: float, kind: str = "cycle", *, rtol: float = TUNE_RTOL) -> float:
    """Solve ``x C'(x) / C(x) = target_mean`` by bisection on ``x``.

    Below the series guard every ``v`` is supported; beyond it only classes
    with a closed form.
    """
    v = as_balance(v)
    floor = minimal_size(v, kind)
    if not (target_mean >= floor) or (kind == "sequence" and target_mean <= 0):
        raise DomainError(f"target mean {target_mean!r} is below the minimal size {floor} for v=({v})")
    rho = radius(v)
    if v.has_closed_form():
        lo, hi = 0.0, rho
    else:
        hi = SERIES_GUARD * rho
        top = mean_size(v, hi, kind)
        if target_mean > top:
            raise DivergenceError(
                f"target mean {target_mean!r} exceeds {top:.6g}, the largest mean reachable at "
                f"{SERIES_GUARD} of the radius for v=({v})"
            )
        lo = 0.0
    return solve_mean(lambda x: mean_size(v, x, kind), target_mean, lo, hi, rtol=rtol, label=f"v=({v})")


def solve_mean(
    mean_fn: Callable[[float], float],
    target_mean: float,
    lo: float,
    hi: float,
    *,
    rtol: float = TUNE_RTOL,
    label: str = "class",
) -> float:
    """Bisection for an increasing ``mean_fn`` on ``(lo, hi)``.

    When the bracket shrinks to adjacent floats first, the best float is
    returned with a :class:`ResolutionWarning`.
    """
    best, best_err = None, math.inf
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        m = mean_fn(mid)
        err = abs(m - target_mean)
        if err < best_err:
            best, best_err = mid, err
        if err <= rtol * target_mean:
            return mid
        if m < target_mean:
            lo = mid
        else:
            hi = mid
    warnings.warn(
        f"tuning for {label} stopped at float resolution: relative error {best_err / target_mean:.3g}",
        ResolutionWarning,
        stacklevel=3,
    )
    return best
