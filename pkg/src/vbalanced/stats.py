"""Goodness-of-fit checks for the samplers.

Chi-squared tests with an expected-count floor: bins below the floor are
pooled into one tail bin so that no observed mass is dropped.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

from scipy.special import chdtrc

from .distributions import RandomSource
from .errors import VBalancedError
from .gfseries import as_balance
from .oracle import enumerate_necklaces
from .samplers import Necklace, gamma_seq_v, size_of

MIN_EXPECTED = 10.0
DEFAULT_ALPHA = 1e-3
TAIL = "<tail>"


class TestNotApplicable(VBalancedError):
    """Fewer than two usable bins after pooling."""

    __test__ = False


class Histogram:
    """Observed counts per key."""

    def __init__(self, counts: Mapping[Hashable, int] | None = None):
        self.bins: Counter = Counter(counts or {})

    @classmethod
    def of(cls, keys: Iterable[Hashable]) -> "Histogram":
        return cls(Counter(keys))

    def add(self, key: Hashable, count: int = 1) -> None:
        self.bins[key] += count

    @property
    def total(self) -> int:
        return sum(self.bins.values())

    def merge(self, other: "Histogram") -> "Histogram":
        return Histogram(self.bins + other.bins)

    __add__ = merge

    def __getitem__(self, key):
        return self.bins.get(key, 0)

    def __len__(self):
        return len(self.bins)

    def __eq__(self, other):
        return isinstance(other, Histogram) and +self.bins == +other.bins

    def __repr__(self):
        return f"Histogram(total={self.total}, keys={len(self.bins)})"


@dataclass
class GofResult:
    statistic: float
    dof: int
    p_value: float
    bins: list = field(default_factory=list)


@dataclass
class TestReport:
    name: str
    statistic: float
    dof: int
    p_value: float
    alpha: float = DEFAULT_ALPHA
    draws: int = 0
    inconclusive: bool = False
    details: dict[str, Any] = field(default_factory=dict)

    __test__ = False

    @property
    def passed(self) -> bool:
        return not self.inconclusive and self.p_value > self.alpha

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=str)

    def to_text(self) -> str:
        lines = [
            f"test\t{self.name}",
            f"draws\t{self.draws}",
            f"statistic\t{self.statistic:.6g}",
            f"dof\t{self.dof}",
            f"p_value\t{self.p_value:.6g}",
            f"alpha\t{self.alpha:g}",
            f"inconclusive\t{str(self.inconclusive).lower()}",
            f"result\t{'PASS' if self.passed else 'FAIL'}",
        ]
        for key, value in self.details.items():
            if not isinstance(value, (list, dict)):
                lines.append(f"{key}\t{value}")
        return "\n".join(lines)


def chi2_sf(statistic: float, dof: int) -> float:
    """Upper tail of the chi-squared law (regularized incomplete gamma)."""
    if math.isinf(statistic):
        return 0.0
    return float(chdtrc(dof, statistic))


def chi_squared_gof(
    observed: Histogram,
    expected_probs: Mapping[Hashable, float],
    *,
    min_expected: float = MIN_EXPECTED,
) -> GofResult:
    """Pearson goodness of fit against a probability law.

    ``expected_probs`` may list only part of the support; the missing mass
    and every key with expected count below ``min_expected`` form the tail.
    """
    n = observed.total
    listed = sum(expected_probs.values())
    if listed > 1.0 + 1e-9:
        raise ValueError(f"expected probabilities sum to {listed!r} > 1")
    kept = [k for k, p in expected_probs.items() if n * p >= min_expected]
    tail_p = max(0.0, 1.0 - sum(expected_probs[k] for k in kept))
    tail_o = n - sum(observed[k] for k in kept)
    cells = [(k, observed[k], n * expected_probs[k]) for k in kept]
    if tail_o > 0 or n * tail_p >= min_expected:
        if n * tail_p >= min_expected or not cells:
            cells.append((TAIL, tail_o, n * tail_p))
        else:
            # fold a thin tail into the smallest kept bin
            i = min(range(len(cells)), key=lambda j: cells[j][2])
            key, o, e = cells[i]
            cells[i] = (key, o + tail_o, e + n * tail_p)
    if len(cells) < 2:
        raise TestNotApplicable(f"only {len(cells)} usable bin(s)")
    stat = 0.0
    for _, o, e in cells:
        if e <= 0.0:
            if o > 0:
                stat = math.inf
            continue
        stat += (o - e) ** 2 / e
    dof = len(cells) - 1
    return GofResult(stat, dof, chi2_sf(stat, dof), [(k, o, e) for k, o, e in cells])


def size_law_probabilities(coeffs: Mapping[int, int], gf_value: float, x: float) -> dict[int, float]:
    """``c_n x^n / G(x)``, computed in logs so huge exact counts never overflow."""
    log_x, log_g = math.log(x), math.log(gf_value)
    out = {}
    for size, c in coeffs.items():
        if c > 0:
            out[size] = math.exp(math.log(c) + size * log_x - log_g)
    return out


def size_law_report(
    observed: Histogram,
    coeffs: Mapping[int, int],
    gf_value: float,
    x: float,
    *,
    name: str = "size-law",
    alpha: float = DEFAULT_ALPHA,
) -> TestReport:
    res = chi_squared_gof(observed, size_law_probabilities(coeffs, gf_value, x))
    return TestReport(
        name, res.statistic, res.dof, res.p_value, alpha, observed.total,
        details={"x": x, "gf": gf_value, "bins": [list(map(_jsonable, b)) for b in res.bins]},
    )


def size_law_test(
    rng: RandomSource,
    sampler: Callable[[RandomSource, float], Any],
    coeffs: Mapping[int, int],
    gf_value: float,
    x: float,
    draws: int,
    *,
    size_of: Callable[[Any], int] = len,
    name: str = "size-law",
    alpha: float = DEFAULT_ALPHA,
) -> TestReport:
    """Empirical size distribution against ``c_n x^n / G(x)``."""
    hist = Histogram.of(size_of(sampler(rng, x)) for _ in range(draws))
    return size_law_report(hist, coeffs, gf_value, x, name=name, alpha=alpha)


def uniformity_report(
    observed: Histogram,
    classes: list,
    *,
    name: str = "uniformity",
    alpha: float = DEFAULT_ALPHA,
) -> TestReport:
    """``observed`` counts canonical forms conditioned on one size."""
    n = observed.total
    m = len(classes)
    inconclusive = n < MIN_EXPECTED * m
    if m == 1:
        stray = n - observed[classes[0]]
        return TestReport(name, 0.0 if not stray else math.inf, 0, 1.0 if not stray else 0.0,
                          alpha, n, inconclusive=inconclusive, details={"classes": 1})
    try:
        res = chi_squared_gof(observed, {c: 1.0 / m for c in classes})
    except TestNotApplicable:
        return TestReport(name, math.nan, 0, math.nan, alpha, n, inconclusive=True, details={"classes": m})
    return TestReport(name, res.statistic, res.dof, res.p_value, alpha, n,
                      inconclusive=inconclusive,
                      details={"classes": m, "bins": [list(map(_jsonable, b)) for b in res.bins]})


def uniformity_test(
    rng: RandomSource,
    sampler: Callable[[RandomSource, float], Any],
    v,
    x: float,
    size: int,
    draws: int,
    *,
    alpha: float = DEFAULT_ALPHA,
) -> TestReport:
    """Draw ``draws`` necklaces, keep those of ``size`` beads, test for uniformity."""
    v = as_balance(v)
    if size % v.weight:
        raise ValueError(f"size {size} is not a multiple of |v| = {v.weight}")
    classes = enumerate_necklaces(v, size // v.weight)
    hist = Histogram()
    for _ in range(draws):
        obj = sampler(rng, x)
        if obj.size == size:
            hist.add(obj.canonical())
    report = uniformity_report(hist, classes, alpha=alpha)
    report.details.update(x=x, size=size, conditioned_draws=hist.total, total_draws=draws)
    report.draws = hist.total
    return report


def two_sample_test(
    h1: Histogram,
    h2: Histogram,
    *,
    name: str = "two-sample",
    alpha: float = DEFAULT_ALPHA,
    min_expected: float = MIN_EXPECTED,
) -> TestReport:
    """Chi-squared homogeneity test of two histograms over the same keys."""
    n1, n2 = h1.total, h2.total
    n = n1 + n2
    if n1 == 0 or n2 == 0:
        raise TestNotApplicable("empty histogram")
    keys = sorted(set(h1.bins) | set(h2.bins), key=repr)
    cols = []
    tail = [0, 0]
    for key in keys:
        o1, o2 = h1[key], h2[key]
        col = o1 + o2
        if min(n1, n2) * col / n >= min_expected:
            cols.append([key, o1, o2])
        else:
            tail[0] += o1
            tail[1] += o2
    if sum(tail):
        if min(n1, n2) * sum(tail) / n >= min_expected or not cols:
            cols.append([TAIL, *tail])
        else:
            smallest = min(cols, key=lambda c: c[1] + c[2])
            smallest[1] += tail[0]
            smallest[2] += tail[1]
    if len(cols) < 2:
        raise TestNotApplicable(f"only {len(cols)} usable bin(s)")
    stat = 0.0
    for _, o1, o2 in cols:
        col = o1 + o2
        e1, e2 = n1 * col / n, n2 * col / n
        stat += (o1 - e1) ** 2 / e1 + (o2 - e2) ** 2 / e2
    dof = len(cols) - 1
    return TestReport(name, stat, dof, chi2_sf(stat, dof), alpha, n,
                      details={"draws_1": n1, "draws_2": n2,
                               "bins": [[_jsonable(k), a, b] for k, a, b in cols]})


def _jsonable(value):
    if isinstance(value, tuple):
        return "".join(map(str, value))
    return value


# Negative controls: deliberately wrong samplers that the tests must reject.

def skip_odd_lengths(sampler: Callable, v) -> Callable:
    """Redraw whenever the balance multiple ``size / |v|`` is odd."""
    w = as_balance(v).weight

    def corrupted(rng, x):
        while True:
            obj = sampler(rng, x)
            if (size_of(obj) // w) % 2 == 0:
                return obj

    return corrupted


def naive_cycle_sampler(v) -> Callable:
    """Close a Boltzmann sequence into a necklace, ignoring rotational symmetry."""
    v = as_balance(v)

    def naive(rng, x):
        return Necklace(gamma_seq_v(rng, v, x, include_empty=False), v)

    return naive
