import math
from collections import Counter

import numpy as np
import pytest
from scipy import integrate

from vbalanced.distributions import (
    RandomSource,
    bernoulli,
    cyc_index_k,
    geometric,
    logarithmic,
    theta_index,
    unpoint_u,
)
from vbalanced.errors import ConvergenceError, DomainError
from vbalanced.gfseries import EvalContext, cyc_gf, dyck_gf, seq_gf
from vbalanced.stats import Histogram, chi_squared_gof

N = 100_000


def within(count, n, p, sigmas=4.0):
    return abs(count / n - p) <= sigmas * math.sqrt(p * (1 - p) / n)


def test_seed_determinism():
    a, b = RandomSource(11), RandomSource(11)
    assert [a.uniform() for _ in range(5)] == [b.uniform() for _ in range(5)]
    assert RandomSource(1).uniform() != RandomSource(2).uniform()


def test_spawn_is_deterministic_and_independent():
    kids = RandomSource(5).spawn(3)
    again = RandomSource(5).spawn(3)
    assert [k.uniform() for k in kids] == [k.uniform() for k in again]
    assert len({k.uniform() for k in RandomSource(5).spawn(3)}) == 3


def test_integers_range():
    rng = RandomSource(0)
    draws = {rng.integers(2, 5) for _ in range(200)}
    assert draws == {2, 3, 4}


class TestBernoulli:
    def test_extremes(self):
        rng = RandomSource(0)
        assert not any(bernoulli(rng, 0.0) for _ in range(1000))
        assert all(bernoulli(rng, 1.0) for _ in range(1000))

    def test_frequency(self):
        rng = RandomSource(1)
        assert within(sum(bernoulli(rng, 0.25) for _ in range(N)), N, 0.25)

    @pytest.mark.parametrize("p", [-0.1, 1.1, math.nan])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            bernoulli(RandomSource(0), p)


class TestGeometric:
    def test_zero(self):
        rng = RandomSource(0)
        assert all(geometric(rng, 0.0) == 0 for _ in range(100))

    def test_law(self):
        rng = RandomSource(2)
        c = Counter(geometric(rng, 0.5) for _ in range(N))
        assert within(c[0], N, 0.5)
        assert within(c[1], N, 0.25)

    def test_mean(self):
        rng = RandomSource(3)
        draws = np.array([geometric(rng, 0.3) for _ in range(N)], dtype=float)
        lam = 0.3
        mean, var = lam / (1 - lam), lam / (1 - lam) ** 2
        assert abs(draws.mean() - mean) <= 4 * math.sqrt(var / N)

    @pytest.mark.parametrize("lam", [1.0, 1.5, -0.2])
    def test_domain(self, lam):
        with pytest.raises(DomainError):
            geometric(RandomSource(0), lam)


class TestLogarithmic:
    def test_small_parameter(self):
        rng = RandomSource(0)
        assert all(logarithmic(rng, 1e-9) == 1 for _ in range(1000))

    def test_first_mass(self):
        rng = RandomSource(4)
        p1 = 0.5 / math.log(2)
        assert p1 == pytest.approx(0.7213, abs=1e-4)
        assert within(sum(logarithmic(rng, 0.5) == 1 for _ in range(N)), N, p1)

    def test_law_chi_squared(self):
        rng = RandomSource(5)
        lam = 0.8
        norm = -math.log1p(-lam)
        probs = {j: lam ** j / (j * norm) for j in range(1, 200)}
        res = chi_squared_gof(Histogram.of(logarithmic(rng, lam) for _ in range(N)), probs)
        assert res.p_value > 1e-3

    @pytest.mark.parametrize("lam", [0.0, 1.0])
    def test_domain(self, lam):
        with pytest.raises(DomainError):
            logarithmic(RandomSource(0), lam)


class TestCycIndex:
    def test_tiny_x(self):
        rng = RandomSource(0)
        x = 1e-6
        total = cyc_gf((1, 1), x)
        arcs = lambda k: x ** (2 * k) * dyck_gf(x ** k)  # noqa: E731
        assert all(cyc_index_k(rng, arcs, total) == 1 for _ in range(1000))

    def test_first_mass_at_04(self):
        x = 0.4
        total = cyc_gf((1, 1), x)
        p1 = -math.log(1 - 0.16 * 1.25) / total
        assert p1 == pytest.approx(0.932, abs=2e-3)
        rng = RandomSource(6)
        arcs = lambda k: x ** (2 * k) * dyck_gf(x ** k)  # noqa: E731
        assert within(sum(cyc_index_k(rng, arcs, total) == 1 for _ in range(N)), N, p1)

    def test_inconsistent_total(self):
        # the true total is about 0.24; claiming 10 leaves most of the CDF unreached
        rng = RandomSource(7)
        arcs = lambda k: 0.4 ** (2 * k) * dyck_gf(0.4 ** k)  # noqa: E731
        with pytest.raises(ConvergenceError):
            for _ in range(100):
                cyc_index_k(rng, arcs, 10.0)


class TestThetaIndex:
    def test_tiny_x(self):
        ctx = EvalContext((1, 1), 1e-5)
        rng = RandomSource(0)
        assert all(theta_index(rng, ctx) == 1 for _ in range(1000))

    def test_law(self):
        x = 0.4
        ctx = EvalContext((1, 1), x)
        p1 = (seq_gf((1, 1), x) - 1) / ctx.c_v_pointed
        p2 = (seq_gf((1, 1), x * x) - 1) / ctx.c_v_pointed
        rng = RandomSource(8)
        c = Counter(theta_index(rng, ctx) for _ in range(N))
        assert within(c[1], N, p1)
        assert within(c[2], N, p2)

    def test_masses_sum_to_one(self):
        ctx = EvalContext((2, 1), 0.4)
        assert sum(m for _, m in ctx.theta_masses()) / ctx.c_v_pointed == pytest.approx(1.0, abs=1e-9)


class TestUnpointU:
    def test_identity_cdf_is_uniform(self):
        rng = RandomSource(9)
        draws = [unpoint_u(rng, lambda w: w) for _ in range(20_000)]
        hist = Histogram.of(min(int(u * 10), 9) for u in draws)
        res = chi_squared_gof(hist, {i: 0.1 for i in range(10)})
        assert res.p_value > 1e-3

    def test_square_cdf(self):
        rng = RandomSource(10)
        draws = [unpoint_u(rng, lambda w: w * w) for _ in range(N)]
        # density 2u: bin i has mass ((i+1)^2 - i^2) / 100
        hist = Histogram.of(min(int(u * 10), 9) for u in draws)
        res = chi_squared_gof(hist, {i: (2 * i + 1) / 100 for i in range(10)})
        assert res.p_value > 1e-3

    def test_cycle_cdf(self):
        x = 0.4
        ctx = EvalContext((1, 1), x)
        cdf = lambda w: ctx.cyc_scaled(w) / ctx.c_v  # noqa: E731
        assert cdf(1.0) == pytest.approx(1.0, abs=1e-9)
        rng = RandomSource(11)
        draws = [unpoint_u(rng, cdf) for _ in range(20_000)]
        edges = np.linspace(0, 1, 11)
        probs = {i: cdf(edges[i + 1]) - cdf(edges[i]) for i in range(10)}
        hist = Histogram.of(min(int(u * 10), 9) for u in draws)
        assert chi_squared_gof(hist, probs).p_value > 1e-3

    @pytest.mark.parametrize("w", [0.25, 0.5, 0.75])
    def test_cdf_is_integral_of_density(self, w):
        x = 0.4
        ctx = EvalContext((1, 1), x)

        def density(u):
            return ctx.at(u * x).c_v_pointed / (u * ctx.c_v)

        integral, _ = integrate.quad(density, 0, w, epsabs=1e-12)
        assert integral == pytest.approx(ctx.cyc_scaled(w) / ctx.c_v, abs=1e-6)

    def test_inconsistent_cdf(self):
        with pytest.raises(ConvergenceError):
            unpoint_u(RandomSource(0), lambda w: 0.5 * w)
