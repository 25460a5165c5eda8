"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION <n> ... PASS|FAIL`` line (visible with
``-s`` or in the ``-v`` log) before asserting.  Seeds are fixed.

    pytest tests/test_acceptance.py -v -s
"""
import itertools
import math
import statistics
import subprocess
import sys
import time
from collections import Counter

import pytest

from vbalanced.distributions import RandomSource
from vbalanced.gfseries import BalanceVector, cyc_gf, cyc_pointed_gf, radius
from vbalanced.oracle import count_necklaces, count_sequences, enumerate_necklaces, is_balanced
from vbalanced.samplers import (
    cached_context,
    cost_meter,
    gamma_cyc11_dyck,
    gamma_cyc_v,
    gamma_seq_v,
    mean_size,
    string_to_word,
    tune,
    unpoint,
    word_to_string,
)
from vbalanced.samplers.balanced import seq_normalizer
from vbalanced.stats import Histogram, size_law_report, two_sample_test, uniformity_report

ALPHA = 1e-3


def verdict(capsys, n, title, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {n} {title}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def brute_necklaces(v, p):
    n = v.weight * p
    target = [p * c for c in v.parts]
    seen = set()
    for w in itertools.product(range(v.k), repeat=n):
        if [w.count(i) for i in range(v.k)] == target:
            seen.add(min(w[i:] + w[:i] for i in range(n)))
    return len(seen)


def test_1_oracle_self_consistency(capsys):
    start = time.perf_counter()
    mismatches = []
    for parts in [(1, 1), (2, 1), (1, 1, 1), (3, 1)]:
        v = BalanceVector(parts)
        for p in range(1, 12 // v.weight + 1):
            if count_necklaces(v, p) != brute_necklaces(v, p):
                mismatches.append((parts, p))
    spots = [count_necklaces((1, 1), p) for p in range(1, 6)]
    elapsed = time.perf_counter() - start
    ok = not mismatches and spots == [1, 2, 4, 10, 26] and elapsed < 10
    verdict(capsys, 1, "oracle self-consistency", ok,
            f"mismatches={mismatches} spots={spots} time={elapsed:.1f}s")


def _coefficients(v, kind, x, draws):
    out = {}
    p = 0 if kind == "sequence" else 1
    while True:
        c = count_sequences(v, p) if kind == "sequence" else count_necklaces(v, p)
        out[v.weight * p] = c
        if p > 4 and math.log(c) + v.weight * p * math.log(x) + math.log(draws) < math.log(1e-3):
            return out
        p += 1


@pytest.mark.parametrize("kind,parts", [("sequence", (1, 1)), ("sequence", (2, 1)),
                                        ("cycle", (1, 1)), ("cycle", (1, 1, 1))])
def test_2_size_law(capsys, kind, parts):
    v = BalanceVector(parts)
    x = 0.8 * radius(v)
    draws = 100_000
    rng = RandomSource(2024)
    start = time.perf_counter()
    if kind == "sequence":
        norm = seq_normalizer(v, x, True)
        sizes = Counter(len(gamma_seq_v(rng, v, x, True, normalizer=norm)) for _ in range(draws))
        gf_value = norm
    else:
        ctx = cached_context(v, x)
        sizes = Counter(gamma_cyc_v(rng, v, x, ctx).size for _ in range(draws))
        gf_value = ctx.c_v
    elapsed = time.perf_counter() - start
    rep = size_law_report(Histogram(sizes), _coefficients(v, kind, x, draws), gf_value, x)
    ok = rep.p_value > ALPHA and elapsed < 60
    verdict(capsys, 2, f"size law {kind} v={v}", ok,
            f"x={x:.4f} p={rep.p_value:.3g} dof={rep.dof} time={elapsed:.1f}s")


def test_3_uniformity(capsys):
    v = BalanceVector((1, 1))
    x, size = 0.4, 6
    rng = RandomSource(3)
    ctx = cached_context(v, x)
    hist = Histogram()
    draws = 0
    while hist.total < 5000:
        obj = gamma_cyc_v(rng, v, x, ctx)
        draws += 1
        if obj.size == size:
            hist.add(obj.canonical())
    classes = enumerate_necklaces(v, size // v.weight)
    rep = uniformity_report(hist, classes)
    ok = len(classes) == 4 and set(hist.bins) == set(classes) and hist.total >= 2000 and rep.p_value > ALPHA
    verdict(capsys, 3, "within-size uniformity", ok,
            f"classes={len(classes)} conditioned={hist.total}/{draws} p={rep.p_value:.3g}")


def _route_key(obj):
    return word_to_string(obj.canonical()) if obj.size <= 10 else ">10"


def test_4_two_route_agreement(capsys):
    v = BalanceVector((1, 1))
    draws = 100_000
    results = []
    for x, seed in [(0.3, 41), (0.4, 42)]:
        rng = RandomSource(seed)
        ctx = cached_context(v, x)
        h1 = Histogram.of(_route_key(gamma_cyc_v(rng, v, x, ctx)) for _ in range(draws))
        h2 = Histogram.of(_route_key(gamma_cyc11_dyck(rng, x)) for _ in range(draws))
        results.append((x, two_sample_test(h1, h2).p_value))
    ok = all(p > ALPHA for _, p in results)
    verdict(capsys, 4, "pointing vs Dyck route", ok,
            " ".join(f"x={x}: p={p:.3g}" for x, p in results))


def test_5_unpointing(capsys):
    x, draws = 0.5, 100_000

    def pointed(r, y):
        # C*(y) = y + 2y^2: one pointed object of size 1, two of size 2
        return 1 if r.uniform() < y / (y + 2 * y * y) else 2

    rng = RandomSource(5)
    hist = Histogram.of(unpoint(rng, pointed, lambda y: y + y * y, x) for _ in range(draws))
    cx = x + x * x
    rep = size_law_report(hist, {1: 1, 2: 1}, cx, x)

    c0 = 1.0
    empty = Counter(unpoint(rng, pointed, lambda y: c0 + y + y * y, x, empty_sampler=lambda r: 0)
                    for _ in range(draws))
    p0 = c0 / (c0 + cx)
    z = (empty[0] / draws - p0) / math.sqrt(p0 * (1 - p0) / draws)
    ok = rep.p_value > ALPHA and abs(z) <= 4
    verdict(capsys, 5, "unpointing", ok, f"size-law p={rep.p_value:.3g} empty-branch z={z:.2f}")


def test_6_derivative_identity(capsys):
    h = 1e-6
    errs = {}
    for parts in [(1, 1), (2, 1), (1, 1, 1)]:
        x = 0.5 * radius(parts)
        fd = x * (cyc_gf(parts, x + h) - cyc_gf(parts, x - h)) / (2 * h)
        pointed = cyc_pointed_gf(parts, x)
        errs[parts] = abs(pointed - fd) / pointed
    ok = all(e <= 1e-5 for e in errs.values())
    verdict(capsys, 6, "derivative identity", ok,
            " ".join(f"{k}: {e:.2e}" for k, e in errs.items()))


# peak RSS from VmHWM: ru_maxrss would carry over the forking parent's peak
_RSS_WRAPPER = (
    "import re, sys\n"
    "from vbalanced.cli import main\n"
    "code = main(sys.argv[1:])\n"
    "peak = re.search(r'VmHWM:\\s+(\\d+)', open('/proc/self/status').read()).group(1)\n"
    "sys.stderr.write('rss_kb %s\\n' % peak)\n"
    "sys.exit(code)\n"
)


def _cli_with_rss(argv, timeout=None):
    proc = subprocess.run([sys.executable, "-c", _RSS_WRAPPER, *argv], capture_output=True, timeout=timeout)
    rss = int(proc.stderr.decode().rsplit("rss_kb", 1)[1])
    return proc, rss


def test_7_million_beads(capsys):
    _, base_rss = _cli_with_rss(["sample", "--v", "1,1", "--x", "0.3", "--seed", "1"])
    start = time.perf_counter()
    proc, rss = _cli_with_rss(["sample", "--v", "1,1", "--mean", "1000000", "--target-n", "1000000",
                               "--eps", "0.05", "--seed", "1"], timeout=600)
    elapsed = time.perf_counter() - start
    word = proc.stdout.decode().strip()
    n = len(word)
    balanced = is_balanced(string_to_word(word), (1, 1))
    extra = (rss - base_rss) * 1024
    ok = proc.returncode == 0 and n >= 950_000 and balanced and elapsed < 300 and extra <= 64 * n
    verdict(capsys, 7, "million-bead necklace", ok,
            f"size={n} balanced={balanced} time={elapsed:.1f}s peak_rss={rss / 1024:.0f}MB "
            f"baseline={base_rss / 1024:.0f}MB")


def _timed_calls(v, x, seed, calls):
    ctx = cached_context(v, x)
    rng = RandomSource(seed)
    gamma_cyc_v(rng, v, x, ctx)
    start = time.perf_counter()
    for _ in range(calls):
        gamma_cyc_v(rng, v, x, ctx)
    return time.perf_counter() - start


def test_8_linear_cost(capsys):
    v = BalanceVector((1, 1))
    x = 0.45
    calls = 1000
    rng = RandomSource(8)
    ctx = cached_context(v, x)
    with cost_meter() as meter:
        out = sum(gamma_cyc_v(rng, v, x, ctx).size for _ in range(calls))
    atoms_ratio = meter.atoms / out

    base = mean_size(v, x)
    x2 = tune(v, 2 * base)
    t1, t2 = [], []
    for rep in range(5):
        t1.append(_timed_calls(v, x, 100 + rep, calls))
        t2.append(_timed_calls(v, x2, 100 + rep, calls))
    ratio = statistics.median(t2) / statistics.median(t1)
    ok = atoms_ratio <= 3 and 1.5 <= ratio <= 3
    verdict(capsys, 8, "linear expected cost", ok,
            f"atoms/size={atoms_ratio:.3f} mean {base:.2f}->{2 * base:.2f} time ratio={ratio:.2f}")


CLI_RUNS = [
    ["sample", "--v", "1,1", "--x", "0.4", "--seed", "7", "--count", "3", "--format", "word"],
    ["sample", "--v", "2,1", "--x", "0.4", "--seed", "7", "--count", "5", "--format", "json", "--canonical"],
    ["sample", "--v", "1,1", "--mean", "300", "--target-n", "300", "--eps", "0.1", "--seed", "3"],
    ["sample", "--v", "1,1", "--x", "0.45", "--seed", "2", "--count", "6", "--jobs", "2"],
    ["sample", "--v", "1,1", "--x", "0.4", "--method", "dyck", "--seed", "4", "--count", "4"],
    ["sample", "--v", "1,1,1", "--x", "0.3", "--seed", "1", "--count", "2", "--format", "svg", "--out-dir", "{dir}"],
    ["tune", "--v", "1,1", "--mean", "100"],
    ["count", "--v", "1,1", "--p", "1", "2", "3", "4"],
    ["enumerate", "--v", "1,1", "--p", "3"],
    ["test", "--v", "1,1", "--x", "0.4", "--suite", "size", "--draws", "5000", "--plot-dir", "{dir}"],
    ["compose", "--mean", "200", "--seed", "5", "--count", "2"],
    ["compose", "--x", "0.45", "--seed", "5", "--format", "svg", "--out-dir", "{dir}"],
]


def _snapshot(argv, tmp):
    tmp.mkdir()
    args = [a.replace("{dir}", str(tmp)) for a in argv]
    proc = subprocess.run([sys.executable, "-m", "vbalanced", *args], capture_output=True)
    files = {p.name: p.read_bytes() for p in sorted(tmp.iterdir())}
    out = proc.stdout.replace(str(tmp).encode(), b"{dir}")
    return proc.returncode, out, files


def test_9_determinism(capsys, tmp_path):
    differing = []
    for i, argv in enumerate(CLI_RUNS):
        a = _snapshot(argv, tmp_path / f"a{i}")
        b = _snapshot(argv, tmp_path / f"b{i}")
        if a != b or a[0] != 0:
            differing.append(" ".join(argv[:2]))
    ok = not differing
    verdict(capsys, 9, "CLI determinism", ok, f"runs={len(CLI_RUNS)} differing={differing}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-s"]))
