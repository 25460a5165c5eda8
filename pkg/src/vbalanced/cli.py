"""Command line: sample, tune, count, enumerate, test, compose, render.

Exit codes: 0 success, 1 statistical test failure, 2 usage error,
3 numeric or convergence error.  Diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from .distributions import RandomSource
from .errors import ConvergenceError, DivergenceError, DomainError, RejectionError, VBalancedError
from .gfseries import BalanceVector, max_parameter, radius
from .oracle import count_necklaces, count_sequences, enumerate_necklaces, is_balanced, least_rotation
from .plotting import plot_report_bins, render_composed, render_necklace
from .samplers import (
    Necklace,
    cached_context,
    composed_mean_size,
    gamma_cyc11_dyck,
    gamma_cyc_v,
    gamma_seq_v,
    mean_size,
    necklaces_of_necklaces,
    rejection_target,
    size_of,
    solve_mean,
    tune,
    word_to_string,
)
from .samplers.balanced import check_boltzmann_parameter, seq_normalizer
from .stats import (
    Histogram,
    TestNotApplicable,
    TestReport,
    naive_cycle_sampler,
    size_law_report,
    skip_odd_lengths,
    two_sample_test,
    uniformity_report,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
AGREE_MAX_SIZE = 10


class UsageError(VBalancedError):
    pass


@dataclass
class OutputRecord:
    v: list[int]
    size: int
    word: list[int]
    canonical: bool
    seed: int
    x: float

    def validate(self, allow_empty: bool = False) -> None:
        if self.size != len(self.word):
            raise ValueError(f"record size {self.size} != word length {len(self.word)}")
        if not is_balanced(np.asarray(self.word, dtype=np.int64), self.v, allow_empty=allow_empty):
            raise ValueError("record word is not balanced")

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "OutputRecord":
        d = json.loads(line)
        return cls(list(d["v"]), int(d["size"]), list(d["word"]), bool(d["canonical"]), int(d["seed"]), float(d["x"]))


def _balance_arg(text: str) -> BalanceVector:
    try:
        return BalanceVector.parse(text)
    except (DomainError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _resolve_seed(seed: int | None) -> int:
    if seed is None:
        seed = int(np.random.SeedSequence().entropy)
        print(f"seed\t{seed}", file=sys.stderr)
    return seed


def _resolve_x(args, v: BalanceVector, kind: str = "cycle") -> float:
    if args.mean is not None:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            x = tune(v, args.mean, kind)
        for w in caught:
            print(f"warning\t{w.message}", file=sys.stderr)
        return x
    check_boltzmann_parameter(v, args.x)
    return args.x


# -- sample ------------------------------------------------------------------

@dataclass(frozen=True)
class SampleSpec:
    """Everything a worker needs to reproduce its share of draws."""

    v: tuple[int, ...]
    x: float
    kind: str
    method: str
    target_n: int | None
    eps: float
    canonical: bool
    fmt: str
    out_dir: str
    seed: int
    max_attempts: int


def _sampler(spec: SampleSpec) -> Callable:
    v = BalanceVector(spec.v)
    if spec.kind == "sequence":
        norm = seq_normalizer(v, spec.x, True)

        def draw_seq(rng, x, window=None):
            return gamma_seq_v(rng, v, x, True, normalizer=norm, window=window)

        return draw_seq
    if spec.method == "dyck":
        return lambda rng, x: gamma_cyc11_dyck(rng, x)
    ctx = cached_context(v, spec.x)

    def draw_cyc(rng, x, window=None):
        return gamma_cyc_v(rng, v, x, ctx, window=window)

    return draw_cyc


def _iter_lines(spec: SampleSpec, rng: RandomSource, count: int, start: int) -> Iterator[str]:
    v = BalanceVector(spec.v)
    sampler = _sampler(spec)
    for i in range(start, start + count):
        if spec.target_n:
            obj = rejection_target(rng, sampler, spec.x, spec.target_n, spec.eps,
                                   granularity=v.weight, max_attempts=spec.max_attempts).obj
        else:
            obj = sampler(rng, spec.x)
        word = obj.word if isinstance(obj, Necklace) else np.asarray(obj)
        if spec.canonical and len(word):
            word = np.roll(word, -least_rotation(word))
        if not is_balanced(word, v, allow_empty=spec.kind == "sequence"):
            raise ConvergenceError("sampler produced an unbalanced word")
        if spec.fmt == "word":
            yield word_to_string(word)
        elif spec.fmt == "json":
            rec = OutputRecord(list(v.parts), len(word), word.tolist(), spec.canonical, spec.seed, spec.x)
            yield rec.to_json()
        else:
            path = Path(spec.out_dir) / f"necklace-{i:04d}.svg"
            yield str(render_necklace(word, path))


def _run_job(spec: SampleSpec, child: np.random.SeedSequence, count: int, start: int) -> list[str]:
    return list(_iter_lines(spec, RandomSource(child), count, start))


def cmd_sample(args) -> int:
    v = args.v
    if args.method == "dyck" and (v.parts != (1, 1) or args.kind != "cycle"):
        raise UsageError("--method dyck applies only to cycles with --v 1,1")
    if args.canonical and args.kind != "cycle":
        raise UsageError("--canonical applies only to cycles")
    if args.format == "svg" and args.kind != "cycle":
        raise UsageError("--format svg renders necklaces; use --kind cycle")
    if args.eps is not None and args.target_n is None:
        raise UsageError("--eps needs --target-n")
    seed = _resolve_seed(args.seed)
    x = _resolve_x(args, v, args.kind)
    spec = SampleSpec(v.parts, x, args.kind, args.method, args.target_n,
                      args.eps if args.eps is not None else 0.05, args.canonical,
                      args.format, args.out_dir, seed, args.max_attempts)
    out = sys.stdout
    if args.jobs == 1:
        for line in _iter_lines(spec, RandomSource(seed), args.count, 0):
            out.write(line + "\n")
            out.flush()
        return EXIT_OK
    children = np.random.SeedSequence(seed).spawn(args.jobs)
    shares = [args.count // args.jobs + (j < args.count % args.jobs) for j in range(args.jobs)]
    starts = np.concatenate([[0], np.cumsum(shares)[:-1]]).tolist()
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        for lines in pool.map(_run_job, [spec] * args.jobs, children, shares, starts):
            for line in lines:
                out.write(line + "\n")
            out.flush()
    return EXIT_OK


# -- tune, count, enumerate --------------------------------------------------

def cmd_tune(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        x = tune(args.v, args.mean, args.kind)
    for w in caught:
        print(f"warning\t{w.message}", file=sys.stderr)
    m = mean_size(args.v, x, args.kind)
    print(f"v\t{args.v}")
    print(f"kind\t{args.kind}")
    print(f"target\t{args.mean!r}")
    print(f"x\t{x!r}")
    print(f"radius\t{radius(args.v)!r}")
    print(f"mean\t{m!r}")
    print(f"relative_error\t{abs(m - args.mean) / args.mean:.3g}")
    return EXIT_OK


def cmd_count(args) -> int:
    fn = count_necklaces if args.what == "necklaces" else count_sequences
    for p in args.p:
        print(fn(args.v, p))
    return EXIT_OK


def cmd_enumerate(args) -> int:
    for p in args.p:
        for w in enumerate_necklaces(args.v, p):
            print(word_to_string(w))
    return EXIT_OK


# -- test --------------------------------------------------------------------

def _size_coefficients(v: BalanceVector, kind: str, x: float, draws: int) -> dict[int, int]:
    """Exact counts for every size whose expected frequency is not negligible."""
    coeffs = {}
    p = 0 if kind == "sequence" else 1
    while True:
        c = count_necklaces(v, p) if kind == "cycle" else count_sequences(v, p)
        size = v.weight * p
        coeffs[size] = c
        if p > 4 and math.log(c) + size * math.log(x) + math.log(draws) < math.log(1e-3):
            return coeffs
        p += 1


def _default_uniform_size(v: BalanceVector) -> int:
    p = 1
    while count_necklaces(v, p) < 3:
        p += 1
    return v.weight * p


def _suite_size(args, rng, x) -> tuple[TestReport, tuple[str, str]]:
    v = args.v
    if args.kind == "cycle":
        base = (lambda r, y: gamma_cyc11_dyck(r, y)) if args.method == "dyck" else (
            lambda r, y: gamma_cyc_v(r, v, y))
        gf_value = cached_context(v, x).c_v
    else:
        base = lambda r, y: gamma_seq_v(r, v, y, True)  # noqa: E731
        gf_value = seq_normalizer(v, x, True)
    sampler = skip_odd_lengths(base, v) if args.negative_control else base
    hist = Histogram.of(size_of(sampler(rng, x)) for _ in range(args.draws))
    coeffs = _size_coefficients(v, args.kind, x, args.draws)
    report = size_law_report(hist, coeffs, gf_value, x, name=f"size-law {args.kind}")
    return report, ("observed", "expected")


def _suite_uniform(args, rng, x) -> tuple[TestReport, tuple[str, str]]:
    v = args.v
    size = args.size or _default_uniform_size(v)
    if size % v.weight:
        raise UsageError(f"--size must be a multiple of |v| = {v.weight}")
    classes = enumerate_necklaces(v, size // v.weight)
    sampler = naive_cycle_sampler(v) if args.negative_control else (lambda r, y: gamma_cyc_v(r, v, y))
    hist = Histogram()
    for _ in range(args.draws):
        obj = sampler(rng, x)
        if obj.size == size:
            hist.add(obj.canonical())
    report = uniformity_report(hist, classes)
    report.details.update(size=size, total_draws=args.draws)
    return report, ("observed", "expected")


def _agree_key(obj) -> str:
    if obj.size > AGREE_MAX_SIZE:
        return f">{AGREE_MAX_SIZE}"
    return word_to_string(obj.canonical())


def _suite_agree(args, rng, x) -> tuple[TestReport, tuple[str, str]]:
    if args.v.parts != (1, 1):
        raise UsageError("--suite agree compares two routes that exist only for --v 1,1")
    pointing = naive_cycle_sampler(args.v) if args.negative_control else (
        lambda r, y: gamma_cyc_v(r, args.v, y))
    h1 = Histogram.of(_agree_key(pointing(rng, x)) for _ in range(args.draws))
    h2 = Histogram.of(_agree_key(gamma_cyc11_dyck(rng, x)) for _ in range(args.draws))
    return two_sample_test(h1, h2, name="agree pointing/dyck"), ("pointing", "dyck")


SUITES = {"size": _suite_size, "uniform": _suite_uniform, "agree": _suite_agree}


def cmd_test(args) -> int:
    if args.method == "dyck" and args.v.parts != (1, 1):
        raise UsageError("--method dyck applies only to --v 1,1")
    x = _resolve_x(args, args.v, args.kind if args.suite == "size" else "cycle")
    rng = RandomSource(args.seed)
    report, labels = SUITES[args.suite](args, rng, x)
    report.alpha = args.alpha
    report.details.setdefault("x", x)
    report.details["seed"] = args.seed
    if args.format == "json":
        print(report.to_json())
    else:
        print(report.to_text())
    if args.plot_dir and report.details.get("bins"):
        path = Path(args.plot_dir) / f"test-{args.suite}.svg"
        plot_report_bins(report.details["bins"], path, title=report.name, labels=labels)
        print(f"figure\t{path}", file=sys.stderr)
    if report.inconclusive:
        print("inconclusive: too few conditioned draws", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


# -- compose -----------------------------------------------------------------

def cmd_compose(args) -> int:
    v = args.v
    seed = _resolve_seed(args.seed)
    if args.mean is not None:
        if args.mean < v.weight:
            raise DomainError(f"target mean {args.mean!r} is below the minimal size {v.weight}")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            x = solve_mean(lambda y: composed_mean_size(v, y), args.mean, 0.0, max_parameter(v),
                           label=f"Cyc(Cyc_({v}))")
        for w in caught:
            print(f"warning\t{w.message}", file=sys.stderr)
    else:
        x = args.x
        check_boltzmann_parameter(v, x)
        composed_mean_size(v, x)  # raises when the outer cycle diverges
    gen = necklaces_of_necklaces(v)
    rng = RandomSource(seed)
    for i in range(args.count):
        obj = gen(rng, x)
        comps = [c.word for c in obj.components]
        for c in comps:
            if not is_balanced(c, v):
                raise ConvergenceError("an inner necklace is not balanced")
        sizes = [len(c) for c in comps]
        record = {
            "v": list(v.parts), "x": x, "seed": seed, "size": sum(sizes),
            "period": obj.period, "repeats": obj.repeats,
            "components": [{"word": c.tolist(), "size": len(c)} for c in comps],
            "largest_component": max(sizes),
        }
        if args.format == "json":
            print(json.dumps(record, separators=(",", ":")))
        else:
            path = Path(args.out_dir) / f"composed-{i:04d}.svg"
            render_composed(comps, path)
            print(f"{path}\t{record['size']}\t{len(comps)}\t{record['largest_component']}")
    return EXIT_OK


# -- render ------------------------------------------------------------------

def cmd_render(args) -> int:
    stream = open(args.input) if args.input != "-" else sys.stdin
    with stream:
        for i, line in enumerate(stream):
            if not line.strip():
                continue
            d = json.loads(line)
            if "components" in d:
                path = render_composed([c["word"] for c in d["components"]],
                                       Path(args.out_dir) / f"composed-{i:04d}.svg")
            else:
                rec = OutputRecord.from_json(line)
                rec.validate()
                path = render_necklace(rec.word, Path(args.out_dir) / f"necklace-{i:04d}.svg")
            print(path)
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def _add_parameter(p, *, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--x", type=float, help="Boltzmann parameter")
    g.add_argument("--mean", type=float, help="tune x so that the expected size is MEAN")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vbalanced", description="Boltzmann sampling of v-balanced words and necklaces")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw balanced necklaces or sequences")
    p.add_argument("--v", type=_balance_arg, required=True, help="balance vector, e.g. 1,1")
    _add_parameter(p)
    p.add_argument("--kind", choices=["cycle", "sequence"], default="cycle")
    p.add_argument("--count", type=_positive_int, default=1)
    p.add_argument("--target-n", type=_positive_int, help="reject until the size is within eps of N")
    p.add_argument("--eps", type=float)
    p.add_argument("--max-attempts", type=_positive_int, default=1_000_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--canonical", action="store_true", help="print the least rotation")
    p.add_argument("--format", choices=["word", "json", "svg"], default="word")
    p.add_argument("--method", choices=["pointing", "dyck"], default="pointing")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.add_argument("--out-dir", default=".", help="directory for svg files")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("tune", help="solve for x given a target mean size")
    p.add_argument("--v", type=_balance_arg, required=True)
    p.add_argument("--mean", type=float, required=True)
    p.add_argument("--kind", choices=["cycle", "sequence"], default="cycle")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("count", help="exact number of necklaces (or words) with p copies of v")
    p.add_argument("--v", type=_balance_arg, required=True)
    p.add_argument("--p", type=int, nargs="+", required=True)
    p.add_argument("--what", choices=["necklaces", "sequences"], default="necklaces")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("enumerate", help="list canonical necklaces")
    p.add_argument("--v", type=_balance_arg, required=True)
    p.add_argument("--p", type=int, nargs="+", required=True)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("test", help="chi-squared checks of the samplers")
    p.add_argument("--v", type=_balance_arg, required=True)
    _add_parameter(p)
    p.add_argument("--suite", choices=sorted(SUITES), required=True)
    p.add_argument("--draws", type=_positive_int, default=100_000)
    p.add_argument("--kind", choices=["cycle", "sequence"], default="cycle")
    p.add_argument("--method", choices=["pointing", "dyck"], default="pointing")
    p.add_argument("--size", type=_positive_int, help="conditioning size for --suite uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--plot-dir", help="write an observed/expected figure here")
    p.add_argument("--negative-control", action="store_true",
                   help="run the suite on a deliberately wrong sampler; it should fail")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("compose", help="necklaces whose beads are balanced necklaces")
    p.add_argument("--v", type=_balance_arg, default=BalanceVector((1, 1)))
    _add_parameter(p)
    p.add_argument("--count", type=_positive_int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "svg"], default="json")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("render", help="draw JSON records from sample or compose as svg")
    p.add_argument("--input", default="-", help="JSON-lines file, - for stdin")
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, ConvergenceError, RejectionError, TestNotApplicable, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
