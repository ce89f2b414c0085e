"""Command-line entry point.

Exit status:
  0  success
  2  bad command line
  3  input file missing or unreadable
  4  syntax error in the module source
  5  model or precondition error (ranges, sync use, empty language, ...)
  6  validation failed (illegal trace or uniformity rejected)
"""

from __future__ import annotations

import argparse
import secrets
import sys
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence, TextIO

from .automaton import format_automaton
from .counting import EmptyLanguageError, default_ladder, estimate_asymptotics
from .estimate import EstimationParams, Verdict, gaa_estimate, iterated_estimate
from .modules import ModelError, ModelSyntaxError, ModuleSystem, flatten_system, parse_system, sync_letter
from .products import ProductError, TooManyTraces, build_shuffle_automaton, build_sync_product, enumerate_traces
from .shuffle import AUTO, ShuffleSampler, sample_shuffle_trace
from .stats import ALPHA, Histogram, IllegalTraceError, chi_square_uniform, tv_distance
from .sync import SyncError, build_sync_count_tables, extract_sublanguages, sample_sync_trace
from .uniform import Rng

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_SYNTAX = 4
EXIT_MODEL = 5
EXIT_VALIDATION = 6


@dataclass
class RunConfig:
    input: str
    subcommand: str
    length: int | None = None
    count: int = 1
    mode: str = AUTO
    sync: str | None = None
    strip_sync: bool = False
    seed: int | None = None
    epsilon: float = 0.1
    delta: float = 0.05
    depth: int = 10
    detect: str | None = None
    iterate: list[int] = field(default_factory=list)
    output: str | None = None
    format: str = "text"

    def echo(self) -> str:
        items = {k: v for k, v in asdict(self).items() if v not in (None, [], False)}
        return "# " + " ".join(f"{k}={v}" for k, v in items.items())


class _Failure(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="unitrace",
        description="Uniform random traces of reactive-module systems.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(name: str, help: str, length: bool = True) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help)
        sp.add_argument("input", help="module source file")
        if length:
            sp.add_argument("-n", "--length", type=int, required=True, help="trace length")
        sp.add_argument("--sync", action="append", metavar="LABEL", help="synchronisation label (at most one)")
        sp.add_argument("--strip-sync", action="store_true", help="ignore sync labels (treat commands as independent)")
        sp.add_argument("-o", "--output", help="write results here instead of stdout")
        return sp

    common("count", "exact number of traces of a given length")

    sp = common("sample", "uniform random traces")
    sp.add_argument("-m", "--count", type=int, default=1, help="number of traces")
    sp.add_argument("--mode", default=AUTO, choices=["auto", "exact", "asymptotic"])
    sp.add_argument("--seed", type=int)

    sp = common("estimate", "estimate error-detection probability of random walks", length=False)
    sp.add_argument("--epsilon", type=float, default=0.1)
    sp.add_argument("--delta", type=float, default=0.05)
    sp.add_argument("-k", "--depth", type=int, default=10)
    sp.add_argument("--detect", required=True, metavar="EXPR", help="error condition over global states")
    sp.add_argument("--iterate", type=int, nargs="+", metavar="K", help="sweep these depths instead of --depth")
    sp.add_argument("--seed", type=int)

    sp = common("validate", "sample and compare against the enumerated trace set")
    sp.add_argument("-m", "--count", type=int, default=10_000, help="number of samples")
    sp.add_argument("--mode", default=AUTO, choices=["auto", "exact", "asymptotic"])
    sp.add_argument("--seed", type=int)
    sp.add_argument("--format", default="text", choices=["text", "kv"])

    common("flatten", "print per-module automata", length=False)
    common("product", "print the explicit product automaton", length=False)
    return p


def _config(args: argparse.Namespace) -> RunConfig:
    syncs = args.sync or []
    if len(syncs) > 1:
        raise _Failure(EXIT_USAGE, f"at most one --sync label per run, got {syncs}")
    cfg = RunConfig(input=args.input, subcommand=args.subcommand)
    for name in ("length", "count", "mode", "seed", "epsilon", "delta", "depth", "detect",
                 "output", "format", "strip_sync"):
        if hasattr(args, name) and getattr(args, name) is not None:
            setattr(cfg, name, getattr(args, name))
    cfg.iterate = list(getattr(args, "iterate", None) or [])
    cfg.sync = syncs[0] if syncs else None
    if cfg.subcommand in ("sample", "estimate", "validate") and cfg.seed is None:
        cfg.seed = secrets.randbits(63)
    if cfg.length is not None and cfg.length < 0:
        raise _Failure(EXIT_USAGE, "--length must be nonnegative")
    return cfg


def _load(cfg: RunConfig) -> ModuleSystem:
    try:
        with open(cfg.input, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        raise _Failure(EXIT_INPUT, f"cannot read {cfg.input}: {exc.strerror}") from None
    system = parse_system(source)
    if cfg.sync is not None and cfg.sync not in system.sync_labels:
        raise ModelError(f"label {cfg.sync!r} does not occur in {cfg.input}")
    if cfg.subcommand != "estimate" and cfg.sync is None and system.sync_labels and not cfg.strip_sync:
        raise ModelError(
            f"system uses sync labels {sorted(system.sync_labels)}; pass --sync LABEL or --strip-sync"
        )
    return system


class _Pipeline:
    """Flattened modules plus the sampler matching the run's sync setting."""

    def __init__(self, system: ModuleSystem, cfg: RunConfig) -> None:
        self.cfg = cfg
        self.automata = flatten_system(system, cfg.sync)
        self.alpha = sync_letter(cfg.sync) if cfg.sync else None

    def sampler(self, n: int):
        if self.alpha is None:
            return ShuffleSampler(self.automata, n, self.cfg.mode)
        subs = [extract_sublanguages(a, self.alpha) for a in self.automata]
        return build_sync_count_tables(subs, n, self.cfg.mode)

    def draw(self, sampler, n: int, rng: Rng):
        if self.alpha is None:
            return sample_shuffle_trace(sampler, n, rng)
        return sample_sync_trace(sampler, n, rng)

    def product(self):
        if self.alpha is None:
            return build_shuffle_automaton(self.automata)
        return build_sync_product(self.automata, self.alpha)


def _count(system: ModuleSystem, cfg: RunConfig, out: TextIO) -> int:
    # Counts are always exact; the mode only matters for sampling.
    pipe = _Pipeline(system, replace(cfg, mode="exact"))
    n = cfg.length
    tables = pipe.sampler(n)
    total = tables.total(n) if pipe.alpha is None else tables.s_total
    out.write(f"count={total}\n")
    for module, a in zip(system.modules, pipe.automata):
        if pipe.alpha is not None:
            a = a.rerooted(a.initial, a.finals, drop={pipe.alpha})
        try:
            p = estimate_asymptotics(a, default_ladder(max(n, 8)))
        except EmptyLanguageError as exc:
            out.write(f"module={module.name} asymptotics=none reason={str(exc).replace(' ', '_')}\n")
            continue
        out.write(
            f"module={module.name} omega={p.omega:.12g} c={p.c_const:.12g} "
            f"residual={p.relative_residual:.3g} certified={p.certified}\n"
        )
    return EXIT_OK


def _sample(system: ModuleSystem, cfg: RunConfig, out: TextIO) -> int:
    pipe = _Pipeline(system, cfg)
    sampler = pipe.sampler(cfg.length)
    out.write(f"# resolved_mode={sampler.mode}\n")
    rng = Rng(cfg.seed)
    for _ in range(cfg.count):
        out.write(pipe.draw(sampler, cfg.length, rng).display() + "\n")
    return EXIT_OK


def _estimate(system: ModuleSystem, cfg: RunConfig, out: TextIO) -> int:
    verdict = Verdict.when(system, cfg.detect)
    rng = Rng(cfg.seed)
    params = EstimationParams(cfg.epsilon, cfg.delta, cfg.depth)
    out.write(f"N={params.n_samples}\n")
    if cfg.iterate:
        for est in iterated_estimate(system, verdict, cfg.epsilon, cfg.delta, cfg.iterate, rng):
            out.write(f"k={est.k} estimate={est.value:.6f} hits={est.hits}\n")
    else:
        est = gaa_estimate(system, cfg.depth, verdict, params, rng)
        out.write(f"k={est.k} estimate={est.value:.6f} hits={est.hits}\n")
    out.write(f"seed={cfg.seed}\n")
    return EXIT_OK


def _validate(system: ModuleSystem, cfg: RunConfig, out: TextIO) -> int:
    pipe = _Pipeline(system, cfg)
    n = cfg.length
    support = [tuple(x.id for x in w) for w in enumerate_traces(pipe.product(), n)]
    sampler = pipe.sampler(n)
    rng = Rng(cfg.seed)
    hist = Histogram.of(pipe.draw(sampler, n, rng).ids for _ in range(cfg.count))
    report = {"support": len(support), "samples": hist.total, "mode": sampler.mode}
    try:
        report["tv_distance"] = f"{tv_distance(hist, support):.6f}"
        chi = chi_square_uniform(hist, support)
        report.update(chi_square=f"{chi.statistic:.6g}", df=chi.df, p_value=f"{chi.p_value:.6g}")
        passed = chi.p_value >= ALPHA
    except IllegalTraceError as exc:
        report["illegal_trace"] = str(exc)
        passed = False
    report["alpha"] = ALPHA
    report["pass"] = passed
    if cfg.format == "kv":
        out.writelines(f"{k}={v}\n" for k, v in report.items())
    else:
        out.write(f"Validated {hist.total} samples of length {n} against {len(support)} traces\n")
        for k, v in report.items():
            out.write(f"  {k:<13} {v}\n")
    return EXIT_OK if passed else EXIT_VALIDATION


def _flatten(system: ModuleSystem, cfg: RunConfig, out: TextIO) -> int:
    for module, a in zip(system.modules, _Pipeline(system, cfg).automata):
        out.write(f"# module {module.name}\n")
        out.write(format_automaton(a))
    return EXIT_OK


def _product(system: ModuleSystem, cfg: RunConfig, out: TextIO) -> int:
    out.write(format_automaton(_Pipeline(system, cfg).product().base))
    return EXIT_OK


_HANDLERS = {
    "count": _count,
    "sample": _sample,
    "estimate": _estimate,
    "validate": _validate,
    "flatten": _flatten,
    "product": _product,
}


def run(cfg: RunConfig, out: TextIO) -> int:
    system = _load(cfg)
    out.write(cfg.echo() + "\n")
    return _HANDLERS[cfg.subcommand](system, cfg, out)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if cfg.output:
            with open(cfg.output, "w", encoding="utf-8") as fh:
                return run(cfg, fh)
        return run(cfg, sys.stdout)
    except _Failure as exc:
        print(f"unitrace: {exc}", file=sys.stderr)
        return exc.code
    except ModelSyntaxError as exc:
        print(f"unitrace: {cfg.input}: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except (ModelError, ProductError, SyncError, EmptyLanguageError, TooManyTraces, ValueError, IndexError) as exc:
        print(f"unitrace: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
