"""Command-line driver: ``lackwalk {run,walk,fit,sample}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Sequence

from lackwalk import __version__
from lackwalk.engine import OracleSpec, default_budget, run_walk
from lackwalk.experiments import (
    FitModel,
    fit_across_n,
    fit_records,
    read_results_csv,
    run_scenario,
    summarize,
    write_atomic,
    write_fits_json,
    write_records_json,
    write_results_csv,
    write_summary_csv,
)
from lackwalk.hypercube import HypercubeDims
from lackwalk.sampling import GROUP_SEED_STRIDE, ScenarioKind, ScenarioSpec, dump_samples, generate_groups
from lackwalk.weights import MAX_LOOPS, WeightScheme, make_coin_spec

log = logging.getLogger("lackwalk")

OUT_ENV = "LACKWALK_OUT"
ALL_SCHEMES = tuple(s.value for s in WeightScheme)


class UsageError(ValueError):
    pass


def parse_int_list(text: str) -> tuple[int, ...]:
    """``"3"``, ``"1..30"`` or ``"1,2,9"`` (ranges may appear inside lists)."""
    values: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                lo, hi = part.split("..")
                values.extend(range(int(lo), int(hi) + 1))
            else:
                values.append(int(part))
        except ValueError:
            raise UsageError(f"cannot parse integer list {text!r}") from None
    return tuple(values)


def parse_schemes(text) -> tuple[str, ...]:
    if isinstance(text, str):
        if text.strip() == "all":
            return ALL_SCHEMES
        text = [t for t in text.split(",") if t.strip()]
    try:
        return tuple(WeightScheme.parse(t.strip()).value for t in text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


@dataclass(frozen=True)
class RunConfig:
    scenario: str = "adjacent"
    n: int = 12
    m: tuple[int, ...] = tuple(range(1, MAX_LOOPS + 1))
    a: tuple[int, ...] | None = None
    s: int = 1
    schemes: tuple[str, ...] = ALL_SCHEMES
    samples: int = 10
    seed: int = 0
    budget_mult: float = 3.0
    out: str = "lackwalk-out"
    jobs: int = 1

    @property
    def m_min(self) -> int:
        return min(self.m)

    @property
    def m_max(self) -> int:
        return max(self.m)

    @property
    def groups(self) -> tuple[int, ...]:
        if self.a is not None:
            return self.a
        return tuple(range(2, min(13, self.n + 1) + 1))

    def validate(self) -> "RunConfig":
        try:
            ScenarioKind.parse(self.scenario)
            HypercubeDims(self.n)
        except (TypeError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        if not self.m:
            raise UsageError("empty m range")
        if self.m_min < 1 or self.m_max > MAX_LOOPS:
            raise UsageError(f"m values must lie in [1, {MAX_LOOPS}], got {self.m_min}..{self.m_max}")
        if len(set(self.m)) != len(self.m):
            raise UsageError(f"repeated m value in {self.m}")
        if self.s < 1:
            raise UsageError(f"s must be >= 1, got {self.s}")
        if not self.schemes:
            raise UsageError("no weight schemes selected")
        if not self.groups:
            raise UsageError("empty group list")
        if min(self.groups) < 2:
            raise UsageError(f"a must be >= 2, got {min(self.groups)}")
        if max(self.groups) > self.n + 1:
            raise UsageError(f"a exceeds n+1: a={max(self.groups)} with n={self.n}")
        if not 1 <= self.samples <= GROUP_SEED_STRIDE:
            raise UsageError(f"samples must lie in [1, {GROUP_SEED_STRIDE}], got {self.samples}")
        if self.budget_mult <= 0:
            raise UsageError("budget multiplier must be positive")
        if self.jobs < 1:
            raise UsageError("jobs must be >= 1")
        return self

    def to_json(self) -> dict:
        out = asdict(self)
        out["m"] = list(self.m)
        out["a"] = None if self.a is None else list(self.a)
        out["schemes"] = list(self.schemes)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "RunConfig":
        if "config" in obj and isinstance(obj["config"], dict):
            obj = obj["config"]  # a manifest.json
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(obj)
        if "m" in kw:
            kw["m"] = parse_int_list(kw["m"]) if isinstance(kw["m"], str) else tuple(kw["m"])
        if kw.get("a") is not None:
            kw["a"] = parse_int_list(kw["a"]) if isinstance(kw["a"], str) else tuple(kw["a"])
        if "schemes" in kw:
            kw["schemes"] = parse_schemes(kw["schemes"])
        return cls(**kw)

    def scenario_spec(self) -> ScenarioSpec:
        return ScenarioSpec(self.scenario, self.groups, self.samples, self.seed)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config or manifest.json to start from")
    p.add_argument("--scenario", choices=[k.value for k in ScenarioKind])
    p.add_argument("--n", type=int)
    p.add_argument("--m", help='self-loop counts: "1..30" or "1,2,9"')
    p.add_argument("--a", help='adjacent-cluster sizes: "2..13" or "3,5"')
    p.add_argument("--s", type=int)
    p.add_argument("--schemes", help='"all" or comma list of ' + ", ".join(ALL_SCHEMES))
    p.add_argument("--samples", type=int, help="samples per mixed group")
    p.add_argument("--seed", type=int)
    p.add_argument("--budget-mult", dest="budget_mult", type=float)
    p.add_argument("--out")
    p.add_argument("--jobs", type=int)


def parse_config(args: argparse.Namespace | Sequence[str]) -> RunConfig:
    """Build a validated :class:`RunConfig` from parsed ``run`` flags or an argv list."""
    if not isinstance(args, argparse.Namespace):
        parser = argparse.ArgumentParser(prog="lackwalk run")
        _add_run_flags(parser)
        args = parser.parse_args(list(args))
    config = RunConfig()
    if getattr(args, "config", None):
        with open(args.config) as fh:
            config = RunConfig.from_json(json.load(fh))
    updates = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        if f.name in ("m", "a"):
            value = parse_int_list(value)
        elif f.name == "schemes":
            value = parse_schemes(value)
        updates[f.name] = value
    if os.environ.get(OUT_ENV):
        updates["out"] = os.environ[OUT_ENV]
    return replace(config, **updates).validate()


def main_run(config: RunConfig) -> int:
    out = Path(config.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        log.error("cannot create output directory %s: %s", out, exc)
        return 3
    if not os.access(out, os.W_OK):
        log.error("output directory %s is not writable", out)
        return 3

    dims = HypercubeDims(config.n)
    spec = config.scenario_spec()
    samples = generate_groups(spec, dims)
    manifest = {
        "version": __version__,
        "config": config.to_json(),
        "samples": [dict(s.to_json(), a=s.a, index=s.index) for s in samples],
    }
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")

    log.info("running %d walks", len(samples) * len(config.schemes) * len(config.m))
    records = run_scenario(
        spec, config.schemes, config.m, dims, s=config.s,
        budget_multiplier=config.budget_mult, jobs=config.jobs, samples=samples,
    )
    write_results_csv(records, out / "results.csv")
    write_records_json(records, out / "results.json")

    failed = sum(1 for r in records if r.status == "failed")
    if any(r.ok for r in records):
        summaries = summarize(records)
        write_summary_csv(summaries, out / "summary.csv")
        for summ in summaries:
            if summ.is_best:
                log.info("%s total=%d: best m=%d p=%.3f", summ.scheme, summ.total_marked, summ.m, summ.mean_p)
    fits = fit_records(records) if len(config.m) >= 3 else []
    write_fits_json(fits, out / "fits.json")
    if failed:
        log.error("%d walks failed; partial results kept in %s", failed, out)
        return 1
    return 0


def main_walk(args) -> int:
    dims = HypercubeDims(args.n)
    oracle = OracleSpec(parse_int_list(args.marked), args.s)
    coin = make_coin_spec(args.scheme, dims, oracle.k, args.m)
    budget = args.budget or default_budget(dims, args.m, oracle.k, args.budget_mult)
    result = run_walk(dims, coin, oracle, budget, keep_history=bool(args.trace))
    if args.trace:
        result.write_trace(args.trace)
    print(json.dumps({
        "n": dims.n, "m": coin.m, "s": oracle.s, "scheme": coin.scheme.value,
        "l": coin.l, "marked": list(oracle.marked), "t_budget": result.t_budget,
        "p_max": result.p_max, "t_max": result.t_max, "t_peak": result.t_peak, "p_peak": result.p_peak,
    }))
    return 0


def _manifest_n(path: Path) -> int:
    manifest = path.parent / "manifest.json"
    with open(manifest) as fh:
        return int(json.load(fh)["config"]["n"])


def main_fit(args) -> int:
    paths = [Path(p) / "results.csv" if Path(p).is_dir() else Path(p) for p in args.inputs]
    model = FitModel(args.model)
    if model is FitModel.LOG_M:
        records = [r for p in paths for r in read_results_csv(p)]
        fits = fit_records(records, model, args.quantity)
    else:
        runs = [(_manifest_n(p), read_results_csv(p)) for p in paths]
        m = args.at_m
        if m is None:
            common = set.intersection(*({r.m for r in recs if r.ok} for _, recs in runs))
            if not common:
                raise UsageError("runs share no m value; pass --at-m")
            m = min(common)
        fits = fit_across_n(runs, m, args.quantity, args.x_axis)
    if args.out:
        write_fits_json(fits, args.out)
    else:
        print(json.dumps([f.to_json() for f in fits], indent=2))
    for fit in fits:
        log.info("%s %s total=%s: coef=%s r2=%.4f", fit.model.value, fit.meta.get("scheme"),
                 fit.meta.get("total_marked"), [round(c, 4) for c in fit.coefficients], fit.r2)
    return 0


def main_sample(args) -> int:
    config = parse_config(args)
    samples = generate_groups(config.scenario_spec(), HypercubeDims(config.n))
    text = dump_samples(samples) + "\n"
    if args.file:
        write_atomic(args.file, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lackwalk", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="sweep a scenario over weight schemes and m")
    _add_run_flags(run)

    walk = sub.add_parser("walk", help="single walk on a given marked set")
    walk.add_argument("--n", type=int, default=12)
    walk.add_argument("--m", type=int, default=1)
    walk.add_argument("--s", type=int, default=1)
    walk.add_argument("--scheme", default=WeightScheme.N_OVER_TIMES_K.value)
    walk.add_argument("--marked", required=True, help='e.g. "0,1,2"')
    walk.add_argument("--budget", type=int, help="fixed step budget")
    walk.add_argument("--budget-mult", dest="budget_mult", type=float, default=3.0)
    walk.add_argument("--trace", help="write per-step success probability CSV here")

    fit = sub.add_parser("fit", help="runtime-scaling fits from results.csv files")
    fit.add_argument("inputs", nargs="+", help="run directories or results.csv paths")
    fit.add_argument("--model", choices=[m.value for m in FitModel], default=FitModel.LOG_M.value)
    fit.add_argument("--quantity", choices=["t_peak", "t_max"], default="t_peak")
    fit.add_argument("--at-m", dest="at_m", type=int, help="m held fixed for sqrt_dim")
    fit.add_argument("--x-axis", dest="x_axis", choices=["dim", "coin"], default="dim")
    fit.add_argument("--out", help="write fits JSON here instead of stdout")

    sample = sub.add_parser("sample", help="emit marked-vertex sets as JSON")
    _add_run_flags(sample)
    sample.add_argument("--file", help="write JSON here instead of stdout")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return main_run(parse_config(args))
        if args.command == "walk":
            return main_walk(args)
        if args.command == "fit":
            return main_fit(args)
        return main_sample(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"lackwalk: error: {exc}", file=sys.stderr)
        return 2
