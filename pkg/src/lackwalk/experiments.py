"""Scenario sweeps, per-group statistics and runtime-scaling fits."""

from __future__ import annotations

import csv
import enum
import json
import logging
import os
import tempfile
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from lackwalk.engine import OracleSpec, default_budget, run_walk
from lackwalk.hypercube import HypercubeDims
from lackwalk.sampling import MarkedSample, ScenarioSpec, generate_groups
from lackwalk.weights import WeightScheme, make_coin_spec

log = logging.getLogger(__name__)

RESULTS_HEADER = [
    "scenario", "scheme", "a", "total_marked", "m", "sample", "seed",
    "p_max", "t_max", "wall_s", "t_peak", "status",
]
SUMMARY_HEADER = [
    "scenario", "scheme", "total_marked", "m", "mean_p", "cv_percent", "n_samples", "is_best",
]
# mean probabilities closer than this count as a tie when picking the best m
BEST_M_DECIMALS = 3


class FitError(ValueError):
    pass


@dataclass
class ExperimentRecord:
    scenario: str
    scheme: str
    a: int
    total_marked: int
    m: int
    sample: int
    seed: int
    p_max: float | None = None
    t_max: int | None = None
    wall_s: float | None = None
    t_peak: int | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_row(self) -> list[str]:
        def fmt(value, spec):
            return "" if value is None else format(value, spec)

        return [
            self.scenario, self.scheme, str(self.a), str(self.total_marked), str(self.m),
            str(self.sample), str(self.seed), fmt(self.p_max, ".6f"), fmt(self.t_max, "d"),
            fmt(self.wall_s, ".3f"), fmt(self.t_peak, "d"), self.status,
        ]

    @classmethod
    def from_csv_row(cls, row: dict) -> "ExperimentRecord":
        def opt(key, cast):
            value = row.get(key, "")
            return None if value in ("", None) else cast(value)

        return cls(
            scenario=row["scenario"], scheme=row["scheme"], a=int(row["a"]),
            total_marked=int(row["total_marked"]), m=int(row["m"]), sample=int(row["sample"]),
            seed=int(row["seed"]), p_max=opt("p_max", float), t_max=opt("t_max", int),
            wall_s=opt("wall_s", float), t_peak=opt("t_peak", int), status=row.get("status") or "ok",
        )


@dataclass
class GroupSummary:
    scenario: str
    scheme: str
    total_marked: int
    m: int
    mean_p: float
    cv_percent: float | None
    n_samples: int
    is_best: bool = False

    def csv_row(self) -> list[str]:
        cv = "" if self.cv_percent is None else f"{self.cv_percent:.6f}"
        return [
            self.scenario, self.scheme, str(self.total_marked), str(self.m),
            f"{self.mean_p:.6f}", cv, str(self.n_samples), str(int(self.is_best)),
        ]


class FitModel(str, enum.Enum):
    SQRT_DIM = "sqrt_dim"  # T = c * sqrt(x)
    LOG_M = "log_m"  # T = c1 * ln(x) + c0


@dataclass
class FitResult:
    model: FitModel
    coefficients: list[float]
    r2: float
    points: list[tuple[float, float]]
    meta: dict = field(default_factory=dict)

    def predict(self, x) -> np.ndarray:
        return _design(self.model, np.asarray(x, dtype=float)) @ np.asarray(self.coefficients)

    def to_json(self) -> dict:
        out = {
            "model": self.model.value,
            "coefficients": list(self.coefficients),
            "r2": self.r2,
            "points": [[x, t] for x, t in self.points],
        }
        out.update(self.meta)
        return out


def _design(model: FitModel, x: np.ndarray) -> np.ndarray:
    if model is FitModel.SQRT_DIM:
        return np.sqrt(x)[:, None]
    return np.column_stack([np.log(x), np.ones_like(x)])


def fit_scaling(points: Iterable[tuple[float, float]], model) -> FitResult:
    """Least-squares fit of runtime ``T`` against ``x`` for one model.

    ``R^2`` uses the centered total sum of squares for both models and is
    clipped to ``[0, 1]``.
    """
    model = FitModel(model)
    pts = [(float(x), float(t)) for x, t in points]
    if len(pts) < 3:
        raise FitError(f"need at least 3 points, got {len(pts)}")
    x = np.array([p[0] for p in pts])
    t = np.array([p[1] for p in pts])
    if np.any(x <= 0):
        raise FitError("x values must be strictly positive")
    A = _design(model, x)
    coef, _, rank, _ = np.linalg.lstsq(A, t, rcond=None)
    if rank < A.shape[1]:
        raise FitError(f"degenerate design matrix for {model.value} (rank {rank})")
    resid = t - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res <= 1e-12 * max(1.0, float(t @ t)) else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return FitResult(model, [float(c) for c in coef], r2, pts)


def _run_one(task) -> ExperimentRecord:
    n, s, budget_multiplier, scheme, sample, m, scenario, total = task
    rec = ExperimentRecord(
        scenario=scenario, scheme=scheme.value, a=sample.a, total_marked=total,
        m=m, sample=sample.index, seed=sample.seed,
    )
    if s > m:
        rec.status = "skipped"
        return rec
    try:
        dims = HypercubeDims(n)
        oracle = OracleSpec(sample.marked, s)
        coin = make_coin_spec(scheme, dims, oracle.k, m)
        budget = default_budget(dims, m, oracle.k, budget_multiplier)
        start = time.perf_counter()
        result = run_walk(dims, coin, oracle, budget)
        rec.wall_s = time.perf_counter() - start
    except Exception:
        log.exception("walk failed: scheme=%s a=%d sample=%d m=%d", scheme.value, sample.a, sample.index, m)
        rec.status = "failed"
        return rec
    rec.p_max, rec.t_max, rec.t_peak = result.p_max, result.t_max, result.t_peak
    return rec


def run_scenario(
    spec: ScenarioSpec,
    schemes: Sequence,
    m_values: Sequence[int],
    dims: HypercubeDims,
    s: int = 1,
    budget_multiplier: float = 3.0,
    jobs: int = 1,
    samples: Sequence[MarkedSample] | None = None,
) -> list[ExperimentRecord]:
    """One record per (scheme, group, sample, m), in that nesting order.

    Combinations with ``s > m`` come back as ``status="skipped"`` rows and
    walks that raise as ``status="failed"``; neither aborts the sweep.
    """
    schemes = [WeightScheme.parse(x) for x in schemes]
    if not m_values:
        raise ValueError("empty m range")
    if samples is None:
        samples = generate_groups(spec, dims)
    tasks = [
        (dims.n, s, budget_multiplier, scheme, sample, m, spec.kind.value, sample.total)
        for scheme in schemes
        for sample in samples
        for m in m_values
    ]
    skipped = sum(1 for t in tasks if t[1] > t[5])
    if skipped:
        log.info("skipping %d runs with s=%d > m", skipped, s)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    return [_run_one(t) for t in tasks]


def summarize(records: Iterable[ExperimentRecord]) -> list[GroupSummary]:
    """Mean and coefficient of variation of ``p_max`` per (scenario, scheme, total, m)."""
    groups: dict[tuple, list[float]] = defaultdict(list)
    for rec in records:
        if rec.ok and rec.p_max is not None:
            groups[(rec.scenario, rec.scheme, rec.total_marked, rec.m)].append(rec.p_max)
    if not groups:
        raise ValueError("no successful records to summarize")
    out = []
    for key in sorted(groups):
        ps = np.array(groups[key])
        mean = float(ps.mean())
        cv = None
        if ps.size >= 2 and mean > 0:
            cv = 100.0 * float(ps.std(ddof=1)) / mean
        out.append(GroupSummary(*key, mean_p=mean, cv_percent=cv, n_samples=int(ps.size)))
    by_group: dict[tuple, list[GroupSummary]] = defaultdict(list)
    for summ in out:
        by_group[(summ.scenario, summ.scheme, summ.total_marked)].append(summ)
    for members in by_group.values():
        _pick_best(members).is_best = True
    return out


def _pick_best(members: Sequence[GroupSummary]) -> GroupSummary:
    top = round(max(s.mean_p for s in members), BEST_M_DECIMALS)
    tied = [s for s in members if round(s.mean_p, BEST_M_DECIMALS) == top]
    return min(tied, key=lambda s: s.m)


def best_m(summaries: Iterable[GroupSummary], scheme, total_marked: int, scenario=None) -> tuple[int, float]:
    """``(m, mean_p)`` maximizing the mean success probability of one group.

    Means equal to three decimals count as ties and the smaller ``m`` wins.
    """
    scheme = WeightScheme.parse(scheme).value
    members = [
        s for s in summaries
        if s.scheme == scheme and s.total_marked == total_marked
        and (scenario is None or s.scenario == str(scenario))
    ]
    if not members:
        raise KeyError(f"no summaries for scheme={scheme} total_marked={total_marked}")
    best = _pick_best(members)
    return best.m, best.mean_p


def fit_records(records: Iterable[ExperimentRecord], model=FitModel.LOG_M, quantity: str = "t_peak") -> list[FitResult]:
    """LOG_M fit per (scenario, scheme, total) of the sample-mean ``quantity`` against ``m``."""
    model = FitModel(model)
    if model is not FitModel.LOG_M:
        raise ValueError("fit_records only covers log_m; use fit_across_n for sqrt_dim")
    groups: dict[tuple, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for rec in records:
        value = getattr(rec, quantity)
        if rec.ok and value is not None:
            groups[(rec.scenario, rec.scheme, rec.total_marked)][rec.m].append(value)
    fits = []
    for (scenario, scheme, total), per_m in sorted(groups.items()):
        points = [(m, float(np.mean(v))) for m, v in sorted(per_m.items())]
        try:
            fit = fit_scaling(points, model)
        except FitError as exc:
            log.warning("no %s fit for %s/%s/%d: %s", model.value, scenario, scheme, total, exc)
            continue
        fit.meta = {"scenario": scenario, "scheme": scheme, "total_marked": total, "quantity": quantity}
        fits.append(fit)
    return fits


def fit_across_n(
    runs: Sequence[tuple[int, Sequence[ExperimentRecord]]],
    m: int,
    quantity: str = "t_peak",
    x_axis: str = "dim",
) -> list[FitResult]:
    """SQRT_DIM fit per (scenario, scheme, total) over runs at different ``n``.

    ``x_axis="dim"`` uses ``x = (n + m) * 2**n``; ``x_axis="coin"`` uses ``x = n + m``.
    """
    if x_axis not in ("dim", "coin"):
        raise ValueError(f"unknown x axis {x_axis!r}")
    groups: dict[tuple, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for n, records in runs:
        for rec in records:
            value = getattr(rec, quantity)
            if rec.ok and rec.m == m and value is not None:
                groups[(rec.scenario, rec.scheme, rec.total_marked)][n].append(value)
    fits = []
    for (scenario, scheme, total), per_n in sorted(groups.items()):
        points = []
        for n, values in sorted(per_n.items()):
            x = (n + m) * (1 << n) if x_axis == "dim" else n + m
            points.append((x, float(np.mean(values))))
        try:
            fit = fit_scaling(points, FitModel.SQRT_DIM)
        except FitError as exc:
            log.warning("no sqrt_dim fit for %s/%s/%d: %s", scenario, scheme, total, exc)
            continue
        fit.meta = {
            "scenario": scenario, "scheme": scheme, "total_marked": total,
            "quantity": quantity, "m": m, "x_axis": x_axis,
        }
        fits.append(fit)
    return fits


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` so the file is either complete or absent."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_results_csv(records: Iterable[ExperimentRecord], path) -> None:
    write_atomic(path, _csv_text(RESULTS_HEADER, (r.csv_row() for r in records)))


def read_results_csv(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        return [ExperimentRecord.from_csv_row(row) for row in csv.DictReader(fh)]


def write_summary_csv(summaries: Iterable[GroupSummary], path) -> None:
    write_atomic(path, _csv_text(SUMMARY_HEADER, (s.csv_row() for s in summaries)))


def write_fits_json(fits: Iterable[FitResult], path) -> None:
    write_atomic(path, json.dumps([f.to_json() for f in fits], indent=2) + "\n")


def write_records_json(records: Iterable[ExperimentRecord], path) -> None:
    write_atomic(path, json.dumps([asdict(r) for r in records], indent=1) + "\n")
