"""Benchmark protocols: node-count sweep and initialization x weighting grid."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .initialization import InitMethod, initialize
from .metrics import angular_dissimilarity, discrete_frechet, frechet_curvature, total_jerk
from .pipeline import prepare_data
from .solver import FitOptions, fit
from .trajectory import DemonstrationSet
from .weights import WeightScheme

__all__ = [
    "SweepRow",
    "SweepResult",
    "GridCell",
    "GridResult",
    "timed_reproduction",
    "run_n_sweep",
    "run_init_weight_grid",
    "max_workers",
]

INIT_ORDER = (InitMethod.NAIVE, InitMethod.DISTANCE, InitMethod.DOUGLAS_PEUCKER)
WEIGHT_ORDER = (WeightScheme.UNIFORM, WeightScheme.CURVATURE, WeightScheme.JERK)
GRID_METRICS = ("time_s", "frechet", "angular", "total_jerk")


def max_workers() -> int:
    """Worker cap from ``ELMAP_THREADS`` (default 1: timings stay single-threaded)."""
    raw = os.environ.get("ELMAP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"ELMAP_THREADS must be an integer, got {raw!r}") from None


def _map(fn: Callable, items: Sequence, workers: int | None) -> list:
    workers = max_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def timed_reproduction(
    demos: DemonstrationSet,
    n_nodes: int,
    lam: float,
    mu: float,
    init,
    weighting,
    repeats: int = 3,
) -> tuple[np.ndarray, list[float]]:
    """Run initialization + EM ``repeats`` times; return nodes and per-run wall times.

    Weight computation is excluded from the timing; the reproduction is
    deterministic so the nodes of the last run are returned.
    """
    data = prepare_data(demos, weighting)
    init = InitMethod.parse(init)
    times = []
    nodes = None
    for _ in range(repeats):
        start = time.perf_counter()
        y0 = initialize(data, n_nodes, init)
        nodes, _report = fit(data, y0, lam, mu, FitOptions())
        times.append(time.perf_counter() - start)
    return nodes, times


def _reference(demos: DemonstrationSet) -> np.ndarray:
    return demos.demos[0].points if demos.m == 1 else demos.mean().points


@dataclass
class SweepRow:
    N: int
    time_s: float
    frechet: float
    time_spread: float = 0.0
    failed: int = 0
    errors: list[str] = field(default_factory=list)


@dataclass
class SweepResult:
    rows: list[SweepRow]
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "time_s", "frechet"])
        for r in self.rows:
            w.writerow([r.N, repr(r.time_s), repr(r.frechet)])
        return buf.getvalue()

    def series_csv(self, column: str) -> str:
        """Two-column ``N,<column>`` table for plotting."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", column])
        for r in self.rows:
            w.writerow([r.N, repr(getattr(r, column))])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "rows": [
                {
                    "N": r.N,
                    "time_s": r.time_s,
                    "time_spread": r.time_spread,
                    "frechet": r.frechet,
                    "failed": r.failed,
                    "errors": r.errors,
                }
                for r in self.rows
            ],
        }


def _nanmean(values: list[float]) -> float:
    good = [v for v in values if not math.isnan(v)]
    return float(np.mean(good)) if good else float("nan")


def run_n_sweep(
    corpus: Sequence[DemonstrationSet] | Mapping[str, DemonstrationSet],
    n_values: Sequence[int],
    lam: float = 0.01,
    mu: float = 0.001,
    init="distance",
    weighting="curvature",
    repeats: int = 3,
    workers: int | None = None,
) -> SweepResult:
    """Fit every corpus item at every node count; average median fit time and Frechet.

    Frechet compares the ``N``-node polyline directly with the demonstration
    (the pointwise mean when an item holds several demonstrations).
    """
    items = list(corpus.values()) if isinstance(corpus, Mapping) else list(corpus)
    n_values = [int(n) for n in n_values]
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("node counts must be strictly increasing")

    def run(job):
        n, demos = job
        try:
            nodes, times = timed_reproduction(demos, n, lam, mu, init, weighting, repeats)
            return statistics.median(times), max(times) - min(times), discrete_frechet(nodes, _reference(demos)), None
        except Exception as exc:  # failed cells are reported, not raised
            return math.nan, math.nan, math.nan, f"N={n}: {type(exc).__name__}: {exc}"

    jobs = [(n, d) for n in n_values for d in items]
    results = _map(run, jobs, workers)
    rows = []
    for k, n in enumerate(n_values):
        chunk = results[k * len(items) : (k + 1) * len(items)]
        errors = [r[3] for r in chunk if r[3]]
        rows.append(
            SweepRow(
                N=n,
                time_s=_nanmean([r[0] for r in chunk]),
                time_spread=_nanmean([r[1] for r in chunk]),
                frechet=_nanmean([r[2] for r in chunk]),
                failed=len(errors),
                errors=errors,
            )
        )
    config = {
        "n_values": n_values,
        "lambda": lam,
        "mu": mu,
        "init": InitMethod.parse(init).value,
        "weighting": WeightScheme.parse(weighting).value,
        "repeats": repeats,
        "corpus_size": len(items),
    }
    return SweepResult(rows=rows, config=config)


@dataclass
class GridCell:
    init: str
    weighting: str
    time_s: float
    frechet: float
    frechet_curvature: float
    angular: float
    total_jerk: float
    failed: int = 0
    errors: list[str] = field(default_factory=list)


@dataclass
class GridResult:
    cells: list[GridCell]
    config: dict = field(default_factory=dict)
    normalized: bool = False

    def cell(self, init, weighting) -> GridCell:
        init, weighting = InitMethod.parse(init).value, WeightScheme.parse(weighting).value
        for c in self.cells:
            if c.init == init and c.weighting == weighting:
                return c
        raise KeyError((init, weighting))

    def column_mean(self, metric: str, *, init=None, weighting=None) -> float:
        """Mean of ``metric`` over the cells matching ``init`` and/or ``weighting``."""
        sel = [
            getattr(c, metric)
            for c in self.cells
            if (init is None or c.init == InitMethod.parse(init).value)
            and (weighting is None or c.weighting == WeightScheme.parse(weighting).value)
        ]
        return _nanmean(sel)

    def normalize(self) -> "GridResult":
        """Divide every metric column by its maximum over the grid."""
        cells = []
        cols = GRID_METRICS + ("frechet_curvature",)
        peaks = {m: max((getattr(c, m) for c in self.cells if not math.isnan(getattr(c, m))), default=0.0) for m in cols}
        for c in self.cells:
            values = {m: (getattr(c, m) / peaks[m] if peaks[m] > 0 else getattr(c, m)) for m in cols}
            cells.append(GridCell(init=c.init, weighting=c.weighting, failed=c.failed, errors=list(c.errors), **values))
        return GridResult(cells=cells, config=dict(self.config), normalized=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["init", "weighting", *GRID_METRICS])
        for c in self.cells:
            w.writerow([c.init, c.weighting, *(repr(float(getattr(c, m))) for m in GRID_METRICS)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridResult":
        rows = list(csv.DictReader(io.StringIO(text)))
        cells = [
            GridCell(
                init=r["init"],
                weighting=r["weighting"],
                time_s=float(r["time_s"]),
                frechet=float(r["frechet"]),
                frechet_curvature=math.nan,
                angular=float(r["angular"]),
                total_jerk=float(r["total_jerk"]),
            )
            for r in rows
        ]
        return cls(cells=cells)

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "normalized": self.normalized,
            "cells": [c.__dict__ for c in self.cells],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, allow_nan=True)

    @classmethod
    def from_json(cls, doc: dict) -> "GridResult":
        cells = [GridCell(**c) for c in doc["cells"]]
        return cls(cells=cells, config=doc.get("config", {}), normalized=doc.get("normalized", False))


def run_init_weight_grid(
    corpus: Sequence[DemonstrationSet] | Mapping[str, DemonstrationSet],
    N: int = 100,
    lam: float = 0.01,
    mu: float = 0.001,
    repeats: int = 3,
    workers: int | None = None,
) -> GridResult:
    """Average time and the metrics over the corpus for all nine init x weighting cells."""
    items = list(corpus.values()) if isinstance(corpus, Mapping) else list(corpus)
    if not items:
        raise ValueError("corpus is empty")

    def run(job):
        init, weighting, demos = job
        try:
            nodes, times = timed_reproduction(demos, N, lam, mu, init, weighting, repeats)
            ref = _reference(demos)
            return (
                statistics.median(times),
                discrete_frechet(nodes, ref),
                frechet_curvature(nodes, ref),
                angular_dissimilarity(nodes, ref),
                total_jerk(nodes),
                None,
            )
        except Exception as exc:  # isolate failing cells
            return (math.nan,) * 5 + (f"{init.value}/{weighting.value}: {type(exc).__name__}: {exc}",)

    jobs = [(i, w, d) for i in INIT_ORDER for w in WEIGHT_ORDER for d in items]
    results = _map(run, jobs, workers)
    cells = []
    per_cell = len(items)
    for k, (init, weighting) in enumerate((i, w) for i in INIT_ORDER for w in WEIGHT_ORDER):
        chunk = results[k * per_cell : (k + 1) * per_cell]
        errors = [r[5] for r in chunk if r[5]]
        cells.append(
            GridCell(
                init=init.value,
                weighting=weighting.value,
                time_s=_nanmean([r[0] for r in chunk]),
                frechet=_nanmean([r[1] for r in chunk]),
                frechet_curvature=_nanmean([r[2] for r in chunk]),
                angular=_nanmean([r[3] for r in chunk]),
                total_jerk=_nanmean([r[4] for r in chunk]),
                failed=len(errors),
                errors=errors,
            )
        )
    config = {"N": N, "lambda": lam, "mu": mu, "repeats": repeats, "corpus_size": len(items)}
    return GridResult(cells=cells, config=config)
