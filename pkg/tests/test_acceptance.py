"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (the lines are collected into the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import smooth_curve  # noqa: E402
from oracles import (  # noqa: E402
    energy_loops,
    finite_difference_gradient,
    frechet_bruteforce,
    global_minimum,
    random_rotation,
)

from elmap.bench import run_init_weight_grid, run_n_sweep  # noqa: E402
from elmap.corpus import bundled_corpus, shape  # noqa: E402
from elmap.initialization import initialize  # noqa: E402
from elmap.metrics import angular_dissimilarity, curvature_signature, discrete_frechet, total_jerk  # noqa: E402
from elmap.pipeline import reproduce  # noqa: E402
from elmap.solver import assemble, build_matrices, expectation, fit  # noqa: E402
from elmap.trajectory import DemonstrationSet, StackedData, Trajectory  # noqa: E402
from elmap.weights import Constraint  # noqa: E402

SEED = 20240611


def _log_uniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def check_oracle_equivalence(n_instances=50):
    """Fitted energy within 1e-6 relative of a global minimizer on small instances."""
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    gaps = []
    for k in range(n_instances):
        d = 1 + k % 3
        N = int(rng.integers(2, 6))
        M = int(rng.integers(max(N, 4), 13))
        pts = smooth_curve(rng, M, d)
        data = StackedData(pts)
        _, report = fit(data, initialize(data, N, "distance"))
        best = global_minimum(pts, np.ones(M), 0.01, 0.001, N, restarts=5, seed=k)
        gaps.append((report.final_energy - best) / best)
    elapsed = time.perf_counter() - start
    misses = sum(g > 1e-6 for g in gaps)
    ok = misses == 0 and elapsed < 60
    return ok, f"{misses}/{n_instances} above 1e-6, worst relative gap {max(gaps):.3g}, {elapsed:.1f} s"


def check_monotone_descent(n_fits=1000):
    rng = np.random.default_rng(SEED + 2)
    worst = -math.inf
    for _ in range(n_fits):
        d = int(rng.integers(1, 4))
        M = int(rng.integers(5, 60))
        N = int(rng.integers(2, min(M, 15) + 1))
        pts = smooth_curve(rng, M, d, noise=rng.uniform(0, 0.2))
        data = StackedData(pts, rng.uniform(0.1, 2.0, size=M))
        init = initialize(data, N, rng.choice(["naive", "distance"]))
        _, report = fit(data, init, _log_uniform(rng, 1e-4, 1.0), _log_uniform(rng, 1e-5, 1.0))
        if len(report.energy_trace) > 1:
            worst = max(worst, float(np.max(np.diff(report.energy_trace))))
    return worst <= 1e-9, f"{n_fits} fits, largest per-iteration increase {worst:.3g}"


def check_stationarity(n_fits=200):
    rng = np.random.default_rng(SEED + 3)
    worst, checked = 0.0, 0
    for _ in range(n_fits):
        d = int(rng.integers(1, 4))
        M = int(rng.integers(6, 40))
        N = int(rng.integers(2, min(M, 10) + 1))
        pts = smooth_curve(rng, M, d)
        w = rng.uniform(0.1, 2.0, size=M)
        data = StackedData(pts, w)
        lam, mu = _log_uniform(rng, 1e-3, 1.0), _log_uniform(rng, 1e-4, 1.0)
        Y, report = fit(data, initialize(data, N, "distance"), lam, mu)
        if not report.converged:
            continue
        checked += 1
        K = expectation(data, Y)
        C = assemble(data, K, *build_matrices(N, lam, mu)).C
        grad = finite_difference_gradient(lambda Z: energy_loops(Z, pts, w, K.assignment, lam, mu), Y)
        worst = max(worst, float(np.max(np.abs(grad))) / float(np.max(np.abs(C))))
    return checked > 0 and worst <= 1e-4, f"{checked} converged fits, max |grad| / |C|inf = {worst:.3g}"


def check_quadratic_forms(n_trials=100):
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(n_trials):
        N, d = int(rng.integers(2, 21)), int(rng.integers(1, 4))
        lam, mu = _log_uniform(rng, 1e-3, 10), _log_uniform(rng, 1e-3, 10)
        Y = rng.normal(size=(N, d))
        E, S = build_matrices(N, lam, mu)
        ue = lam * sum(float(np.sum((Y[i + 1] - Y[i]) ** 2)) for i in range(N - 1))
        ur = mu * sum(float(np.sum((Y[i] - 2 * Y[i + 1] + Y[i + 2]) ** 2)) for i in range(N - 2))
        for mat, ref in ((E, ue), (S, ur)):
            got = float(np.trace(Y.T @ mat @ Y))
            worst = max(worst, abs(got - ref) / ref if ref else abs(got))
    return worst <= 1e-9, f"{n_trials} node arrays, worst relative mismatch {worst:.3g}"


def check_constraints(n_placements=20):
    rng = np.random.default_rng(SEED + 5)
    names = sorted(bundled_corpus())
    worst = 0.0
    for k in range(n_placements):
        demo = shape(names[k % len(names)], 400)
        pts = demo.points
        diag = float(np.linalg.norm(pts.max(0) - pts.min(0)))
        positions = [0.0, 1.0, *rng.uniform(0.05, 0.95, size=int(rng.integers(1, 3)))]
        cons = []
        for p in positions:
            base = pts[int(round(p * (len(pts) - 1)))]
            cons.append(Constraint(point=base + rng.uniform(-0.05, 0.05, size=2) * diag, position=float(p)))
        N = int(rng.integers(20, 101))
        rep = reproduce(DemonstrationSet((demo,)), n_nodes=N, constraints=cons)
        for c in cons:
            miss = float(np.min(np.linalg.norm(rep.nodes - c.point, axis=1))) / diag
            worst = max(worst, miss)
    return worst <= 1e-3, f"{n_placements} placements, worst distance {worst:.3g} x diagonal"


def check_sweep_trend():
    start = time.perf_counter()
    res = run_n_sweep([DemonstrationSet((shape("s_curve", 1000),))], [5, 10, 25, 50, 100, 200], repeats=3)
    fr = [r.frechet for r in res.rows]
    t = [r.time_s for r in res.rows]
    spread = [r.time_spread for r in res.rows]
    decreasing = all(b < a for a, b in zip(fr, fr[1:]))
    # a drop smaller than the repetition spread of both rows is timing noise
    timing = all(t[k + 1] >= t[k] - (spread[k] + spread[k + 1]) for k in range(len(t) - 1))
    elapsed = time.perf_counter() - start
    detail = "frechet " + ", ".join(f"{v:.3g}" for v in fr) + "; time " + ", ".join(f"{v * 1e3:.1f}ms" for v in t)
    return decreasing and timing and elapsed < 120, detail + f"; {elapsed:.1f} s"


def check_grid_orderings():
    grid = run_init_weight_grid(bundled_corpus(), N=100, lam=0.01, mu=0.001, repeats=3)
    t_dist = grid.column_mean("time_s", init="distance")
    t_dp = grid.column_mean("time_s", init="douglas_peucker")
    f_curv = grid.column_mean("frechet", weighting="curvature")
    f_jerk = grid.column_mean("frechet", weighting="jerk")
    ok = t_dist < t_dp and f_curv <= f_jerk
    return ok, f"time distance {t_dist:.4f}s vs dp {t_dp:.4f}s; frechet curvature {f_curv:.4f} vs jerk {f_jerk:.4f}"


def check_frechet_oracle(n_trials=500):
    rng = np.random.default_rng(SEED + 8)
    mismatches = 0
    for _ in range(n_trials):
        d = int(rng.integers(1, 4))
        P = rng.normal(size=(int(rng.integers(1, 7)), d))
        Q = rng.normal(size=(int(rng.integers(1, 7)), d))
        mismatches += discrete_frechet(P, Q) != frechet_bruteforce(P, Q)
    return mismatches == 0, f"{mismatches}/{n_trials} pairs differ from coupling enumeration"


def check_invariances(n_trials=100):
    rng = np.random.default_rng(SEED + 9)
    rigid = scale = metric = 0.0
    for _ in range(n_trials):
        d = int(rng.integers(2, 4))
        pts = smooth_curve(rng, int(rng.integers(30, 120)), d)
        N = int(rng.integers(3, 20))
        R, t = random_rotation(d, rng), rng.normal(size=d) * 3

        base = reproduce(DemonstrationSet((Trajectory(pts),)), n_nodes=N, init="naive")
        moved = reproduce(DemonstrationSet((Trajectory(pts @ R.T + t),)), n_nodes=N, init="naive")
        span = float(np.linalg.norm(pts.max(0) - pts.min(0)))
        rigid = max(rigid, float(np.max(np.abs(moved.nodes - (base.nodes @ R.T + t)))) / span)

        data = StackedData(pts, rng.uniform(0.1, 2.0, size=len(pts)))
        y0 = initialize(data, N, "distance")
        c = _log_uniform(rng, 1e-3, 1e3)
        Y1, _ = fit(data, y0)
        Y2, _ = fit(data.with_weights(c * data.weights), y0)
        scale = max(scale, float(np.max(np.abs(Y1 - Y2))) / span)

        P, Q = np.cumsum(rng.normal(size=(20, d)), axis=0), np.cumsum(rng.normal(size=(15, d)), axis=0)
        a = angular_dissimilarity(P, Q)
        s = _log_uniform(rng, 1e-2, 1e2)
        jerk = total_jerk(P)
        metric = max(
            metric,
            abs(angular_dissimilarity(P @ R.T + t, Q @ R.T + t) - a),
            abs(angular_dissimilarity(s * P, Q) - a),
            abs(angular_dissimilarity(P, s * Q) - a),
            abs(total_jerk(P + t) - jerk) / jerk,
            float(np.max(np.abs(curvature_signature(P + t) - curvature_signature(P)))),
        )
    ok = max(rigid, scale, metric) <= 1e-8
    return ok, f"{n_trials} trials each; rigid {rigid:.2g}, weight scale {scale:.2g}, metrics {metric:.2g}"


CRITERIA = [
    (1, "oracle equivalence on small instances", check_oracle_equivalence),
    (2, "monotone energy descent", check_monotone_descent),
    (3, "stationarity at fixed clustering", check_stationarity),
    (4, "quadratic-form consistency", check_quadratic_forms),
    (5, "constraint satisfaction", check_constraints),
    (6, "node-count sweep trend", check_sweep_trend),
    (7, "grid orderings", check_grid_orderings),
    (8, "Frechet oracle", check_frechet_oracle),
    (9, "invariance suite", check_invariances),
]


def _line(number, title, ok, detail):
    return f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({detail})"


@pytest.mark.acceptance
@pytest.mark.parametrize("number,title,check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check, acceptance_log):
    ok, detail = check()
    line = _line(number, title, ok, detail)
    print(line)
    acceptance_log.append(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for number, title, check in CRITERIA:
        ok, detail = check()
        failed += not ok
        print(_line(number, title, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
