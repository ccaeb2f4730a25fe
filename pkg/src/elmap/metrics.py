"""Similarity and smoothness measures for reproductions."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .trajectory import Trajectory, resample

__all__ = [
    "MetricReport",
    "discrete_frechet",
    "curvature_signature",
    "frechet_curvature",
    "angular_dissimilarity",
    "total_jerk",
    "evaluate",
]


def _as_points(P) -> np.ndarray:
    if isinstance(P, Trajectory):
        return P.points
    arr = np.asarray(P, dtype=float)
    return arr[:, None] if arr.ndim == 1 else arr


def discrete_frechet(P, Q) -> float:
    """Discrete Frechet distance by the Eiter-Mannila dynamic program.

    >>> discrete_frechet([[0, 0], [1, 1], [2, 0]], [[0, 1], [2, -4]])
    4.0
    """
    P, Q = _as_points(P), _as_points(Q)
    if len(P) == 0 or len(Q) == 0:
        raise ValueError("discrete Frechet distance needs nonempty inputs")
    # math.dist is correctly rounded, so results are exact up to one rounding per pair
    Pl, Ql = P.tolist(), Q.tolist()
    dist = [[math.dist(a, b) for b in Ql] for a in Pl]
    p, q = len(dist), len(dist[0])
    prev = [0.0] * q
    row = dist[0]
    acc = row[0]
    for j in range(q):
        acc = max(acc, row[j])
        prev[j] = acc
    for i in range(1, p):
        row = dist[i]
        cur = [0.0] * q
        cur[0] = max(prev[0], row[0])
        for j in range(1, q):
            best = min(prev[j], cur[j - 1], prev[j - 1])
            d = row[j]
            cur[j] = best if best > d else d
        prev = cur
    return float(prev[-1])


def curvature_signature(P) -> np.ndarray:
    """Second-difference magnitude at every interior point (length ``len(P) - 2``)."""
    P = _as_points(P)
    if len(P) < 3:
        raise ValueError("curvature signature needs at least 3 points")
    return np.linalg.norm(P[:-2] - 2.0 * P[1:-1] + P[2:], axis=1)


def frechet_curvature(P, Q) -> float:
    return discrete_frechet(curvature_signature(P), curvature_signature(Q))


def angular_dissimilarity(P, Q, n_samples: int = 100) -> float:
    """Mean of ``(1 - cos theta) / 2`` over corresponding segment directions.

    Both inputs are resampled to ``n_samples`` points first. A zero-length
    segment in either input repeats the previous segment's value.
    """
    P = resample(Trajectory(_as_points(P)), n_samples).points
    Q = resample(Trajectory(_as_points(Q)), n_samples).points
    if P.shape[1] != Q.shape[1]:
        raise ValueError("trajectories differ in dimension")
    dp, dq = np.diff(P, axis=0), np.diff(Q, axis=0)
    norm_p = np.linalg.norm(dp, axis=1)
    norm_q = np.linalg.norm(dq, axis=1)
    values = np.empty(len(dp))
    last = 0.0
    for k in range(len(dp)):
        if norm_p[k] > 0 and norm_q[k] > 0:
            cos = float(dp[k] @ dq[k]) / (norm_p[k] * norm_q[k])
            last = (1.0 - min(1.0, max(-1.0, cos))) / 2.0
        values[k] = last
    return float(values.mean())


def total_jerk(P) -> float:
    """Sum of third-difference magnitudes, stencil ``(-1, 3, -3, 1)``."""
    P = _as_points(P)
    if len(P) < 4:
        raise ValueError("total jerk needs at least 4 points")
    third = -P[:-3] + 3.0 * P[1:-2] - 3.0 * P[2:-1] + P[3:]
    return float(np.linalg.norm(third, axis=1).sum())


@dataclass
class MetricReport:
    frechet: float
    frechet_curvature: float
    angular: float
    total_jerk: float
    compute_time: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)


def evaluate(reproduction, demonstration, compute_time: float = 0.0) -> MetricReport:
    """Score ``reproduction`` against ``demonstration``.

    Total jerk is a property of the reproduction alone.
    """
    return MetricReport(
        frechet=discrete_frechet(reproduction, demonstration),
        frechet_curvature=frechet_curvature(reproduction, demonstration),
        angular=angular_dissimilarity(reproduction, demonstration),
        total_jerk=total_jerk(reproduction),
        compute_time=compute_time,
    )
