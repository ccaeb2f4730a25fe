"""Initial node placement by downsampling the stacked data polyline."""

from __future__ import annotations

import heapq
from enum import Enum

import numpy as np

from .trajectory import StackedData

__all__ = [
    "InitMethod",
    "naive_downsample",
    "distance_downsample",
    "douglas_peucker_downsample",
    "initialize",
]


class InitMethod(str, Enum):
    NAIVE = "naive"
    DISTANCE = "distance"
    DOUGLAS_PEUCKER = "douglas_peucker"

    @classmethod
    def parse(cls, value) -> "InitMethod":
        if isinstance(value, cls):
            return value
        aliases = {"dp": cls.DOUGLAS_PEUCKER, "douglaspeucker": cls.DOUGLAS_PEUCKER}
        key = str(value).strip().lower().replace("-", "_")
        if key in aliases:
            return aliases[key]
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown initialization {value!r}; choose naive, distance or dp"
            ) from None


def _points(data) -> np.ndarray:
    if isinstance(data, StackedData):
        return data.points
    pts = np.asarray(data, dtype=float)
    return pts[:, None] if pts.ndim == 1 else pts


def _check_count(n_nodes: int, n_points: int) -> None:
    if n_nodes < 2:
        raise ValueError(f"need at least 2 nodes, got {n_nodes}")
    if n_nodes > n_points:
        raise ValueError(f"cannot place {n_nodes} nodes on {n_points} data points")


def naive_downsample(data: StackedData, n_nodes: int) -> np.ndarray:
    """Take every ``(M - 1) / (N - 1)``-th point, rounding half up.

    Both endpoints are always included.
    """
    pts = _points(data)
    M = pts.shape[0]
    _check_count(n_nodes, M)
    idx = np.floor(np.arange(n_nodes) * (M - 1) / (n_nodes - 1) + 0.5).astype(int)
    idx[-1] = M - 1
    return pts[idx].copy()


def distance_downsample(data: StackedData, n_nodes: int) -> np.ndarray:
    """Pick points spaced ``L / (N - 1)`` apart in arc length along the data polyline.

    Each arc-length target snaps to the last data point at or before it, so
    the output consists of original data points. When two targets would snap
    to the same point the later one moves to the next sample.
    """
    pts = _points(data)
    M = pts.shape[0]
    _check_count(n_nodes, M)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)])
    L = s[-1]
    if not L > 0:
        raise ValueError("data polyline has zero length; all points coincide")
    targets = np.arange(n_nodes) * (L / (n_nodes - 1))
    # slack absorbs round-off in the cumulative sum
    idx = np.searchsorted(s, targets + 1e-9 * L, side="right") - 1
    idx = np.clip(idx, 0, M - 1)
    # colliding targets advance to the next unused sample, leaving room for the rest
    room = M - n_nodes + np.arange(n_nodes)
    idx[0] = 0
    for k in range(1, n_nodes):
        idx[k] = min(max(idx[k], idx[k - 1] + 1), room[k])
    return pts[idx].copy()


def _farthest(pts: np.ndarray, lo: int, hi: int) -> tuple[float, int]:
    """Largest distance from ``pts[lo+1:hi]`` to the segment ``pts[lo]``-``pts[hi]``."""
    inner = pts[lo + 1 : hi]
    a, b = pts[lo], pts[hi]
    ab = b - a
    denom = float(ab @ ab)
    rel = inner - a
    if denom > 0:
        t = np.clip(rel @ ab / denom, 0.0, 1.0)
        rel = rel - t[:, None] * ab
    dist = np.sqrt(np.einsum("ij,ij->i", rel, rel))
    k = int(np.argmax(dist))  # first maximum: earliest index
    return float(dist[k]), lo + 1 + k


def douglas_peucker_downsample(data: StackedData, n_nodes: int) -> np.ndarray:
    """Greedy Douglas-Peucker refinement driven to exactly ``n_nodes`` nodes.

    Starts from the two endpoints and repeatedly inserts the data point
    farthest from the current polyline (ties go to the earliest index).
    """
    pts = _points(data)
    M = pts.shape[0]
    _check_count(n_nodes, M)
    n_distinct = np.unique(pts, axis=0).shape[0]
    if n_nodes > n_distinct:
        raise ValueError(f"cannot place {n_nodes} nodes on {n_distinct} distinct data points")

    chosen = [0, M - 1]
    heap: list[tuple[float, int, int, int]] = []

    def push(lo: int, hi: int) -> None:
        if hi - lo > 1:
            dist, k = _farthest(pts, lo, hi)
            heapq.heappush(heap, (-dist, k, lo, hi))

    push(0, M - 1)
    while len(chosen) < n_nodes:
        _, k, lo, hi = heapq.heappop(heap)
        chosen.append(k)
        push(lo, k)
        push(k, hi)
    return pts[np.sort(chosen)].copy()


_DISPATCH = {
    InitMethod.NAIVE: naive_downsample,
    InitMethod.DISTANCE: distance_downsample,
    InitMethod.DOUGLAS_PEUCKER: douglas_peucker_downsample,
}


def initialize(data: StackedData, n_nodes: int, method="distance") -> np.ndarray:
    return _DISPATCH[InitMethod.parse(method)](data, n_nodes)
