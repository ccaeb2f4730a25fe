"""Demonstration containers, resampling, and stacking into the solver's data set."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Trajectory",
    "DemonstrationSet",
    "StackedData",
    "resample",
    "stack",
    "load_csv",
    "load_demonstrations",
    "stacked_index",
]


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 1 and ndim == 2:
        arr = arr[:, None]
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-D array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One demonstration: ``T`` ordered points in ``d`` dimensions.

    A 1-D input is treated as ``T`` points of dimension 1.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen_array(self.points, 2)
        if pts.shape[0] < 2:
            raise ValueError("a trajectory needs at least 2 points")
        if pts.shape[1] < 1:
            raise ValueError("a trajectory needs dimension d >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("trajectory contains non-finite values")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True, eq=False)
class DemonstrationSet:
    """``m`` demonstrations sharing ``T`` and ``d``."""

    demos: tuple[Trajectory, ...]

    def __post_init__(self):
        demos = tuple(d if isinstance(d, Trajectory) else Trajectory(d) for d in self.demos)
        if not demos:
            raise ValueError("a demonstration set needs at least one demonstration")
        lengths = {len(d) for d in demos}
        dims = {d.dim for d in demos}
        if len(dims) != 1:
            raise ValueError(f"demonstrations disagree on dimension: {sorted(dims)}")
        if len(lengths) != 1:
            raise ValueError(f"demonstrations disagree on length: {sorted(lengths)}")
        object.__setattr__(self, "demos", demos)

    @classmethod
    def from_arrays(cls, arrays: Iterable, resample_to: int | None = None) -> "DemonstrationSet":
        """Build a set from raw arrays, resampling unequal lengths to the longest.

        Pass ``resample_to`` to force a common length instead.
        """
        trajs = [a if isinstance(a, Trajectory) else Trajectory(a) for a in arrays]
        if not trajs:
            raise ValueError("a demonstration set needs at least one demonstration")
        target = resample_to if resample_to is not None else max(len(t) for t in trajs)
        return cls(tuple(resample(t, target) for t in trajs))

    @property
    def m(self) -> int:
        return len(self.demos)

    @property
    def T(self) -> int:
        return len(self.demos[0])

    @property
    def dim(self) -> int:
        return self.demos[0].dim

    def as_array(self) -> np.ndarray:
        """Demonstrations as an ``(m, T, d)`` array."""
        return np.stack([d.points for d in self.demos])

    def mean(self) -> Trajectory:
        """Pointwise mean demonstration."""
        return Trajectory(self.as_array().mean(axis=0))


@dataclass(frozen=True, eq=False)
class StackedData:
    """Weighted point set ``G`` fed to the solver.

    ``normalizer`` is the total weight ``b`` that divides the approximation
    energy. It defaults to ``weights.sum()``; constrained data keeps the
    normalizer of the data before the constraint points were added.
    """

    points: np.ndarray
    weights: np.ndarray = field(default=None)
    normalizer: float | None = None

    def __post_init__(self):
        pts = _frozen_array(self.points, 2)
        if pts.shape[0] < 1:
            raise ValueError("stacked data is empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("stacked data contains non-finite values")
        w = np.ones(pts.shape[0]) if self.weights is None else self.weights
        w = _frozen_array(w, 1)
        if w.shape[0] != pts.shape[0]:
            raise ValueError(f"{w.shape[0]} weights for {pts.shape[0]} points")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise ValueError("weights must be finite and non-negative")
        if not np.any(w > 0):
            raise ValueError("at least one weight must be positive")
        b = float(w.sum()) if self.normalizer is None else float(self.normalizer)
        if not (np.isfinite(b) and b > 0):
            raise ValueError(f"normalizer must be positive and finite, got {b}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "normalizer", b)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def with_weights(self, weights) -> "StackedData":
        """Same points, new weights, normalizer reset to their sum."""
        return StackedData(self.points, weights)

    def scaled(self, factor: float) -> "StackedData":
        """All weights and the normalizer multiplied by ``factor``."""
        return StackedData(self.points, self.weights * factor, self.normalizer * factor)


def resample(traj: Trajectory, n_points: int) -> Trajectory:
    """Piecewise-linear resampling at uniformly spaced fractional indices.

    The first and last points are kept exactly.
    """
    if n_points < 2:
        raise ValueError(f"cannot resample to {n_points} points; need at least 2")
    if not isinstance(traj, Trajectory):
        traj = Trajectory(traj)
    T = len(traj)
    if n_points == T:
        return traj
    src = np.arange(T, dtype=float)
    dst = np.linspace(0.0, T - 1.0, n_points)
    out = np.column_stack([np.interp(dst, src, traj.points[:, k]) for k in range(traj.dim)])
    out[0] = traj.points[0]
    out[-1] = traj.points[-1]
    return Trajectory(out)


def stack(demos: DemonstrationSet) -> StackedData:
    """Interleave demonstrations in time order: ``x_1^1, x_1^2, ..., x_T^m``."""
    if not isinstance(demos, DemonstrationSet):
        demos = DemonstrationSet(tuple(demos))
    arr = demos.as_array()  # (m, T, d)
    points = arr.transpose(1, 0, 2).reshape(-1, demos.dim)
    return StackedData(points, np.ones(points.shape[0]))


def stacked_index(i: int, m: int) -> tuple[int, int]:
    """Map a stacked index to ``(demo, timestep)``."""
    return i % m, i // m


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path: str | Path) -> Trajectory:
    """Read one demonstration from a CSV file (one row per timestep).

    A non-numeric first row is taken to be a header and skipped.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise ValueError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
    try:
        data = np.array([[float(c) for c in row] for row in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    return Trajectory(data)


def load_demonstrations(paths: Sequence[str | Path], resample_to: int | None = None) -> DemonstrationSet:
    """Load several CSV demonstrations into one set, resampling to a common length."""
    return DemonstrationSet.from_arrays([load_csv(p) for p in paths], resample_to=resample_to)
