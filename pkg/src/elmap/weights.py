"""Per-point weighting schemes and constraint insertion."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .trajectory import DemonstrationSet, StackedData, stack

__all__ = [
    "WeightScheme",
    "Constraint",
    "uniform_weights",
    "curvature_weights",
    "jerk_weights",
    "compute_weights",
    "apply_constraints",
    "seed_constraint_nodes",
    "constraints_from_json",
    "WEIGHT_FLOOR",
    "CONSTRAINT_WEIGHT_FACTOR",
]

WEIGHT_FLOOR = 1e-8
CONSTRAINT_WEIGHT_FACTOR = 1e6


class WeightScheme(str, Enum):
    UNIFORM = "uniform"
    CURVATURE = "curvature"
    JERK = "jerk"

    @classmethod
    def parse(cls, value) -> "WeightScheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown weighting {value!r}; choose uniform, curvature or jerk"
            ) from None


def uniform_weights(M: int, h: float = 1.0) -> np.ndarray:
    if not 0 < h <= 1:
        raise ValueError(f"uniform weight h must lie in (0, 1], got {h}")
    return np.full(M, float(h))


def _as_demos(demos) -> DemonstrationSet:
    return demos if isinstance(demos, DemonstrationSet) else DemonstrationSet(tuple(demos))


def _stencil_weights(demos: DemonstrationSet, stencil: Sequence[float]) -> np.ndarray:
    arr = demos.as_array()  # (m, T, d)
    T = arr.shape[1]
    width = len(stencil)
    half = width // 2
    if T < width:
        raise ValueError(f"stencil of width {width} needs T >= {width}, got T = {T}")
    raw = sum(c * arr[:, k : T - width + 1 + k] for k, c in enumerate(stencil))
    mag = np.linalg.norm(raw, axis=2)  # (m, T - 2*half)
    # ends copy the nearest interior value
    mag = np.pad(mag, ((0, 0), (half, half)), mode="edge")
    w = mag.T.reshape(-1)  # stacked (interleaved) order
    peak = w.max()
    floor = WEIGHT_FLOOR * peak if peak > 0 else WEIGHT_FLOOR
    return np.maximum(w, floor)


def curvature_weights(demos: DemonstrationSet) -> np.ndarray:
    """Second-difference magnitude at each point, in stacked order."""
    return _stencil_weights(_as_demos(demos), (1.0, -2.0, 1.0))


def jerk_weights(demos: DemonstrationSet) -> np.ndarray:
    """Magnitude of the ``(-1, 2, 0, -2, 1)`` stencil at each point, in stacked order."""
    return _stencil_weights(_as_demos(demos), (-1.0, 2.0, 0.0, -2.0, 1.0))


def compute_weights(demos: DemonstrationSet, scheme="curvature", h: float = 1.0) -> np.ndarray:
    scheme = WeightScheme.parse(scheme)
    demos = _as_demos(demos)
    if scheme is WeightScheme.UNIFORM:
        return uniform_weights(demos.m * demos.T, h)
    if scheme is WeightScheme.CURVATURE:
        return curvature_weights(demos)
    return jerk_weights(demos)


def weighted_data(demos: DemonstrationSet, scheme="curvature", h: float = 1.0) -> StackedData:
    """Stack ``demos`` and attach weights from ``scheme``."""
    return stack(demos).with_weights(compute_weights(demos, scheme, h))


@dataclass(frozen=True)
class Constraint:
    """A point the reproduction must pass through.

    Exactly one of ``position`` (fractional progress in [0, 1]) or ``index``
    (insertion index into the stacked data) locates it. ``weight=None`` means
    the default, ``1e6`` times the mean data weight.
    """

    point: tuple[float, ...]
    position: float | None = None
    index: int | None = None
    weight: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(float(v) for v in np.atleast_1d(self.point)))
        if (self.position is None) == (self.index is None):
            raise ValueError("a constraint needs exactly one of position or index")
        if self.position is not None and not 0.0 <= self.position <= 1.0:
            raise ValueError(f"constraint position {self.position} outside [0, 1]")
        if self.weight is not None and not (np.isfinite(self.weight) and self.weight > 0):
            raise ValueError(f"constraint weight must be positive and finite, got {self.weight}")
        if not all(np.isfinite(self.point)):
            raise ValueError("constraint point must be finite")

    def insertion_index(self, M: int) -> int:
        if self.index is not None:
            return int(self.index)
        return int(np.floor(self.position * M + 0.5))

    def node_index(self, M: int, n_nodes: int) -> int:
        """Node that starts at this constraint: its fractional progress mapped onto ``n_nodes``."""
        frac = self.position if self.position is not None else self.index / M
        return int(np.floor(min(max(frac, 0.0), 1.0) * (n_nodes - 1) + 0.5))

    def to_json(self) -> dict:
        out: dict = {"point": list(self.point)}
        if self.position is not None:
            out["position"] = self.position
        else:
            out["index"] = self.index
        if self.weight is not None:
            out["weight"] = self.weight
        return out


def constraints_from_json(items) -> list[Constraint]:
    """Parse ``[{position|index, point, weight?}, ...]``."""
    if not isinstance(items, list):
        raise ValueError("constraints must be a JSON list")
    out = []
    for item in items:
        if not isinstance(item, dict) or "point" not in item:
            raise ValueError(f"bad constraint entry: {item!r}")
        unknown = set(item) - {"point", "position", "index", "weight"}
        if unknown:
            raise ValueError(f"unknown constraint fields: {sorted(unknown)}")
        out.append(
            Constraint(
                point=item["point"],
                position=None if item.get("position") is None else float(item["position"]),
                index=None if item.get("index") is None else int(item["index"]),
                weight=None if item.get("weight") is None else float(item["weight"]),
            )
        )
    return out


def apply_constraints(data: StackedData, constraints: Sequence[Constraint]) -> StackedData:
    """Insert each constraint as a new heavily weighted data point.

    Indices refer to the unconstrained data and original points keep their
    relative order. The normalizer stays that of the unconstrained data, so a
    heavy constraint pins its nearest node without diluting the pull of the
    remaining data.
    """
    if not constraints:
        return data
    M = len(data)
    default_weight = CONSTRAINT_WEIGHT_FACTOR * float(data.weights.mean())
    idx, pts, ws = [], [], []
    for c in constraints:
        i = c.insertion_index(M)
        if not 0 <= i <= M:
            raise ValueError(f"constraint index {i} outside [0, {M}]")
        if len(c.point) != data.dim:
            raise ValueError(f"constraint point has dimension {len(c.point)}, data has {data.dim}")
        idx.append(i)
        pts.append(c.point)
        ws.append(default_weight if c.weight is None else c.weight)
    points = np.insert(data.points, idx, np.array(pts), axis=0)
    weights = np.insert(data.weights, idx, np.array(ws))
    return StackedData(points, weights, data.normalizer)


def seed_constraint_nodes(nodes: np.ndarray, constraints: Sequence[Constraint], M: int) -> np.ndarray:
    """Move one initial node onto each constraint point.

    Each constraint claims the node at its fractional progress; when that
    node is taken the nearest free node is used instead. Without this a
    single node can end up owning two nearby constraints and settle between
    them.
    """
    nodes = np.array(nodes, dtype=float)
    n = nodes.shape[0]
    if len(constraints) > n:
        raise ValueError(f"{len(constraints)} constraints need at least as many nodes, got {n}")
    taken: set[int] = set()
    for c in constraints:
        k = c.node_index(M, n)
        free = [j for j in range(n) if j not in taken]
        k = min(free, key=lambda j: (abs(j - k), j))
        taken.add(k)
        nodes[k] = c.point
    return nodes
