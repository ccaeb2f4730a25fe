"""Bundled synthetic demonstration shapes and a loader for LASA-style CSV exports."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .trajectory import DemonstrationSet, Trajectory, load_csv

__all__ = ["SHAPES", "shape", "bundled_corpus", "load_lasa"]


def _min_jerk(t: np.ndarray) -> np.ndarray:
    # hand-like speed profile: zero velocity and acceleration at both ends
    return 10 * t**3 - 15 * t**4 + 6 * t**5


def _along(vertices: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Points at normalized arc lengths ``s`` along a polyline."""
    seg = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    return np.column_stack([np.interp(s, cum, vertices[:, k]) for k in range(vertices.shape[1])])


def _line(t):
    return _along(np.array([[0.0, 0.0], [4.0, 3.0]]), _min_jerk(t))


def _s_curve(t):
    theta = 3.0 * np.pi * (_min_jerk(t) - 0.5)
    return np.column_stack([np.sin(theta), np.sign(theta) * (np.cos(theta) - 1.0)])


def _square_wave(t):
    verts = [[0.0, 0.0]]
    for k in range(2):
        x = 2.0 * k
        verts += [[x, 1.0], [x + 1.0, 1.0], [x + 1.0, 0.0], [x + 2.0, 0.0]]
    return _along(np.array(verts), _min_jerk(t))


def _spiral(t):
    theta = 0.5 + 3.5 * np.pi * _min_jerk(t)
    r = 0.25 * theta
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def _corner_l(t):
    return _along(np.array([[0.0, 3.0], [0.0, 0.0], [3.0, 0.0]]), _min_jerk(t))


SHAPES = {
    "line": _line,
    "s_curve": _s_curve,
    "square_wave": _square_wave,
    "spiral": _spiral,
    "corner_l": _corner_l,
}


def shape(name: str, n_points: int = 1000) -> Trajectory:
    """One bundled 2-D demonstration sampled at ``n_points`` timesteps."""
    try:
        gen = SHAPES[name]
    except KeyError:
        raise ValueError(f"unknown shape {name!r}; available: {', '.join(SHAPES)}") from None
    return Trajectory(gen(np.linspace(0.0, 1.0, n_points)))


def bundled_corpus(n_points: int = 1000) -> dict[str, DemonstrationSet]:
    """The five bundled shapes, one demonstration each."""
    return {name: DemonstrationSet((shape(name, n_points),)) for name in SHAPES}


def load_lasa(root: str | Path, max_demos: int | None = None) -> dict[str, DemonstrationSet]:
    """Load a LASA-style CSV export: one subdirectory per shape, one CSV per demonstration.

    Demonstrations within a shape are resampled to a common length.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"{root} is not a directory")
    corpus = {}
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        files = sorted(sub.glob("*.csv"))
        if max_demos is not None:
            files = files[:max_demos]
        if files:
            corpus[sub.name] = DemonstrationSet.from_arrays([load_csv(f) for f in files])
    if not corpus:
        raise ValueError(f"{root}: no shape directories with CSV demonstrations")
    return corpus
