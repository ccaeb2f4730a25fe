"""Polyline elastic map and its approximation, stretching, and bending energies."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectory import StackedData

__all__ = [
    "ElasticMap",
    "Clustering",
    "approximation_energy",
    "stretching_energy",
    "bending_energy",
    "total_energy",
]


@dataclass(frozen=True, eq=False)
class ElasticMap:
    """A chain of ``N`` nodes with constant stretching (``lam``) and bending (``mu``) stiffness.

    Edges join consecutive nodes and ribs join consecutive triples, so
    neither is stored.
    """

    nodes: np.ndarray
    lam: float = 0.01
    mu: float = 0.001

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        if nodes.ndim != 2 or nodes.shape[0] < 2:
            raise ValueError(f"an elastic map needs at least 2 nodes, got shape {nodes.shape}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("node coordinates must be finite")
        if not (self.lam >= 0 and self.mu >= 0):
            raise ValueError(f"stiffness must be non-negative (lam={self.lam}, mu={self.mu})")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_edges(self) -> int:
        return self.n_nodes - 1

    @property
    def n_ribs(self) -> int:
        return max(self.n_nodes - 2, 0)

    def with_nodes(self, nodes) -> "ElasticMap":
        return ElasticMap(nodes, self.lam, self.mu)


@dataclass(frozen=True, eq=False)
class Clustering:
    """Node index assigned to every data point."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.intp).copy()
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    def __len__(self) -> int:
        return self.assignment.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Clustering):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    __hash__ = None

    def sizes(self, n_nodes: int) -> np.ndarray:
        return np.bincount(self.assignment, minlength=n_nodes)


def approximation_energy(emap: ElasticMap, data: StackedData, clusters: Clustering) -> float:
    """Weighted squared distance from each data point to its cluster's node, over ``data.normalizer``."""
    if len(clusters) != len(data):
        raise ValueError(f"{len(clusters)} cluster labels for {len(data)} data points")
    b = data.normalizer
    diff = data.points - emap.nodes[clusters.assignment]
    return float(np.dot(data.weights, np.einsum("ij,ij->i", diff, diff)) / b)


def stretching_energy(emap: ElasticMap) -> float:
    edges = np.diff(emap.nodes, axis=0)
    return emap.lam * float(np.sum(edges * edges))


def bending_energy(emap: ElasticMap) -> float:
    if emap.n_nodes < 3:
        return 0.0
    y = emap.nodes
    ribs = y[:-2] - 2.0 * y[1:-1] + y[2:]
    return emap.mu * float(np.sum(ribs * ribs))


def total_energy(emap: ElasticMap, data: StackedData, clusters: Clustering) -> float:
    return approximation_energy(emap, data, clusters) + stretching_energy(emap) + bending_energy(emap)
