"""Expectation-maximization fit of a polyline elastic map.

The maximization step minimizes the total energy for a fixed clustering,
which is a quadratic in the node array ``Y``. Setting its gradient to zero
gives the banded system ``A Y = C`` with

    A = V / b + E + S,    C_i = sum_{j in K_i} w_j g_j / b,

where ``V`` holds per-cluster weight sums, ``b`` is the total weight, and
``E`` and ``S`` are the stretching and bending stiffness matrices. ``A`` is
symmetric pentadiagonal and is factored with a banded Cholesky solve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, solveh_banded
from scipy.spatial.distance import cdist

from .emap import Clustering, ElasticMap, total_energy
from .trajectory import StackedData

__all__ = [
    "SolverError",
    "SystemMatrices",
    "FitOptions",
    "FitReport",
    "build_matrices",
    "expectation",
    "assemble",
    "maximization",
    "fit",
]

log = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-10


class SolverError(RuntimeError):
    """The maximization system is singular or the solve failed its residual check."""


def _first_difference(n: int) -> np.ndarray:
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0
    D[idx, idx + 1] = 1.0
    return D


def _second_difference(n: int) -> np.ndarray:
    D = np.zeros((max(n - 2, 0), n))
    idx = np.arange(max(n - 2, 0))
    D[idx, idx] = 1.0
    D[idx, idx + 1] = -2.0
    D[idx, idx + 2] = 1.0
    return D


def build_matrices(n_nodes: int, lam: float, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Stretching and bending stiffness matrices for a chain of ``n_nodes``.

    ``E = lam * D1.T @ D1`` and ``S = mu * D2.T @ D2`` where ``D1`` and ``D2``
    are the first- and second-difference operators, so that
    ``trace(Y.T @ E @ Y)`` is the stretching energy and ``E @ Y`` is half its
    gradient (likewise for ``S`` and the bending energy).

    Returns
    -------
    E : ndarray, shape (N, N)
        Tridiagonal, diagonal ``lam * (1, 2, ..., 2, 1)``, off-diagonal ``-lam``.
    S : ndarray, shape (N, N)
        Pentadiagonal, interior rows ``mu * (1, -4, 6, -4, 1)``.
    """
    if n_nodes < 2:
        raise ValueError(f"need at least 2 nodes, got {n_nodes}")
    if lam < 0 or mu < 0:
        raise ValueError(f"stiffness must be non-negative (lam={lam}, mu={mu})")
    D1 = _first_difference(n_nodes)
    D2 = _second_difference(n_nodes)
    return lam * (D1.T @ D1), mu * (D2.T @ D2)


@dataclass(frozen=True, eq=False)
class SystemMatrices:
    E: np.ndarray
    S: np.ndarray
    V: np.ndarray
    A: np.ndarray
    C: np.ndarray
    b: float


def expectation(data: StackedData, nodes: np.ndarray) -> Clustering:
    """Assign each data point to its nearest node, ties to the lowest node index."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim == 1:
        nodes = nodes[:, None]
    if len(data) == 0 or nodes.shape[0] == 0:
        raise ValueError("expectation needs nonempty data and nodes")
    d2 = cdist(data.points, nodes, "sqeuclidean")
    return Clustering(np.argmin(d2, axis=1))


def assemble(data: StackedData, clusters: Clustering, E: np.ndarray, S: np.ndarray) -> SystemMatrices:
    n = E.shape[0]
    b = data.normalizer
    v = np.bincount(clusters.assignment, weights=data.weights, minlength=n)
    C = np.zeros((n, data.dim))
    np.add.at(C, clusters.assignment, data.weights[:, None] * data.points)
    C /= b
    V = np.diag(v)
    return SystemMatrices(E=E, S=S, V=V, A=V / b + E + S, C=C, b=b)


def _upper_bands(A: np.ndarray, bandwidth: int) -> np.ndarray:
    """Upper bands of a symmetric matrix in LAPACK ``solveh_banded`` layout."""
    n = A.shape[0]
    ab = np.zeros((bandwidth + 1, n))
    for k in range(bandwidth + 1):
        ab[bandwidth - k, k:] = np.diagonal(A, k)
    return ab


def solve_system(A: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Solve ``A Y = C`` for symmetric positive definite pentadiagonal ``A``."""
    bandwidth = min(2, A.shape[0] - 1)
    try:
        Y = solveh_banded(_upper_bands(A, bandwidth), C, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise SolverError(f"system matrix is not positive definite: {exc}") from None
    if not np.all(np.isfinite(Y)):
        raise SolverError("linear solve produced non-finite node positions")
    resid = np.max(np.abs(A @ Y - C)) if C.size else 0.0
    scale = np.max(np.abs(C)) if C.size else 0.0
    if resid > RESIDUAL_RTOL * scale:
        raise SolverError(f"linear solve residual {resid:.3e} exceeds {RESIDUAL_RTOL:g} * |C| = {RESIDUAL_RTOL * scale:.3e}")
    return Y


def maximization(data: StackedData, clusters: Clustering, E: np.ndarray, S: np.ndarray) -> np.ndarray:
    """Exact minimizer of the total energy over node positions for a fixed clustering."""
    system = assemble(data, clusters, E, S)
    return solve_system(system.A, system.C)


@dataclass
class FitOptions:
    """``tol`` is relative to the data bounding-box diagonal."""

    tol: float = 1e-8
    max_iter: int = 200


@dataclass
class FitReport:
    iterations: int = 0
    energy_trace: list[float] = field(default_factory=list)
    max_node_displacement_trace: list[float] = field(default_factory=list)
    cluster_sizes: list[int] = field(default_factory=list)
    converged: bool = False
    cycle_detected: bool = False

    @property
    def final_energy(self) -> float:
        return self.energy_trace[-1] if self.energy_trace else float("nan")

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "energies": list(self.energy_trace),
            "final_energy": self.final_energy,
            "max_node_displacement": list(self.max_node_displacement_trace),
            "cluster_sizes": list(self.cluster_sizes),
            "converged": self.converged,
            "cycle_detected": self.cycle_detected,
        }


def data_scale(data: StackedData) -> float:
    """Diagonal of the data bounding box."""
    return float(np.linalg.norm(data.points.max(axis=0) - data.points.min(axis=0)))


def fit(
    data: StackedData,
    init_nodes: np.ndarray,
    lam: float = 0.01,
    mu: float = 0.001,
    opts: FitOptions | None = None,
) -> tuple[np.ndarray, FitReport]:
    """Alternate nearest-node clustering and the exact banded solve until nodes stop moving.

    Parameters
    ----------
    data : StackedData
        Weighted data points (constraints already inserted).
    init_nodes : array_like, shape (N, d)
        Initial node placement.
    lam, mu : float
        Stretching and bending stiffness, both non-negative.
    opts : FitOptions, optional
        Convergence tolerance (relative to the data bounding-box diagonal)
        and iteration cap.

    Returns
    -------
    nodes : ndarray, shape (N, d)
    report : FitReport
        ``energy_trace[k]`` is the total energy after iteration ``k + 1``,
        evaluated with the nearest-node clustering of the new nodes.

    Notes
    -----
    Reaching ``max_iter`` sets ``converged=False``. If the clustering starts
    alternating between two states the loop stops at the lower-energy one
    and reports convergence.
    """
    opts = opts or FitOptions()
    Y = np.array(init_nodes, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape[1] != data.dim:
        raise ValueError(f"nodes have dimension {Y.shape[1]}, data has {data.dim}")
    emap = ElasticMap(Y, lam, mu)
    E, S = build_matrices(emap.n_nodes, emap.lam, emap.mu)
    tol = opts.tol * max(data_scale(data), np.finfo(float).tiny)

    report = FitReport()
    clusters = expectation(data, Y)
    history: list[tuple[Clustering, np.ndarray, float]] = []
    while report.iterations < opts.max_iter:
        Y_new = maximization(data, clusters, E, S)
        new_clusters = expectation(data, Y_new)
        energy = total_energy(emap.with_nodes(Y_new), data, new_clusters)
        shift = float(np.max(np.linalg.norm(Y_new - Y, axis=1)))
        report.iterations += 1
        report.energy_trace.append(energy)
        report.max_node_displacement_trace.append(shift)
        report.cluster_sizes = new_clusters.sizes(emap.n_nodes).tolist()
        Y = Y_new
        if shift < tol:
            report.converged = True
            break
        if len(history) >= 2 and new_clusters == history[-2][0] and new_clusters != clusters:
            # two-state cycle: keep whichever state has the lower energy
            prev_clusters, prev_Y, prev_energy = history[-1]
            if prev_energy < energy:
                Y, new_clusters = prev_Y, prev_clusters
                report.energy_trace.append(prev_energy)
                report.max_node_displacement_trace.append(0.0)
                report.iterations += 1
                report.cluster_sizes = prev_clusters.sizes(emap.n_nodes).tolist()
            report.converged = True
            report.cycle_detected = True
            log.debug("EM clustering cycle detected after %d iterations", report.iterations)
            break
        history.append((new_clusters, Y_new, energy))
        history = history[-2:]
        clusters = new_clusters
    return Y, report
