"""End-to-end reproduction: weights, constraints, initialization, EM fit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .initialization import InitMethod, initialize
from .solver import FitOptions, FitReport, fit
from .trajectory import DemonstrationSet, StackedData
from .weights import Constraint, WeightScheme, apply_constraints, seed_constraint_nodes, weighted_data

__all__ = ["Reproduction", "prepare_data", "reproduce"]


@dataclass
class Reproduction:
    nodes: np.ndarray
    report: FitReport
    data: StackedData


def prepare_data(
    demos: DemonstrationSet,
    weighting="curvature",
    constraints: Sequence[Constraint] = (),
    h: float = 1.0,
) -> StackedData:
    data = weighted_data(demos, WeightScheme.parse(weighting), h)
    return apply_constraints(data, list(constraints))


def reproduce(
    demos: DemonstrationSet,
    n_nodes: int = 100,
    lam: float = 0.01,
    mu: float = 0.001,
    init="distance",
    weighting="curvature",
    constraints: Sequence[Constraint] = (),
    tol: float = 1e-8,
    max_iter: int = 200,
) -> Reproduction:
    """Fit an elastic map to ``demos`` and return its nodes as the reproduction.

    Initialization runs on the unconstrained stacked data; each constraint
    then takes over the initial node nearest its progress along the data.
    """
    if not isinstance(demos, DemonstrationSet):
        demos = DemonstrationSet(tuple(demos))
    base = prepare_data(demos, weighting)
    init_nodes = initialize(base, n_nodes, InitMethod.parse(init))
    constraints = list(constraints)
    data = apply_constraints(base, constraints)
    if constraints:
        init_nodes = seed_constraint_nodes(init_nodes, constraints, len(base))
    nodes, report = fit(data, init_nodes, lam, mu, FitOptions(tol=tol, max_iter=max_iter))
    return Reproduction(nodes=nodes, report=report, data=data)
