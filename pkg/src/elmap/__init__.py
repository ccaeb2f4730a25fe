"""Polyline elastic maps for learning trajectories from demonstration."""

__version__ = "0.1.0"

from .emap import (
    Clustering,
    ElasticMap,
    approximation_energy,
    bending_energy,
    stretching_energy,
    total_energy,
)
from .initialization import (
    InitMethod,
    distance_downsample,
    douglas_peucker_downsample,
    initialize,
    naive_downsample,
)
from .metrics import (
    MetricReport,
    angular_dissimilarity,
    curvature_signature,
    discrete_frechet,
    evaluate,
    frechet_curvature,
    total_jerk,
)
from .pipeline import Reproduction, reproduce
from .solver import FitOptions, FitReport, SolverError, build_matrices, expectation, fit, maximization
from .trajectory import DemonstrationSet, StackedData, Trajectory, load_csv, resample, stack
from .weights import (
    Constraint,
    WeightScheme,
    apply_constraints,
    curvature_weights,
    jerk_weights,
    uniform_weights,
)
