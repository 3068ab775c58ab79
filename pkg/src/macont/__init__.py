"""Piecewise-linear manifold approximation sequences for set-valued maps on boxes."""

from .bump import TransitionFunction, c_lambda, lam, make_alpha, theta
from .geometry import Box, Disk, HypothesisError, Interval
from .joint import (RegularityError, SelectionError, SliceConfig, SliceResult, extract_level_set,
                    h_eval, joint, project_drop_j, select_regular_value)
from .mesh import (ApproximationSequence, DimensionError, ManifoldPoint, PLMap, SimplicialManifold,
                   boundary, build_disk_mesh, evaluate)
from .oracles import (ConstantOracle, DiagonalSliceOracle, EmptyOracle, FullOracle, FunctionGraphOracle,
                      PointSetOracle, SetValuedOracle, StepOracle, graph_semidistance)
from .smoothing import (ContinuousFunction, SmoothingSchedule, extend_to_disk, make_sequence,
                        make_step_sequence, mollify)
from .verify import (VerificationReport, check_accumulation_containment, check_boundary_sphere,
                     check_boundedness, check_hypothesis_eq1)

__version__ = "0.1.0"

lambda_ = lam

__all__ = [
    "ApproximationSequence", "Box", "ConstantOracle", "ContinuousFunction", "DiagonalSliceOracle",
    "DimensionError", "Disk", "EmptyOracle", "FullOracle", "FunctionGraphOracle", "HypothesisError",
    "Interval", "ManifoldPoint", "PLMap", "PointSetOracle", "RegularityError", "SelectionError",
    "SetValuedOracle", "SimplicialManifold", "SliceConfig", "SliceResult", "SmoothingSchedule",
    "StepOracle", "TransitionFunction", "VerificationReport", "boundary", "build_disk_mesh", "c_lambda",
    "check_accumulation_containment", "check_boundary_sphere", "check_boundedness", "check_hypothesis_eq1",
    "evaluate", "extend_to_disk", "extract_level_set", "graph_semidistance", "h_eval", "joint", "lam",
    "lambda_", "make_alpha", "make_sequence", "make_step_sequence", "mollify", "project_drop_j",
    "select_regular_value", "theta",
]
