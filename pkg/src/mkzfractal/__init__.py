"""Quantum Meyer-Konig-Zeller fractal functions.

Operator families (quantum / classical / integral MKZ), Read-Bajraktarevic
fixed points on uniform grids, shape-constraint brackets, convergence and
box-dimension verification, and fractal Muntz density experiments.
"""

from .grid import GridFunction, IntervalSpec
from .qcalc import q_binomial, q_factorial, q_integer
from .operators import (
    ClassicalBase,
    IntegralBase,
    MkzWeights,
    QuantumBase,
    SeriesTruncationError,
    eval_classical_mkz,
    eval_integral_mkz,
    eval_quantum_mkz,
    integral_kernel_row,
    mkz_base_gridfn,
    mkz_weights,
)
from .fractal import (
    AffineMaps,
    FractalSpec,
    NonContractionError,
    NonConvergenceError,
    Partition,
    ScalingFunction,
    ScalingVector,
    build_maps,
    graph_points,
    lp_contraction_factor,
    rb_apply,
    snap_grid_size,
    solve_fixed_point,
    solve_lp_fixed_point,
)

__all__ = [
    "GridFunction",
    "IntervalSpec",
    "q_integer",
    "q_factorial",
    "q_binomial",
    "QuantumBase",
    "ClassicalBase",
    "IntegralBase",
    "MkzWeights",
    "SeriesTruncationError",
    "mkz_weights",
    "eval_quantum_mkz",
    "eval_classical_mkz",
    "eval_integral_mkz",
    "integral_kernel_row",
    "mkz_base_gridfn",
    "Partition",
    "AffineMaps",
    "build_maps",
    "ScalingFunction",
    "ScalingVector",
    "FractalSpec",
    "snap_grid_size",
    "rb_apply",
    "solve_fixed_point",
    "solve_lp_fixed_point",
    "lp_contraction_factor",
    "graph_points",
    "NonContractionError",
    "NonConvergenceError",
]

__version__ = "0.1.0"
