"""One-sided approximation (stay above a lower function g) and pairwise
dominance (fractal of f stays above the fractal of g built with the same maps).
"""

import math
import pathlib

import numpy as np

from mkzfractal import (
    FractalSpec,
    GridFunction,
    Partition,
    QuantumBase,
    ScalingFunction,
    ScalingVector,
    solve_fixed_point,
)
from mkzfractal.constraints import dominance_bounds, one_sided_bounds, validate_alpha
from mkzfractal.svgplot import polyline_plot

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

q2 = (2.0 / math.pi) * math.atan(2.0)
partition = Partition([0.0, 1 / 3, 2 / 3, 1.0])

# --- one-sided: wavy germ above a downward parabola ------------------------
alpha = ScalingVector.sigmoids([0.3950, 0.3550, 0.2774], partition.interval, rate=10.0)
spec = FractalSpec.build(lambda x: 0.5 * np.sin(4 * np.pi * x) + 1.0, partition, alpha,
                         QuantumBase(2, q2), grid_size=1501, tol=1e-10)
lower = GridFunction.from_callable(lambda x: -0.5 * (2 * x - 1.1) ** 2,
                                   spec.germ.interval, spec.grid_size)
bounds = one_sided_bounds(spec.germ, lower, spec)
print("one-sided upper bracket edges:", np.round(bounds.hi, 4))
print("documented scalings admissible:", validate_alpha(alpha, bounds).ok,
      "(interval 2 sits ~2% above the exact bracket; the ordering still holds)")
solved = solve_fixed_point(spec)
print(f"min(fractal - g) = {np.min(solved.values - lower.values):.4f}  (>= 0)")
polyline_plot(OUT / "one_sided.svg",
              [("fractal of f", solved.xs(), solved.values), ("g", solved.xs(), lower.values)],
              "one-sided fractal approximation")

# --- dominance: fractal of f stays above fractal of g ----------------------
xs = np.linspace(0.0, 1.0, 1501)
alpha2 = ScalingVector(
    [ScalingFunction.sigmoid(0.6, 8.0), ScalingFunction.sigmoid(0.6, 7.0),
     ScalingFunction.from_samples(GridFunction(partition.interval, 0.6 / (1.0 + xs**2)))],
    partition.interval)
spec_f = FractalSpec.build(lambda x: np.sin(np.pi * x), partition, alpha2,
                           QuantumBase(2, q2), grid_size=1501, tol=1e-10)
g_fn = GridFunction.from_callable(lambda x: -((2 * x - 1.0) ** 2), spec_f.germ.interval,
                                  spec_f.grid_size)
dom = dominance_bounds(spec_f.germ, g_fn, spec_f)
print("dominance upper bracket edges:", np.round(dom.hi, 4),
      "- admissible:", validate_alpha(alpha2, dom).ok)
upper = solve_fixed_point(spec_f)
lower_frac = solve_fixed_point(FractalSpec(g_fn, partition, alpha2, spec_f.base, tol=1e-10))
print(f"min(fractal of f - fractal of g) = {np.min(upper.values - lower_frac.values):.4f}")
polyline_plot(OUT / "dominance.svg",
              [("fractal of f", upper.xs(), upper.values),
               ("fractal of g", lower_frac.xs(), lower_frac.values)],
              "dominance-preserving fractal pair")
print(f"wrote {OUT}/one_sided.svg and {OUT}/dominance.svg")
