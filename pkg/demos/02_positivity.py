"""Positivity-preserving scaling brackets.

For a non-negative germ, per-interval brackets on the scaling functions
guarantee the solved fractal function stays non-negative.  Scalings inside the
bracket keep the minimum at 1 here; scalings violating it are flagged by the
validator (their fixed point happens to remain positive for this germ, whose
range sits well above zero).
"""

import math
import pathlib

import numpy as np

from mkzfractal import FractalSpec, Partition, QuantumBase, ScalingVector, solve_fixed_point
from mkzfractal.constraints import positivity_bounds, sample_admissible, validate_alpha
from mkzfractal.svgplot import polyline_plot

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

q2 = (2.0 / math.pi) * math.atan(2.0)
partition = Partition([0.0, 1 / 3, 2 / 3, 1.0])
alpha = ScalingVector.sigmoids([0.1298, 0.100, 0.2168], partition.interval, rate=10.0)
spec = FractalSpec.build(lambda x: np.sin(np.pi * x) + 1.0, partition, alpha,
                         QuantumBase(2, q2), grid_size=1501, tol=1e-10)

bounds = positivity_bounds(spec.germ, spec)
bounds.to_csv(OUT / "positivity_bounds.csv")
print("per-interval brackets:")
for i in range(bounds.n_intervals):
    print(f"  interval {i + 1}: [{bounds.lo[i]:+.4f}, {bounds.hi[i]:+.4f}]")

print("compliant scalings admissible:", validate_alpha(alpha, bounds).ok)
solved = solve_fixed_point(spec)
print(f"solved minimum: {np.min(solved.values):.6f} (stays >= 0)")

bad = ScalingVector.constants([0.7, -0.9, 0.9], partition.interval)
report = validate_alpha(bad, bounds)
print("violating scalings admissible:", report.ok, "- failing intervals:", report.failing_intervals())

rng = np.random.default_rng(7)
worst = min(
    float(np.min(solve_fixed_point(
        FractalSpec(spec.germ, partition, sample_admissible(bounds, rng, partition.interval),
                    spec.base, tol=1e-9)).values))
    for _ in range(10)
)
print(f"10 random in-bracket scalings: worst minimum = {worst:.6f}")

polyline_plot(OUT / "positivity.svg",
              [("germ", solved.xs(), spec.germ.values), ("fractal", solved.xs(), solved.values)],
              "positive fractal approximation of sin(pi x) + 1")
print(f"wrote {OUT}/positivity.svg")
