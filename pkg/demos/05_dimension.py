"""Box-counting dimension of fractal graphs against the theoretical bounds.

With constant scalings alpha_i on m uniform intervals, gamma = sum |alpha_i|
splits the picture: gamma <= 1 keeps the graph dimension at 1, while gamma > 1
with a Lipschitz germ pins it at 1 + log_m(gamma).
"""

import pathlib

import numpy as np

from mkzfractal import Partition, ScalingVector
from mkzfractal.analysis import dimension_experiment
from mkzfractal.svgplot import polyline_plot

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

thirds = Partition([0.0, 1 / 3, 2 / 3, 1.0])
gentle = ScalingVector.constants([0.2, 0.2, 0.2], thirds.interval)
est = dimension_experiment(np.sin, thirds, gentle, n=10, beta=1.0,
                           grid_size=1501, min_points=150_000)
print(f"gamma = 0.6 <= 1: slope = {est.slope:.3f}, predicted bounds = {est.theorem_bounds}")

quarters = Partition([0.0, 0.25, 0.5, 0.75, 1.0])
rough = ScalingVector.constants([0.5] * 4, quarters.interval)
est2 = dimension_experiment(lambda x: np.sin(np.pi * x), quarters, rough, n=1, beta=1.0,
                            grid_size=2001, min_points=1_000_000)
lo, hi = est2.theorem_bounds
print(f"gamma = 2.0 on 4 intervals: slope = {est2.slope:.3f}, "
      f"predicted dimension = 1 + log_4(2) = {lo}")
est2.to_csv(OUT / "dimension_gamma2.csv")
polyline_plot(OUT / "dimension_gamma2.svg",
              [("log2 N(eps)", np.log2(1 / est2.epsilons), np.log2(est2.counts.astype(float)))],
              f"box counts, fitted slope {est2.slope:.3f}", xlabel="log2(1/eps)")
print(f"wrote {OUT}/dimension_gamma2.csv and .svg")
