"""Density dichotomy for fractal monomial systems x^lambda on [0, 1].

Exponent sequences with divergent sum lambda_i/(lambda_i^2 + 1) span a dense
set: least-squares residuals against sin(pi x) fall steadily.  Lacunary
(geometric) exponents violate the condition and the residual plateaus.
"""

import pathlib

import numpy as np

from mkzfractal import Partition, ScalingVector
from mkzfractal.muntz import LambdaSequence, density_experiment, density_rows_to_csv
from mkzfractal.svgplot import polyline_plot

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

partition = Partition([0.0, 1 / 3, 2 / 3, 1.0])
alpha = ScalingVector.constants([0.2, 0.2, 0.2], partition.interval)
target = lambda x: np.sin(np.pi * x)

rows_int = density_experiment(target, LambdaSequence.integers(12), range(1, 13),
                              partition, alpha, grid_size=1501)
rows_pow = density_experiment(target, LambdaSequence.powers_of_two(12), range(1, 13),
                              partition, alpha, grid_size=1501)
density_rows_to_csv(rows_int, OUT / "density_integers.csv")
density_rows_to_csv(rows_pow, OUT / "density_powers.csv")

print(f"{'m':>3} {'exponents 1..m':>16} {'exponents 2^1..2^m':>20}")
for a, b in zip(rows_int, rows_pow):
    print(f"{a.m:>3} {a.residual_sup:>16.5f} {b.residual_sup:>20.5f}")
print("divergent-sum exponents approximate; lacunary exponents stall.")

polyline_plot(OUT / "density.svg",
              [("lambda_i = i", [r.m for r in rows_int], [r.residual_sup for r in rows_int]),
               ("lambda_i = 2^i", [r.m for r in rows_pow], [r.residual_sup for r in rows_pow])],
              "sup residual of fractal Muntz fits to sin(pi x)", xlabel="m", ylabel="residual")
print(f"wrote {OUT}/density.svg")
