"""The integral operator variant and L^p fixed points.

The kernel averages the germ over abutting windows, so it works for merely
integrable germs; contraction is governed by Lambda = (sum a_i |alpha_i|^p)^(1/p),
which can stay below 1 even when some |alpha_i| reach 1.  The solved error is
controlled by Lambda/(1 - Lambda) times the operator's own approximation error.
"""

import pathlib

import numpy as np

from mkzfractal import (
    FractalSpec,
    IntegralBase,
    Partition,
    ScalingVector,
    lp_contraction_factor,
    solve_lp_fixed_point,
)
from mkzfractal.analysis import lp_error_table, lp_rows_to_csv
from mkzfractal.svgplot import polyline_plot

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

partition = Partition([0.0, 1 / 3, 2 / 3, 1.0])
alpha = ScalingVector.constants([0.5, 0.5, 0.5], partition.interval)

spec = FractalSpec.build(lambda x: np.asarray(x, float), partition, alpha,
                         IntegralBase(5), grid_size=1401, tol=1e-9)
print(f"Lambda at p = 2: {lp_contraction_factor(spec, 2.0)} (hand value 0.5)")
try:
    lp_contraction_factor(spec, 0.5)
except ValueError as exc:
    print(f"p = 0.5 rejected: {exc}")

solved = solve_lp_fixed_point(spec, p=2.0)
solved.to_csv(OUT / "lp_fixed_point.csv")

rows = lp_error_table(lambda x: np.asarray(x, float), partition, alpha,
                      p_values=[1.0, 2.0], n_values=range(2, 41), grid_size=1401)
lp_rows_to_csv(rows, OUT / "lp_table.csv")
sel = [r for r in rows if r.p == 2.0]
print(f"{'n':>3} {'L2 error':>10} {'bound':>10}")
for r in sel[::6]:
    print(f"{r.n:>3} {r.lp_error:>10.5f} {r.rhs_bound:>10.5f}")
print(f"all {len(rows)} rows satisfied:", all(r.satisfied for r in rows))
polyline_plot(OUT / "lp_errors.svg",
              [("L2 error", [r.n for r in sel], [r.lp_error for r in sel]),
               ("bound", [r.n for r in sel], [r.rhs_bound for r in sel])],
              "L^2 error of integral-operator fixed points", xlabel="n")
print(f"wrote {OUT}/lp_errors.svg")
