"""Error-bound tables: the fractal family converges to its germ as the operator
order grows, at rates controlled by moduli of continuity.

The quantum schedule uses q_n = (2/pi) arctan(n) -> 1; the scaling functions
stay FIXED (sup norm 0.99995 here), yet the sup error still decays because the
base operator image approaches the germ.  The classical (q = 1) family obeys
three progressively sharper bounds for smoother germs.
"""

import pathlib

import numpy as np

from mkzfractal import Partition, ScalingVector
from mkzfractal.analysis import classical_bound_tables, convergence_to_csv, quantum_bound_table
from mkzfractal.svgplot import polyline_plot

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

partition = Partition(np.arange(8) / 7.0)
alpha = ScalingVector.sigmoids([1.0] * 7, partition.interval, rate=10.0)

rows = quantum_bound_table(np.sin, partition, alpha, range(3, 51), grid_size=1751, tol=1e-8)
convergence_to_csv(rows, OUT / "quantum_convergence.csv")
print("quantum family, fixed near-1 scalings:")
for r in rows[::12]:
    print(f"  n = {r.n:2d}  q_n = {r.q:.4f}  sup error = {r.sup_error:8.4f}  bound = {r.bound:10.1f}")
print(f"  all {len(rows)} rows satisfied: {all(r.satisfied for r in rows)}")
polyline_plot(OUT / "quantum_convergence.svg",
              [("sup error", [r.n for r in rows], [r.sup_error for r in rows])],
              "sup error of the quantum family", xlabel="n")

alpha_c = ScalingVector.constants([0.5] * 7, partition.interval)
tables = classical_bound_tables(np.sin, np.cos, partition, alpha_c, range(4, 65, 4),
                                hoelder=(1.0, 1.0), grid_size=1051, tol=1e-8)
print("classical family, constant scalings 0.5:")
for name, rows_c in tables.items():
    print(f"  {name:8s}: all satisfied = {all(r.satisfied for r in rows_c)}")
    convergence_to_csv(rows_c, OUT / f"classical_{name}.csv")
last = tables["c1"][-1]
print(f"  derivative-based bound at n = {last.n}: error {last.sup_error:.5f} <= {last.bound:.5f}")
