"""Affine interval maps, scaling functions, and the Read-Bajraktarevic fixed point.

The fractal perturbation of a germ f is the fixed point of

    (Tg)(x) = f(x) + alpha_i(u_i^{-1}(x)) * (g - b)(u_i^{-1}(x)),   x in u_i(I),

where b is an MKZ operator image of f.  On the solver grid T is an affine map
g -> A g + (f - A b) whose matrix A has two interpolation entries per row, so
the fixed point can be obtained either by Picard iteration (contraction factor
sup|alpha|) or, when that factor sits close to 1, by a direct sparse solve of
(I - A) g = f - A b.  Both paths satisfy the same residual contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import GridFunction, IntervalSpec, grid_points
from .operators import ClassicalBase, IntegralBase, QuantumBase, mkz_base_gridfn

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


class NonContractionError(ValueError):
    """Scaling functions too large for the requested solve."""


class NonConvergenceError(RuntimeError):
    """Residual still above tolerance when the iteration budget ran out."""


# ---------------------------------------------------------------------------
# partition and affine maps
# ---------------------------------------------------------------------------


class Partition:
    """Strictly increasing node vector x_1 < ... < x_N with N >= 3."""

    __slots__ = ("nodes",)

    def __init__(self, nodes):
        nodes = np.ascontiguousarray(nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("partition needs at least 3 nodes (2 subintervals)")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("partition nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    def __setattr__(self, name, value):
        raise AttributeError("Partition is read-only")

    @property
    def interval(self) -> IntervalSpec:
        return IntervalSpec(float(self.nodes[0]), float(self.nodes[-1]))

    @property
    def n_intervals(self) -> int:
        return self.nodes.size - 1

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.nodes, other.nodes)


@dataclass(frozen=True)
class AffineMaps:
    """Per-interval contractions u_i(x) = a_i x + b_i mapping I onto I_i."""

    partition: Partition
    slopes: np.ndarray
    offsets: np.ndarray

    def apply(self, i: int, x):
        return self.slopes[i] * np.asarray(x, dtype=float) + self.offsets[i]

    def invert(self, i: int, y):
        return (np.asarray(y, dtype=float) - self.offsets[i]) / self.slopes[i]


def build_maps(partition: Partition) -> AffineMaps:
    """Solve the endpoint conditions u_i(x1) = x_i, u_i(xN) = x_{i+1} per interval."""
    nodes = partition.nodes
    x1, xn = nodes[0], nodes[-1]
    width = xn - x1
    slopes = np.diff(nodes) / width
    offsets = (xn * nodes[:-1] - x1 * nodes[1:]) / width
    return AffineMaps(partition, slopes, offsets)


# ---------------------------------------------------------------------------
# scaling functions
# ---------------------------------------------------------------------------


class ScalingFunction:
    """One interval's scaling function: constant, logistic ramp, or tabulated."""

    __slots__ = ("kind", "c", "rate", "table")

    def __init__(self, kind, c=0.0, rate=0.0, table=None):
        if kind not in ("constant", "sigmoid", "table"):
            raise ValueError(f"unknown scaling kind {kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "c", float(c))
        object.__setattr__(self, "rate", float(rate))
        object.__setattr__(self, "table", table)

    def __setattr__(self, name, value):
        raise AttributeError("ScalingFunction is read-only")

    @classmethod
    def constant(cls, c: float) -> "ScalingFunction":
        return cls("constant", c=c)

    @classmethod
    def sigmoid(cls, c: float, rate: float = 10.0) -> "ScalingFunction":
        """c / (1 + exp(-rate * x))."""
        return cls("sigmoid", c=c, rate=rate)

    @classmethod
    def from_samples(cls, table: GridFunction) -> "ScalingFunction":
        return cls("table", table=table)

    def __call__(self, x):
        if self.kind == "constant":
            return np.full_like(np.asarray(x, dtype=float), self.c)
        if self.kind == "sigmoid":
            return self.c / (1.0 + np.exp(-self.rate * np.asarray(x, dtype=float)))
        return self.table(x)

    def sup_norm(self, interval: IntervalSpec) -> float:
        if self.kind == "constant":
            return abs(self.c)
        if self.kind == "sigmoid":  # monotone in x, extremes at the endpoints
            ends = self(np.array([interval.left, interval.right]))
            return float(np.max(np.abs(ends)))
        return self.table.sup_norm()


class ScalingVector:
    """Scaling functions alpha_1..alpha_{N-1}, one per partition interval."""

    __slots__ = ("functions", "interval", "sup_norms")

    def __init__(self, functions, interval: IntervalSpec):
        functions = tuple(functions)
        if not functions:
            raise ValueError("need at least one scaling function")
        object.__setattr__(self, "functions", functions)
        object.__setattr__(self, "interval", interval)
        object.__setattr__(
            self, "sup_norms", np.array([fn.sup_norm(interval) for fn in functions])
        )

    def __setattr__(self, name, value):
        raise AttributeError("ScalingVector is read-only")

    @classmethod
    def constants(cls, values, interval: IntervalSpec) -> "ScalingVector":
        return cls([ScalingFunction.constant(v) for v in values], interval)

    @classmethod
    def sigmoids(cls, coeffs, interval: IntervalSpec, rate: float = 10.0) -> "ScalingVector":
        return cls([ScalingFunction.sigmoid(c, rate) for c in coeffs], interval)

    def __len__(self) -> int:
        return len(self.functions)

    @property
    def sup_norm(self) -> float:
        return float(np.max(self.sup_norms))


# ---------------------------------------------------------------------------
# fractal specification
# ---------------------------------------------------------------------------


def snap_grid_size(partition: Partition, requested: int, search: int = 8192) -> int:
    """Smallest M >= requested whose uniform grid hits every partition node.

    A node is hit when its normalized position times (M - 1) is an integer to
    within 1e-9.  Partitions incommensurate with any nearby uniform grid are
    rejected rather than silently misplaced.
    """
    iv = partition.interval
    rel = (partition.nodes - iv.left) / iv.width
    for m in range(max(requested, 3), max(requested, 3) + search):
        pos = rel * (m - 1)
        if np.all(np.abs(pos - np.rint(pos)) < 1e-9):
            return m
    raise ValueError(
        "no uniform grid of size in "
        f"[{requested}, {requested + search}) contains all partition nodes; "
        "use rational nodes or adjust grid_size"
    )


@dataclass
class FractalSpec:
    """Everything defining one fractal function solve."""

    germ: GridFunction
    partition: Partition
    alpha: ScalingVector
    base: QuantumBase | ClassicalBase | IntegralBase
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    _base_fn: GridFunction | None = field(default=None, repr=False, compare=False)
    _structure: "_RbStructure | None" = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.alpha) != self.partition.n_intervals:
            raise ValueError(
                f"{len(self.alpha)} scaling functions for {self.partition.n_intervals} intervals"
            )
        if self.germ.interval != self.partition.interval:
            raise ValueError("germ and partition must share the interval")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        node_pos = (self.partition.nodes - self.germ.interval.left) / self.germ.step
        if np.max(np.abs(node_pos - np.rint(node_pos))) > 1e-6:
            raise ValueError("solver grid must contain every partition node; see snap_grid_size")

    @classmethod
    def build(
        cls,
        germ_fn,
        partition: Partition,
        alpha: ScalingVector,
        base,
        grid_size: int = 4375,
        tol: float = DEFAULT_TOL,
        max_iter: int = DEFAULT_MAX_ITER,
    ) -> "FractalSpec":
        """Sample a callable germ on a node-aligned uniform grid."""
        size = snap_grid_size(partition, grid_size)
        germ = GridFunction.from_callable(germ_fn, partition.interval, size)
        return cls(germ, partition, alpha, base, tol=tol, max_iter=max_iter)

    @property
    def grid_size(self) -> int:
        return self.germ.size

    def base_gridfn(self) -> GridFunction:
        """Operator image of the germ on the solver grid (computed once, cached)."""
        if self._base_fn is None:
            self._base_fn = mkz_base_gridfn(self.germ, self.base)
        return self._base_fn

    def node_indices(self) -> np.ndarray:
        pos = (self.partition.nodes - self.germ.interval.left) / self.germ.step
        return np.rint(pos).astype(np.int64)


# ---------------------------------------------------------------------------
# RB operator on the grid
# ---------------------------------------------------------------------------


@dataclass
class _RbStructure:
    """Grid realization of x -> u_i^{-1}(x): interval index, pullback point, interpolation."""

    interval_idx: np.ndarray
    xi: np.ndarray
    i0: np.ndarray
    w: np.ndarray
    alpha_at_xi: np.ndarray
    node_idx: np.ndarray

    def pull_back(self, values: np.ndarray) -> np.ndarray:
        return values[self.i0] * (1.0 - self.w) + values[self.i0 + 1] * self.w


def _build_structure(spec: FractalSpec) -> _RbStructure:
    iv = spec.germ.interval
    size = spec.grid_size
    xs = grid_points(iv, size)
    node_idx = spec.node_indices()
    maps = build_maps(spec.partition)

    # left-closed interval assignment; the last interval is closed on both ends
    j = np.arange(size)
    interval_idx = np.clip(np.searchsorted(node_idx, j, side="right") - 1, 0, len(spec.alpha) - 1)

    xi = (xs - maps.offsets[interval_idx]) / maps.slopes[interval_idx]
    xi[node_idx[:-1]] = iv.left   # u_i^{-1}(x_i) = x_1 exactly
    xi[-1] = iv.right             # last point belongs to the closed last interval
    np.clip(xi, iv.left, iv.right, out=xi)

    m = size - 1
    pos = np.clip((xi - iv.left) * (m / iv.width), 0.0, float(m))
    i0 = np.minimum(pos.astype(np.int64), m - 1)
    w = pos - i0
    # pin the endpoint pullbacks so node values propagate bitwise
    at_left = xi == iv.left
    i0[at_left], w[at_left] = 0, 0.0
    at_right = xi == iv.right
    i0[at_right], w[at_right] = m - 1, 1.0

    alpha_at_xi = np.empty(size)
    for i, fn in enumerate(spec.alpha.functions):
        mask = interval_idx == i
        alpha_at_xi[mask] = fn(xi[mask])

    return _RbStructure(interval_idx, xi, i0, w, alpha_at_xi, node_idx)


def _structure(spec: FractalSpec) -> _RbStructure:
    if spec._structure is None:
        spec._structure = _build_structure(spec)
    return spec._structure


def rb_apply(g: GridFunction, spec: FractalSpec, base: GridFunction | None = None) -> GridFunction:
    """One application of the RB operator to g on the solver grid."""
    if g.size != spec.grid_size or g.interval != spec.germ.interval:
        raise ValueError("g must live on the spec's solver grid")
    base = spec.base_gridfn() if base is None else base
    st = _structure(spec)
    out = spec.germ.values + st.alpha_at_xi * (st.pull_back(g.values) - st.pull_back(base.values))
    return GridFunction(spec.germ.interval, out)


@dataclass
class FixedPointInfo:
    method: str
    iterations: int
    residuals: list
    final_residual: float
    contraction: float


def _grid_norm(values: np.ndarray, step: float, p: float | None) -> float:
    if p is None:
        return float(np.max(np.abs(values)))
    return float(np.trapezoid(np.abs(values) ** p, dx=step) ** (1.0 / p))


def _direct_solve(spec: FractalSpec, st: _RbStructure, f: np.ndarray, b: np.ndarray) -> np.ndarray:
    size = f.size
    rows = np.repeat(np.arange(size), 2)
    cols = np.column_stack([st.i0, st.i0 + 1]).ravel()
    vals = np.column_stack([st.alpha_at_xi * (1.0 - st.w), st.alpha_at_xi * st.w]).ravel()
    a = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    system = (sp.identity(size, format="csr") - a).tocsc()
    lu = spla.splu(system)
    rhs = f - a @ b
    g = lu.solve(rhs)
    g += lu.solve(rhs - g + a @ g)  # one round of iterative refinement
    g[st.node_idx] = f[st.node_idx]
    return g


def _solve(spec: FractalSpec, contraction: float, p: float | None, method: str, return_info: bool):
    if contraction >= 1.0:
        raise NonContractionError(
            f"contraction factor {contraction:.6f} >= 1; the RB operator is not a contraction"
        )
    st = _structure(spec)
    f = spec.germ.values
    b = spec.base_gridfn().values
    b_pull = st.pull_back(b)
    step = spec.germ.step

    def apply_once(values: np.ndarray) -> np.ndarray:
        return f + st.alpha_at_xi * (st.pull_back(values) - b_pull)

    g = f.copy()
    g1 = apply_once(g)
    r1 = _grid_norm(g1 - g, step, p)

    if contraction > 0.0 and r1 > spec.tol:
        planned = int(math.ceil(math.log(spec.tol / r1) / math.log(contraction))) + 2
    else:
        planned = 1

    if method == "auto":
        method = "direct" if planned > spec.max_iter else "iterate"

    if method == "direct":
        g = _direct_solve(spec, st, f, b)
        resid = _grid_norm(apply_once(g) - g, step, p)
        if resid > spec.tol:
            raise NonConvergenceError(
                f"direct solve residual {resid:.3e} exceeds tol {spec.tol:.1e}"
            )
        result = GridFunction(spec.germ.interval, g)
        info = FixedPointInfo("direct", 1, [resid], resid, contraction)
        return (result, info) if return_info else result

    residuals = [r1]
    g = g1
    iterations = 1
    budget = min(spec.max_iter, max(planned, 1))
    while residuals[-1] > spec.tol:
        if iterations >= budget:
            raise NonConvergenceError(
                f"residual {residuals[-1]:.3e} above tol {spec.tol:.1e} "
                f"after {iterations} iterations (contraction {contraction:.4f})"
            )
        g_next = apply_once(g)
        residuals.append(_grid_norm(g_next - g, step, p))
        g = g_next
        iterations += 1
    result = GridFunction(spec.germ.interval, g)
    info = FixedPointInfo("iterate", iterations, residuals, residuals[-1], contraction)
    return (result, info) if return_info else result


def solve_fixed_point(spec: FractalSpec, method: str = "auto", return_info: bool = False):
    """Uniform-norm fixed point of the RB operator; interpolates the germ at the nodes.

    Picard iteration from g_0 = germ is used when the a-priori iteration count
    fits the budget; otherwise the equivalent sparse linear system is solved
    directly.  Either way the returned function satisfies
    sup |T g - g| <= spec.tol on the grid.
    """
    if isinstance(spec.base, IntegralBase):
        raise ValueError(
            "integral base does not satisfy the endpoint conditions; use solve_lp_fixed_point"
        )
    return _solve(spec, spec.alpha.sup_norm, None, method, return_info)


def lp_contraction_factor(spec: FractalSpec, p: float) -> float:
    """(sum_i a_i ||alpha_i||_inf^p)^(1/p), the L^p Lipschitz constant of T."""
    if p < 1:
        raise ValueError(
            f"p must be >= 1 (the operator theory is not well-defined below p = 1), got {p}"
        )
    slopes = build_maps(spec.partition).slopes
    return float(np.sum(slopes * spec.alpha.sup_norms**p) ** (1.0 / p))


def solve_lp_fixed_point(spec: FractalSpec, p: float, method: str = "auto", return_info: bool = False):
    """L^p fixed point (integral base); convergence measured in the grid L^p norm."""
    if not isinstance(spec.base, IntegralBase):
        raise ValueError("solve_lp_fixed_point requires an integral base operator")
    lam = lp_contraction_factor(spec, p)
    if lam >= 1.0:
        raise NonContractionError(f"L^p contraction factor {lam:.6f} >= 1")
    return _solve(spec, lam, float(p), method, return_info)


# ---------------------------------------------------------------------------
# graph-point export (deterministic IFS refinement)
# ---------------------------------------------------------------------------


def graph_points(spec: FractalSpec, solved: GridFunction, min_points: int = 100_000):
    """Refine the solved grid graph through the IFS maps until >= min_points points.

    Each round maps every current graph point (x, y) to (u_i(x), f(u_i(x)) +
    alpha_i(x) (y - b(x))) for all intervals i, so points stay on the attractor
    up to the solver residual.  Output order is deterministic.
    """
    maps = build_maps(spec.partition)
    base = spec.base_gridfn()
    f = spec.germ
    xs = solved.xs()
    ys = solved.values.copy()
    while xs.size < min_points:
        bx = base(xs)
        new_x, new_y = [], []
        for i, fn in enumerate(spec.alpha.functions):
            ux = maps.apply(i, xs)
            new_x.append(ux)
            new_y.append(f(ux) + fn(xs) * (ys - bx))
        xs = np.concatenate(new_x)
        ys = np.concatenate(new_y)
    return xs, ys
