"""Admissible scaling-function brackets for shape-constrained fractal approximation.

Each bracket is a sufficient condition: any scaling vector sampled strictly
inside it (and below 1 in sup norm) makes the solved fractal function inherit
the requested shape property -- non-negativity, one-sided domination of a
lower function g, or domination of the companion fractal g^alpha built with
the same maps, scalings and base order.

Extrema of grid functions are exhaustive scans over the solver grid, so the
returned bounds carry a grid-resolution caveat; shrink by a margin before
sampling scaling vectors from them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fractal import AffineMaps, FractalSpec, ScalingVector, build_maps
from .grid import GridFunction, grid_points
from .operators import mkz_base_gridfn

CONTRACTION_MARGIN = 1e-6  # brackets are intersected with (-1 + eps, 1 - eps)


class PreconditionError(ValueError):
    """Input function violates a theorem hypothesis (sign, ordering, or ceiling)."""


class DegenerateDenominatorError(ValueError):
    """A bracket denominator vanished; the bound formula carries no information."""


@dataclass
class IntervalBounds:
    """Per-interval admissible range [lo_i, hi_i] for the scaling functions."""

    lo: np.ndarray
    hi: np.ndarray
    feasible: np.ndarray
    mode: str
    ceiling: float | None = None
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.feasible = np.asarray(self.feasible, dtype=bool) & (self.lo <= self.hi)

    @property
    def n_intervals(self) -> int:
        return self.lo.size

    def shrunk(self, margin: float = 1e-3) -> "IntervalBounds":
        return IntervalBounds(self.lo + margin, self.hi - margin, self.feasible.copy(),
                              self.mode, self.ceiling, dict(self.labels))

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("interval,lo,hi,feasible\n")
            for i in range(self.n_intervals):
                fh.write(f"{i + 1},{float(self.lo[i])!r},{float(self.hi[i])!r},{bool(self.feasible[i])}\n")


@dataclass(frozen=True)
class Extrema:
    """Grid extrema of f over each map image, plus global extrema of the base image."""

    per_interval_min: np.ndarray   # min over I of f(u_i(x))
    per_interval_max: np.ndarray
    base_min: float                # min over I of the operator image
    base_max: float


def extrema(f: GridFunction, maps: AffineMaps, base: GridFunction) -> Extrema:
    xs = grid_points(f.interval, f.size)
    lo = np.empty(maps.slopes.size)
    hi = np.empty(maps.slopes.size)
    for i in range(maps.slopes.size):
        vals = f(maps.apply(i, xs))
        lo[i], hi[i] = np.min(vals), np.max(vals)
    return Extrema(lo, hi, float(np.min(base.values)), float(np.max(base.values)))


def default_ceiling(ext: Extrema, f_sup: float) -> float:
    """Well-conditioned choice of the positivity ceiling above every required quantity."""
    return max(ext.base_min, ext.base_max, f_sup) * 1.25 + 0.1


def _clip_to_contraction(lo: np.ndarray, hi: np.ndarray):
    np.maximum(lo, -1.0 + CONTRACTION_MARGIN, out=lo)
    np.minimum(hi, 1.0 - CONTRACTION_MARGIN, out=hi)


def positivity_bounds(f: GridFunction, spec: FractalSpec, ceiling: float | None = None) -> IntervalBounds:
    """Bracket guaranteeing a non-negative fractal function for a non-negative germ.

    lo_i = max(-phi_i/(C - phi_b), -(C - Phi_i)/Phi_b),
    hi_i = min(phi_i/Phi_b, (C - Phi_i)/(C - phi_b)),
    with phi_i/Phi_i the germ extrema over the i-th map image, phi_b/Phi_b the
    base-image extrema and C a ceiling strictly above max(phi_b, sup f).
    """
    if np.min(f.values) < 0:
        raise PreconditionError(f"germ must be non-negative on the grid; min = {np.min(f.values):.3e}")
    maps = build_maps(spec.partition)
    base = mkz_base_gridfn(f, spec.base)
    ext = extrema(f, maps, base)
    f_sup = f.sup_norm()
    c = default_ceiling(ext, f_sup) if ceiling is None else float(ceiling)
    if c <= max(ext.base_min, f_sup):
        raise PreconditionError(
            f"ceiling {c} must exceed max(base min, sup|f|) = {max(ext.base_min, f_sup):.6g}"
        )
    n_int = maps.slopes.size
    feasible = np.ones(n_int, dtype=bool)
    if ext.base_max <= 0.0 or c <= ext.base_max:
        # degenerate ratios (f identically zero, or ceiling not above the base image)
        return IntervalBounds(np.full(n_int, np.nan), np.full(n_int, np.nan),
                              np.zeros(n_int, dtype=bool), "positivity", c)
    lo = np.maximum(-ext.per_interval_min / (c - ext.base_min),
                    -(c - ext.per_interval_max) / ext.base_max)
    hi = np.minimum(ext.per_interval_min / ext.base_max,
                    (c - ext.per_interval_max) / (c - ext.base_min))
    _clip_to_contraction(lo, hi)
    return IntervalBounds(lo, hi, feasible, "positivity", c)


def one_sided_bounds(f: GridFunction, g: GridFunction, spec: FractalSpec) -> IntervalBounds:
    """Bracket [0, hi_i] guaranteeing the fractal function of f stays above g."""
    f._same_grid(g)
    diff = f.values - g.values
    if np.min(diff) < 0:
        raise PreconditionError(f"need f >= g on the grid; min(f - g) = {np.min(diff):.3e}")
    maps = build_maps(spec.partition)
    base_f = mkz_base_gridfn(f, spec.base)
    ext = extrema(GridFunction(f.interval, diff), maps, base_f)
    g_min = float(np.min(g.values))
    denom = ext.base_max - g_min  # max of the base image of f minus min of g
    if denom == 0.0:
        raise DegenerateDenominatorError("max base(f) equals min g; one-sided bracket undefined")
    n_int = maps.slopes.size
    lo = np.zeros(n_int)
    hi = np.minimum(ext.per_interval_min / denom, 1.0)
    _clip_to_contraction(lo, hi)
    return IntervalBounds(lo, hi, np.ones(n_int, dtype=bool), "one_sided",
                          labels={"denominator": denom})


def dominance_bounds(f: GridFunction, g: GridFunction, spec: FractalSpec) -> IntervalBounds:
    """Bracket [0, hi_i] guaranteeing f^alpha >= g^alpha for the shared construction."""
    f._same_grid(g)
    diff = f.values - g.values
    if np.min(diff) < 0:
        raise PreconditionError(f"need f >= g on the grid; min(f - g) = {np.min(diff):.3e}")
    maps = build_maps(spec.partition)
    diff_fn = GridFunction(f.interval, diff)
    base_diff = mkz_base_gridfn(diff_fn, spec.base)
    ext = extrema(diff_fn, maps, base_diff)
    if ext.base_max == 0.0:
        # f == g forces alpha == 0: empty-interior bracket [0, 0]
        n_int = maps.slopes.size
        return IntervalBounds(np.zeros(n_int), np.zeros(n_int),
                              np.ones(n_int, dtype=bool), "dominance")
    n_int = maps.slopes.size
    lo = np.zeros(n_int)
    hi = np.minimum(ext.per_interval_min / ext.base_max, 1.0)
    _clip_to_contraction(lo, hi)
    return IntervalBounds(lo, hi, np.ones(n_int, dtype=bool), "dominance",
                          labels={"denominator": ext.base_max})


def double_sequence_bounds(f_k: GridFunction, spec: FractalSpec, k: int,
                           ceiling: float | None = None) -> IntervalBounds:
    """Positivity bracket for the k-th member of a positive germ sequence.

    Structurally the single-germ positivity bracket applied to f_k with its own
    base extrema; the result is tagged with (k, n) for double-sequence sweeps.
    """
    out = positivity_bounds(f_k, spec, ceiling)
    out.mode = "double_sequence"
    out.labels.update({"k": k, "n": spec.base.n})
    return out


@dataclass
class AlphaValidation:
    ok: bool
    per_interval_ok: np.ndarray
    worst_violation: float
    sup_norm: float
    sup_ok: bool

    def failing_intervals(self):
        return [i + 1 for i, good in enumerate(self.per_interval_ok) if not good]


def validate_alpha(alpha: ScalingVector, bounds: IntervalBounds, samples: int = 512) -> AlphaValidation:
    """Sample each scaling function over I and test it against its bracket."""
    if len(alpha) != bounds.n_intervals:
        raise ValueError("scaling vector and bounds disagree on the interval count")
    xs = np.linspace(alpha.interval.left, alpha.interval.right, samples)
    per_ok = np.zeros(bounds.n_intervals, dtype=bool)
    worst = 0.0
    for i, fn in enumerate(alpha.functions):
        vals = fn(xs)
        over = np.max(vals - bounds.hi[i])
        under = np.max(bounds.lo[i] - vals)
        viol = max(over, under, 0.0)
        per_ok[i] = bool(bounds.feasible[i]) and viol == 0.0
        worst = max(worst, viol if bounds.feasible[i] else np.inf)
    sup_ok = alpha.sup_norm < 1.0
    return AlphaValidation(bool(np.all(per_ok)) and sup_ok, per_ok, worst, alpha.sup_norm, sup_ok)


def sample_admissible(bounds: IntervalBounds, rng: np.random.Generator, interval,
                      margin: float = 1e-3) -> ScalingVector:
    """Random constant scaling vector drawn strictly inside the shrunk bracket."""
    inner = bounds.shrunk(margin)
    if not np.all(inner.feasible):
        raise ValueError(f"bracket infeasible after margin {margin}")
    draws = rng.uniform(inner.lo, inner.hi)
    return ScalingVector.constants(draws, interval)
