"""Fractal monomial bases x^lambda and density experiments on [0, 1].

A density run fits a target by least squares in the span of
{1, (x^{l_1})^alpha_n, ..., (x^{l_m})^alpha_n} for growing m, with the
operator order n and the deformation q tied to m through configurable rules.
Divergent-sum exponent sequences (sum l_i/(l_i^2+1) = inf) should drive the
residual down; lacunary (convergent-sum) sequences plateau above them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .fractal import FractalSpec, Partition, ScalingVector, solve_fixed_point, solve_lp_fixed_point
from .grid import GridFunction
from .operators import IntegralBase, QuantumBase


def default_n_rule(m: int) -> int:
    return 5 * m


def arctan_q_rule(n: int) -> float:
    return (2.0 / math.pi) * math.atan(float(n))


# ---------------------------------------------------------------------------
# exponent sequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LambdaSequence:
    """Strictly positive distinct exponents with an optional closed-form tag.

    Convergence of sum lambda_i/(lambda_i^2 + 1) cannot be decided from a
    finite prefix, so classification is analytic for tagged families
    ('harmonic-like' growth, 'geometric' growth) and 'undetermined' otherwise.
    """

    exponents: tuple
    tag: str | None = None  # 'harmonic-like' | 'geometric' | None

    def __post_init__(self):
        exps = tuple(float(v) for v in self.exponents)
        if any(v <= 0 for v in exps):
            raise ValueError("exponents must be strictly positive")
        if len(set(exps)) != len(exps):
            raise ValueError("exponents must be distinct")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def integers(cls, count: int) -> "LambdaSequence":
        return cls(tuple(float(i) for i in range(1, count + 1)), tag="harmonic-like")

    @classmethod
    def powers_of_two(cls, count: int) -> "LambdaSequence":
        return cls(tuple(float(2**i) for i in range(1, count + 1)), tag="geometric")

    def partial_sums(self, p: float | None = None, count: int | None = None) -> np.ndarray:
        lam = np.asarray(self.exponents[: count or len(self.exponents)])
        shifted = lam if p is None else lam + 1.0 / p
        return np.cumsum(shifted / (shifted**2 + 1.0))


def classify_lambda(lambdas: LambdaSequence, p: float | None = None) -> str:
    """'divergent-sum' / 'convergent-sum' for tagged families, else 'undetermined'."""
    if p is not None and p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if lambdas.tag == "harmonic-like":
        return "divergent-sum"
    if lambdas.tag == "geometric":
        return "convergent-sum"
    return "undetermined"


# ---------------------------------------------------------------------------
# fractal monomials and least squares
# ---------------------------------------------------------------------------


def fractal_monomial(lam: float, partition: Partition, alpha: ScalingVector, base,
                     grid_size: int = 1501, tol: float = 1e-9) -> GridFunction:
    """The fractal image of x^lam (lam = 0 gives the constant 1) on [0, 1]."""
    iv = partition.interval
    if abs(iv.left) > 1e-12 or abs(iv.right - 1.0) > 1e-12:
        raise ValueError("Muntz monomials live on [0, 1]")
    if lam < 0:
        raise ValueError(f"exponent must be >= 0, got {lam}")
    germ = (lambda x: np.ones_like(np.asarray(x, dtype=float))) if lam == 0 else (lambda x: np.asarray(x, dtype=float) ** lam)
    spec = FractalSpec.build(germ, partition, alpha, base, grid_size, tol=tol)
    if isinstance(base, IntegralBase):
        return solve_lp_fixed_point(spec, p=2.0)
    return solve_fixed_point(spec)


@dataclass
class MuntzFit:
    coefficients: np.ndarray
    residual_sup: float
    residual_l2: float
    condition: float
    rank_warning: bool = False
    extra_points: np.ndarray = field(default_factory=lambda: np.empty(0))


def least_squares_fit(target: GridFunction, basis: list[GridFunction],
                      extra_sup_points: np.ndarray | None = None) -> MuntzFit:
    """Grid L^2 fit of the target in the basis span via column-normalized QR.

    Near-collinear Muntz columns trigger a rank warning at condition 1e12 and
    fall back to the least-norm solution.  The sup residual is additionally
    evaluated at any extra reporting points (e.g. a geometric cluster near 0).
    """
    if len(basis) > 40:
        raise ValueError("basis size capped at 40")
    if not basis:
        return MuntzFit(np.empty(0), target.sup_norm(), target.lp_norm(2.0), 1.0)
    for b in basis:
        target._same_grid(b)
    design = np.column_stack([b.values for b in basis])
    scale = np.linalg.norm(design, axis=0)
    scale[scale == 0.0] = 1.0
    scaled = design / scale
    q_mat, r_mat = np.linalg.qr(scaled)
    rdiag = np.abs(np.diag(r_mat))
    condition = float(rdiag.max() / rdiag.min()) if rdiag.min() > 0 else np.inf
    rank_warning = condition > 1e12
    if rank_warning:
        warnings.warn(
            f"near-collinear Muntz basis (condition estimate {condition:.2e}); using least-norm fit",
            RuntimeWarning,
        )
        coef_scaled, *_ = np.linalg.lstsq(scaled, target.values, rcond=None)
    else:
        coef_scaled = np.linalg.solve(r_mat, q_mat.T @ target.values)
    coef = coef_scaled / scale
    fit_vals = design @ coef
    resid = target.values - fit_vals
    resid_sup = float(np.max(np.abs(resid)))
    if extra_sup_points is not None and extra_sup_points.size:
        extra_fit = np.zeros(extra_sup_points.size)
        for c, b in zip(coef, basis):
            extra_fit += c * b(extra_sup_points)
        resid_sup = max(resid_sup, float(np.max(np.abs(target(extra_sup_points) - extra_fit))))
    resid_l2 = float(GridFunction(target.interval, resid).lp_norm(2.0))
    return MuntzFit(coef, resid_sup, resid_l2, condition, rank_warning)


def cluster_points(smallest_octave: int = 40) -> np.ndarray:
    """Geometric reporting cluster {2^-j} near 0 for low-exponent monomials."""
    return np.array([2.0**-j for j in range(1, smallest_octave + 1)])


# ---------------------------------------------------------------------------
# density experiment
# ---------------------------------------------------------------------------


@dataclass
class DensityRow:
    m: int
    n: int
    q: float
    lambda_class: str
    residual_sup: float
    residual_l2: float


def density_rows_to_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("m,n,q,lambda_class,residual_sup,residual_lp\n")
        for r in rows:
            fh.write(f"{r.m},{r.n},{r.q!r},{r.lambda_class},{r.residual_sup!r},{r.residual_l2!r}\n")


def density_experiment(
    target_fn,
    lambdas: LambdaSequence,
    m_values,
    partition: Partition,
    alpha: ScalingVector,
    n_rule=default_n_rule,
    q_rule=arctan_q_rule,
    grid_size: int = 1501,
    tol: float = 1e-9,
    lp: float | None = None,
) -> list[DensityRow]:
    """Fit the target with growing fractal Muntz bases and record the residuals.

    With lp set, the basis is built from the integral operator and solved in
    L^p; otherwise the quantum operator at q = q_rule(n_rule(m)) is used.
    """
    label = classify_lambda(lambdas, lp)
    iv = partition.interval
    extra = cluster_points()
    extra = extra[(extra > iv.left) & (extra < iv.right)]
    rows = []
    for m in m_values:
        if m > len(lambdas.exponents):
            raise ValueError(f"m={m} exceeds the provided exponent prefix")
        n = n_rule(m)
        q = q_rule(n)
        base = IntegralBase(n) if lp is not None else QuantumBase(n, q)
        basis = [fractal_monomial(0.0, partition, alpha, base, grid_size, tol)]
        for lam in lambdas.exponents[:m]:
            basis.append(fractal_monomial(lam, partition, alpha, base, grid_size, tol))
        target = GridFunction.from_callable(target_fn, iv, basis[0].size)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fit = least_squares_fit(target, basis, extra_sup_points=extra)
        rows.append(DensityRow(m, n, q, label, fit.residual_sup, fit.residual_l2))
    return rows
