"""Meyer-Konig-Zeller operator families.

Three variants share the same series skeleton:

* quantum   M[n,q] f(x) = P(t) * sum_k qbinom(n+k, k) t^k f(node_k),
  t the normalized abscissa, P(t) = prod_{j=0..n} (1 - q^j t), nodes at
  [k]_q / [k+n]_q; the value at the right endpoint is assigned to f(xN).
* classical q = 1 specialization: weights become the negative-binomial mass
  binom(n+k, k) t^k (1-t)^(n+1) with nodes k/(k+n).
* integral  variant on [0, 1] for the L^p theory: sum_k m_k(x) Int_{I_k} f,
  m_k(x) = (n+1) binom(k+n+1, k) x^k (1-x)^n over the abutting intervals
  I_k = [k/(k+n), (k+1)/(k+n+1)].

Because the weights are non-negative and sum to one (q-binomial series
identity), truncation after accumulating mass 1 - eps leaves a tail error
of at most eps * sup|f|.  Point-wise operations accumulate with compensated
summation in fixed k-ascending order; the grid evaluators use equally
deterministic vectorized windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .grid import GridFunction, IntervalSpec
from .qcalc import check_q

DEFAULT_EPS = 1e-10
DEFAULT_MAX_TERMS = 100_000


class SeriesTruncationError(RuntimeError):
    """Raised when the weight series fails to reach mass 1 - eps within the term cap."""


# ---------------------------------------------------------------------------
# base-operator tags used by FractalSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantumBase:
    n: int
    q: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"operator order n must be >= 1, got {self.n}")
        check_q(self.q)


@dataclass(frozen=True)
class ClassicalBase:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"operator order n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class IntegralBase:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"operator order n must be >= 1, got {self.n}")


# ---------------------------------------------------------------------------
# point-wise weight extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MkzWeights:
    """Truncated weight list of the (quantum) MKZ series at one abscissa."""

    n: int
    q: float
    t: float
    weights: np.ndarray
    tail_bound: float
    degenerate: bool = False  # True at t = 1 where the operator is defined by assignment

    def mass(self) -> float:
        return float(np.sum(self.weights))


def _kahan_add(total: float, comp: float, term: float) -> tuple[float, float]:
    y = term - comp
    s = total + y
    comp = (s - total) - y
    return s, comp


def mkz_weights(
    n: int,
    q: float,
    t: float,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> MkzWeights:
    """Weights w_k = P(t) qbinom(n+k, k) t^k accumulated until their sum reaches 1 - eps.

    At t = 1 the series identity degenerates and the operator value is assigned,
    so a degenerate marker with an empty weight list is returned.
    """
    q = check_q(q)
    if n < 1:
        raise ValueError(f"operator order n must be >= 1, got {n}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"normalized abscissa must lie in [0, 1], got {t}")
    if eps <= 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if t == 1.0:
        return MkzWeights(n, q, t, np.empty(0), 0.0, degenerate=True)

    # leading weight P(t) = prod_{j=0..n} (1 - q^j t)
    w = 1.0
    for j in range(n + 1):
        w *= 1.0 - q**j * t
    weights = [w]
    total, comp = w, 0.0
    k = 0
    while total < 1.0 - eps:
        if k + 1 > max_terms:
            raise SeriesTruncationError(
                f"mass {total:.3e} short of 1 - {eps:.1e} after {max_terms} terms (n={n}, q={q}, t={t})"
            )
        # w_{k+1} / w_k = t * (1 - q^(n+k+1)) / (1 - q^(k+1)), = t * (n+k+1)/(k+1) at q = 1
        if q == 1.0:
            w *= t * (n + k + 1) / (k + 1)
        else:
            w *= t * (1.0 - q ** (n + k + 1)) / (1.0 - q ** (k + 1))
        weights.append(w)
        total, comp = _kahan_add(total, comp, w)
        k += 1
    return MkzWeights(n, q, t, np.asarray(weights), max(0.0, 1.0 - total))


def quantum_nodes(n: int, q: float, count: int) -> np.ndarray:
    """Normalized series nodes [k]_q/[k+n]_q for k = 0..count-1 (clamped to [0, 1])."""
    k = np.arange(count, dtype=float)
    if q == 1.0:
        return k / (k + n)
    raw = np.minimum((1.0 - q**k) / (1.0 - q ** (k + n)), 1.0)
    # rounding can wobble by 1 ulp near saturation; keep the sequence monotone
    return np.maximum.accumulate(raw)


# ---------------------------------------------------------------------------
# point evaluations
# ---------------------------------------------------------------------------


def eval_quantum_mkz(
    f: GridFunction,
    n: int,
    q: float,
    x: float,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Quantum MKZ series value at x; endpoint values are returned exactly."""
    iv = f.interval
    if not iv.contains(x):
        raise ValueError(f"x={x} outside {iv}")
    if x == iv.right:
        return float(f.values[-1])
    if x == iv.left:
        return float(f.values[0])
    t = (x - iv.left) / iv.width
    wts = mkz_weights(n, q, t, eps=eps, max_terms=max_terms)
    nodes = iv.left + iv.width * quantum_nodes(n, q, wts.weights.size)
    fvals = f(nodes)
    total, comp = 0.0, 0.0
    for w, fv in zip(wts.weights, fvals):
        total, comp = _kahan_add(total, comp, w * fv)
    return total


def eval_classical_mkz(
    f: GridFunction,
    n: int,
    x: float,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Classical MKZ series (the q = 1 member of the quantum family)."""
    return eval_quantum_mkz(f, n, 1.0, x, eps=eps, max_terms=max_terms)


@dataclass(frozen=True)
class IntegralKernelRow:
    """Leading kernel entries of the integral MKZ operator at one abscissa."""

    n: int
    x: float
    weights: np.ndarray       # m_k(x) = (n+1) binom(k+n+1, k) x^k (1-x)^n
    intervals: np.ndarray     # shape (count, 2); consecutive rows abut


def integral_kernel_row(n: int, x: float, count: int) -> IntegralKernelRow:
    if n < 1:
        raise ValueError(f"operator order n must be >= 1, got {n}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    k = np.arange(count, dtype=float)
    if x == 1.0:
        weights = np.zeros(count)
    elif x == 0.0:
        weights = np.zeros(count)
        weights[0] = n + 1.0
    else:
        logw = (
            math.log(n + 1)
            + gammaln(k + n + 2)
            - gammaln(k + 1)
            - gammaln(n + 2.0)
            + k * math.log(x)
            + n * math.log1p(-x)
        )
        weights = np.exp(logw)
    lo = k / (k + n)
    hi = (k + 1.0) / (k + n + 1.0)
    return IntegralKernelRow(n, x, weights, np.column_stack([lo, hi]))


def eval_integral_mkz(
    f: GridFunction,
    n: int,
    x: float,
    eps: float = DEFAULT_EPS,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> float:
    """Integral MKZ operator value: sum_k m_k(x) Int_{I_k} f on [0, 1].

    The kernel mass m_k(x)|I_k| equals the negative-binomial weight
    binom(k+n-1, k) x^k (1-x)^n, so accumulation stops once the cumulative
    mass is within eps of one.  The x = 1 value is the continuous extension
    f(1) (the printed series vanishes there; the point has measure zero).
    """
    iv = f.interval
    if abs(iv.left) > 1e-12 or abs(iv.right - 1.0) > 1e-12:
        raise ValueError("integral MKZ operator is defined on [0, 1]")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if n < 1:
        raise ValueError(f"operator order n must be >= 1, got {n}")
    if x == 1.0:
        return float(f.values[-1])
    if x == 0.0:
        return float((n + 1.0) * f.integrate(0.0, 1.0 / (n + 1.0)))

    total, comp = 0.0, 0.0
    mass, mcomp = 0.0, 0.0
    p = (1.0 - x) ** n  # negative-binomial mass at k = 0
    k = 0
    while mass < 1.0 - eps:
        if k > max_terms:
            raise SeriesTruncationError(
                f"kernel mass {mass:.3e} short of 1 - {eps:.1e} after {max_terms} terms (n={n}, x={x})"
            )
        lo = k / (k + n)
        hi = (k + 1.0) / (k + n + 1.0)
        avg = f.integrate(lo, hi) / (hi - lo)
        total, comp = _kahan_add(total, comp, p * avg)
        mass, mcomp = _kahan_add(mass, mcomp, p)
        p *= x * (k + n) / (k + 1.0)
        k += 1
    return total


# ---------------------------------------------------------------------------
# full-grid evaluators (used by the fixed-point solvers)
# ---------------------------------------------------------------------------


def _saturation_terms(q: float, n: int) -> int:
    # beyond k0 the q-binomials and nodes are at their limits to double precision
    thresh = 1e-18 * (1.0 - q)
    k0 = int(math.ceil(math.log(thresh) / math.log(q))) + 1
    return max(k0, n + 2, 8)


def quantum_mkz_gridfn(f: GridFunction, n: int, q: float) -> GridFunction:
    """Quantum MKZ image of f sampled on f's own grid.

    For q < 1 the q-binomials saturate geometrically, so the series splits into
    an explicit head of k0 terms plus an exact closed-form geometric tail
    B_inf f(xN) t^k0 / (1 - t) with B_inf = 1 / prod_{j=1..n} (1 - q^j).
    """
    q = check_q(q)
    if q == 1.0:
        return classical_mkz_gridfn(f, n)
    m = f.size - 1
    t = np.arange(f.size, dtype=float) / m
    k0 = _saturation_terms(q, n)

    j = np.arange(1, k0, dtype=float)
    qb = np.concatenate(([1.0], np.cumprod((1.0 - q ** (n + j)) / (1.0 - q**j))))
    nodes = f.interval.left + f.interval.width * quantum_nodes(n, q, k0)
    coef = qb * f(nodes)

    out = np.zeros_like(t)
    for c in coef[::-1]:  # Horner over the head of the series
        out = out * t + c
    b_inf = 1.0 / np.prod(1.0 - q ** np.arange(1, n + 1, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = b_inf * f.values[-1] * t**k0 / (1.0 - t)
    tail[-1] = 0.0
    out = out + tail
    lead = np.ones_like(t)
    for jj in range(n + 1):
        lead *= 1.0 - q**jj * t
    out *= lead
    out[0] = f.values[0]
    out[-1] = f.values[-1]
    return GridFunction(f.interval, out)


def _nb_window(r: int, t: float, eps: float) -> int:
    # k-window capturing all but ~eps of the NB(r, t) mass (12 sigma past the mean)
    mean = r * t / (1.0 - t)
    std = math.sqrt(r * t) / (1.0 - t)
    return int(math.ceil(mean + 12.0 * std)) + r + 60


def _nb_weighted_sums(r: int, tvals: np.ndarray, coef_fn, eps: float) -> np.ndarray:
    """sum_k NB(r, t)-mass_k * coef_k for each t in (0, 1); coef_fn(kmax) yields coef_0..coef_kmax."""
    out = np.empty_like(tvals)
    lg_r = gammaln(float(r))
    cache_k = -1
    coefs = None
    for idx, t in enumerate(tvals):
        kmax = _nb_window(r, t, eps)
        if kmax > cache_k:
            coefs = coef_fn(kmax)
            cache_k = kmax
        for _ in range(6):
            ks = np.arange(kmax + 1, dtype=float)
            logw = gammaln(ks + r) - gammaln(ks + 1.0) - lg_r + ks * math.log(t) + r * math.log1p(-t)
            w = np.exp(logw)
            mass = w.sum()
            if 1.0 - mass <= eps:
                break
            kmax = int(kmax * 1.6) + 64
            if kmax > cache_k:
                coefs = coef_fn(kmax)
                cache_k = kmax
        else:
            raise SeriesTruncationError(f"window failed to capture mass 1 - {eps:.1e} at t={t}, r={r}")
        out[idx] = w @ coefs[: kmax + 1]
    return out


def classical_mkz_gridfn(f: GridFunction, n: int, eps: float = 1e-12) -> GridFunction:
    """Classical MKZ image of f on f's grid via NB(n+1, t) weight windows."""
    m = f.size - 1
    t = np.arange(f.size, dtype=float) / m
    iv = f.interval

    def coef_fn(kmax: int) -> np.ndarray:
        ks = np.arange(kmax + 1, dtype=float)
        return f(iv.left + iv.width * (ks / (ks + n)))

    out = np.empty(f.size)
    out[0] = f.values[0]
    out[-1] = f.values[-1]
    out[1:-1] = _nb_weighted_sums(n + 1, t[1:-1], coef_fn, eps)
    return GridFunction(iv, out)


def integral_mkz_gridfn(f: GridFunction, n: int, eps: float = 1e-12) -> GridFunction:
    """Integral MKZ image on f's grid: NB(n, x)-weighted local averages of f."""
    iv = f.interval
    if abs(iv.left) > 1e-12 or abs(iv.right - 1.0) > 1e-12:
        raise ValueError("integral MKZ operator is defined on [0, 1]")
    m = f.size - 1
    t = np.arange(f.size, dtype=float) / m

    cache = {"kmax": -1, "avg": None}

    def coef_fn(kmax: int) -> np.ndarray:
        if kmax > cache["kmax"]:
            ks = np.arange(kmax + 2, dtype=float)
            breaks = ks / (ks + n)  # right end of I_k equals break_{k+1}
            ints = f.integrate(breaks[:-1], breaks[1:])
            widths = np.diff(breaks)
            cache["avg"] = ints / widths
            cache["kmax"] = kmax
        return cache["avg"]

    out = np.empty(f.size)
    out[0] = float((n + 1.0) * f.integrate(0.0, 1.0 / (n + 1.0)))
    out[-1] = f.values[-1]
    out[1:-1] = _nb_weighted_sums(n, t[1:-1], coef_fn, eps)
    return GridFunction(iv, out)


def mkz_base_gridfn(f: GridFunction, base) -> GridFunction:
    """Operator image of f for any of the three base-operator tags."""
    if isinstance(base, QuantumBase):
        return quantum_mkz_gridfn(f, base.n, base.q)
    if isinstance(base, ClassicalBase):
        return classical_mkz_gridfn(f, base.n)
    if isinstance(base, IntegralBase):
        return integral_mkz_gridfn(f, base.n)
    raise TypeError(f"unknown base operator {base!r}")
