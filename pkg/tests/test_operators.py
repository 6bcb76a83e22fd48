import math

import numpy as np
import pytest

from mkzfractal.grid import GridFunction, IntervalSpec
from mkzfractal.operators import (
    ClassicalBase,
    IntegralBase,
    QuantumBase,
    SeriesTruncationError,
    classical_mkz_gridfn,
    eval_classical_mkz,
    eval_integral_mkz,
    eval_quantum_mkz,
    integral_kernel_row,
    integral_mkz_gridfn,
    mkz_base_gridfn,
    mkz_weights,
    quantum_mkz_gridfn,
    quantum_nodes,
)
from mkzfractal.qcalc import q_binomial


def brute_weights(n, q, t, count):
    """Independent oracle: w_k directly from the q-binomial definition."""
    lead = np.prod([1.0 - q**j * t for j in range(n + 1)])
    return np.array([lead * q_binomial(n + k, k, q) * t**k for k in range(count)])


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def test_weights_at_zero_abscissa():
    w = mkz_weights(4, 0.5, 0.0, eps=1e-10)
    assert np.array_equal(w.weights, [1.0])
    assert not w.degenerate


def test_weights_degenerate_at_right_end():
    w = mkz_weights(3, 0.9, 1.0)
    assert w.degenerate and w.weights.size == 0


@pytest.mark.parametrize("n,q", [(10, 1.0), (5, 0.9), (3, 0.5)])
def test_weight_mass_reaches_one(n, q):
    for t in (0.1, 0.5, 0.9):
        w = mkz_weights(n, q, t, eps=1e-12)
        assert 1.0 - 1e-12 <= w.mass() <= 1.0 + 1e-12
        assert w.tail_bound <= 1e-12
        assert np.all(w.weights >= 0.0)


def test_weights_match_brute_force_formula():
    for n, q, t in [(4, 0.5, 0.3), (7, 0.9, 0.6), (3, 1.0, 0.5)]:
        w = mkz_weights(n, q, t, eps=1e-10)
        expect = brute_weights(n, q, t, w.weights.size)
        assert np.allclose(w.weights, expect, rtol=1e-12, atol=1e-300)


def test_weights_truncation_cap():
    with pytest.raises(SeriesTruncationError):
        mkz_weights(10, 1.0, 0.999999, eps=1e-12, max_terms=50)


def test_weights_reject_bad_inputs():
    with pytest.raises(ValueError):
        mkz_weights(0, 0.5, 0.5)
    with pytest.raises(ValueError):
        mkz_weights(3, 0.5, 1.2)
    with pytest.raises(ValueError):
        mkz_weights(3, 0.5, 0.5, eps=0.0)


def test_nodes_increase_to_one():
    nodes = quantum_nodes(4, 0.8, 200)
    assert nodes[0] == 0.0
    assert np.all(np.diff(nodes) >= 0)
    assert np.all(np.diff(nodes[:40]) > 0)  # strict until float saturation
    assert nodes[-1] == pytest.approx(1.0, abs=1e-15)


# ---------------------------------------------------------------------------
# point evaluations
# ---------------------------------------------------------------------------


@pytest.fixture
def sin_grid(unit_interval):
    return GridFunction.from_callable(np.sin, unit_interval, 801)


def test_endpoints_exact(sin_grid):
    assert eval_quantum_mkz(sin_grid, 6, 0.8, 0.0) == sin_grid.values[0]
    assert eval_quantum_mkz(sin_grid, 6, 0.8, 1.0) == sin_grid.values[-1]


def test_constant_reproduction(unit_interval):
    one = GridFunction.from_callable(lambda x: np.ones_like(x), unit_interval, 401)
    for n, q in [(1, 0.5), (8, 0.9), (15, 1.0)]:
        for x in (0.2, 0.5, 0.95):
            assert eval_quantum_mkz(one, n, q, x) == pytest.approx(1.0, abs=1e-9)


def test_linear_reproduction(unit_interval):
    ident = GridFunction.from_callable(lambda x: x, unit_interval, 401)
    for n, q in [(2, 0.7), (9, 1.0)]:
        for x in (0.15, 0.6, 0.9):
            assert eval_quantum_mkz(ident, n, q, x, eps=1e-12) == pytest.approx(x, abs=1e-9)


def test_classical_is_q_one(sin_grid):
    for x in (0.1, 0.45, 0.8):
        assert eval_classical_mkz(sin_grid, 7, x) == eval_quantum_mkz(sin_grid, 7, 1.0, x)


def test_positivity_and_norm_bound(unit_interval, rng):
    vals = np.abs(rng.standard_normal(301)) + 0.1
    f = GridFunction(unit_interval, vals)
    xs = np.linspace(0, 1, 23)
    out = np.array([eval_quantum_mkz(f, 5, 0.85, float(x)) for x in xs])
    assert np.all(out >= 0.0)
    assert np.max(np.abs(out)) <= f.sup_norm() + 1e-12


def test_linearity(unit_interval, rng):
    f = GridFunction(unit_interval, rng.standard_normal(301))
    g = GridFunction(unit_interval, rng.standard_normal(301))
    a, b = rng.uniform(-2, 2, 2)
    combo = GridFunction(unit_interval, a * f.values + b * g.values)
    for x in (0.3, 0.72):
        lhs = eval_quantum_mkz(combo, 6, 0.9, x, eps=1e-13)
        rhs = a * eval_quantum_mkz(f, 6, 0.9, x, eps=1e-13) + b * eval_quantum_mkz(g, 6, 0.9, x, eps=1e-13)
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_classical_lipschitz_preservation(unit_interval):
    f = GridFunction.from_callable(lambda x: np.abs(x - 0.4), unit_interval, 301)  # Lip_1 1
    mf = classical_mkz_gridfn(f, 8)
    v, h = mf.values, mf.step
    worst = 0.0
    for d in range(1, v.size):
        worst = max(worst, float(np.max(np.abs(v[d:] - v[:-d]))) / (d * h))
    assert worst <= 1.0 + 1e-6


# ---------------------------------------------------------------------------
# grid evaluators agree with point evaluators
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n,q", [(3, 0.5), (50, 0.9), (12, 1.0), (50, 0.98727)])
def test_grid_evaluator_matches_points(sin_grid, n, q):
    g = quantum_mkz_gridfn(sin_grid, n, q)
    idxs = [0, 101, 400, 755, 800]
    xs = g.xs()[idxs]
    expect = [eval_quantum_mkz(sin_grid, n, q, float(x), eps=1e-14) for x in xs]
    assert np.allclose(g.values[idxs], expect, atol=5e-12)


def test_base_dispatch(sin_grid):
    assert mkz_base_gridfn(sin_grid, QuantumBase(4, 0.8)) == quantum_mkz_gridfn(sin_grid, 4, 0.8)
    assert mkz_base_gridfn(sin_grid, ClassicalBase(4)) == classical_mkz_gridfn(sin_grid, 4)
    with pytest.raises(TypeError):
        mkz_base_gridfn(sin_grid, object())


# ---------------------------------------------------------------------------
# integral operator
# ---------------------------------------------------------------------------


def test_kernel_row_invariants():
    row = integral_kernel_row(3, 0.5, 40)
    assert np.all(row.weights >= 0.0)
    # consecutive intervals abut: right end of I_k is the left end of I_{k+1}
    assert np.allclose(row.intervals[:-1, 1], row.intervals[1:, 0], atol=1e-15)
    widths = row.intervals[:, 1] - row.intervals[:, 0]
    k = np.arange(40.0)
    assert np.allclose(widths, 3.0 / ((k + 3) * (k + 4)), rtol=1e-12)


def test_integral_zero_function(unit_interval):
    z = GridFunction(unit_interval, np.zeros(101))
    assert eval_integral_mkz(z, 3, 0.5) == 0.0


def test_integral_constant_mass(unit_interval):
    one = GridFunction.from_callable(lambda x: np.ones_like(x), unit_interval, 101)
    # oracle: sum_k m_k(0.5) * |I_k| with |I_k| = n/((k+n)(k+n+1)) from the
    # interval-width formula, summed far into the tail
    n, x = 3, 0.5
    row = integral_kernel_row(n, x, 400)
    k = np.arange(400.0)
    brute = float(np.sum(row.weights * n / ((k + n) * (k + n + 1))))
    val = eval_integral_mkz(one, n, x, eps=1e-13)
    assert val == pytest.approx(brute, abs=1e-12)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_integral_identity_germ(unit_interval):
    ident = GridFunction.from_callable(lambda x: x, unit_interval, 2001)
    # oracle: brute-force kernel sum with analytic segment integrals of s
    n, x = 20, 0.3
    row = integral_kernel_row(n, x, 2000)
    seg = 0.5 * (row.intervals[:, 1] ** 2 - row.intervals[:, 0] ** 2)
    brute = float(np.sum(row.weights * seg))
    val = eval_integral_mkz(ident, n, x)
    assert val == pytest.approx(brute, abs=1e-10)
    assert abs(val - 0.3) < 0.05


def test_integral_endpoint_extension(unit_interval):
    f = GridFunction.from_callable(lambda x: x**2, unit_interval, 501)
    assert eval_integral_mkz(f, 5, 1.0) == f.values[-1]
    # x = 0: (n+1) * integral of f over [0, 1/(n+1)]
    n = 5
    expect = (n + 1) * f.integrate(0.0, 1.0 / (n + 1))
    assert eval_integral_mkz(f, n, 0.0) == pytest.approx(expect, rel=1e-12)


def test_integral_grid_evaluator_matches_points(unit_interval):
    f = GridFunction.from_callable(lambda x: np.sin(3 * x) + 1.2, unit_interval, 801)
    g = integral_mkz_gridfn(f, 9)
    idxs = [0, 160, 415, 799, 800]
    xs = g.xs()[idxs]
    expect = [eval_integral_mkz(f, 9, float(x), eps=1e-13) for x in xs]
    assert np.allclose(g.values[idxs], expect, atol=1e-10)


def test_integral_requires_unit_interval():
    f = GridFunction.from_callable(np.sin, IntervalSpec(0.0, 2.0), 101)
    with pytest.raises(ValueError):
        eval_integral_mkz(f, 3, 0.5)


def test_base_tags_validate():
    with pytest.raises(ValueError):
        QuantumBase(0, 0.5)
    with pytest.raises(ValueError):
        QuantumBase(3, 1.5)
    with pytest.raises(ValueError):
        ClassicalBase(0)
    with pytest.raises(ValueError):
        IntegralBase(-1)
