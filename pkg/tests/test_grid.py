import numpy as np
import pytest

from mkzfractal.grid import GridFunction, IntervalSpec, grid_points


def test_interval_validation():
    with pytest.raises(ValueError):
        IntervalSpec(1.0, 1.0)
    with pytest.raises(ValueError):
        IntervalSpec(2.0, -1.0)


def test_needs_two_samples(unit_interval):
    with pytest.raises(ValueError):
        GridFunction(unit_interval, [1.0])
    with pytest.raises(ValueError):
        GridFunction(unit_interval, [1.0, np.inf])


def test_grid_points_hit_endpoints():
    iv = IntervalSpec(0.3, 2.7)
    xs = grid_points(iv, 17)
    assert xs[0] == 0.3 and xs[-1] == 2.7
    assert np.allclose(np.diff(xs), iv.width / 16)


def test_node_evaluation_is_exact(unit_interval, rng):
    vals = rng.standard_normal(101)
    f = GridFunction(unit_interval, vals)
    xs = f.xs()
    assert np.array_equal(f(xs), vals)
    assert f(xs[37]) == vals[37]


def test_linear_interpolation_between_nodes(unit_interval):
    f = GridFunction(unit_interval, [0.0, 1.0, 4.0])
    assert f(0.25) == pytest.approx(0.5)
    assert f(0.75) == pytest.approx(2.5)


def test_evaluation_is_linear_along_cells(unit_interval, rng):
    f = GridFunction(unit_interval, rng.standard_normal(11))
    x = rng.uniform(0, 1, 200)
    # oracle: manual two-point interpolation
    h = 0.1
    i = np.minimum((x / h).astype(int), 9)
    w = x / h - i
    expect = f.values[i] * (1 - w) + f.values[i + 1] * w
    assert np.allclose(f(x), expect, atol=1e-12)


def test_integrate_matches_brute_force(unit_interval, rng):
    f = GridFunction(unit_interval, rng.standard_normal(41))
    # oracle: dense trapezoid over the interpolant
    for a, b in [(0.0, 1.0), (0.13, 0.87), (0.5, 0.52)]:
        xs = np.linspace(a, b, 200_001)
        brute = np.trapezoid(f(xs), xs)
        assert f.integrate(a, b) == pytest.approx(brute, abs=1e-9)


def test_integrate_vectorized(unit_interval):
    f = GridFunction(unit_interval, np.linspace(0, 1, 11))  # f(x) = x
    lo = np.array([0.0, 0.25])
    hi = np.array([1.0, 0.75])
    out = f.integrate(lo, hi)
    assert out == pytest.approx([0.5, 0.25], abs=1e-14)


def test_lp_and_sup_norms(unit_interval):
    f = GridFunction(unit_interval, np.full(101, -2.0))
    assert f.sup_norm() == 2.0
    assert f.lp_norm(1.0) == pytest.approx(2.0, rel=1e-12)
    assert f.lp_norm(2.0) == pytest.approx(2.0, rel=1e-12)
    with pytest.raises(ValueError):
        f.lp_norm(0.5)


def test_algebra_shares_grid(unit_interval):
    f = GridFunction(unit_interval, np.ones(11))
    g = GridFunction(unit_interval, np.arange(11.0))
    assert np.array_equal((f + g).values, 1.0 + np.arange(11.0))
    assert np.array_equal((g - f).values, np.arange(11.0) - 1.0)
    assert np.array_equal((2.0 * f).values, np.full(11, 2.0))
    other = GridFunction(unit_interval, np.ones(12))
    with pytest.raises(ValueError):
        _ = f + other


def test_csv_round_trip_bit_exact(tmp_path, unit_interval, rng):
    f = GridFunction(unit_interval, rng.standard_normal(257))
    path = tmp_path / "f.csv"
    f.to_csv(path)
    g = GridFunction.from_csv(path)
    assert np.array_equal(f.values, g.values)
    assert g.interval == f.interval
    # writing again yields identical bytes
    path2 = tmp_path / "g.csv"
    g.to_csv(path2)
    assert path.read_bytes() == path2.read_bytes()


def test_values_are_read_only(unit_interval):
    f = GridFunction(unit_interval, np.ones(5))
    with pytest.raises(AttributeError):
        f.values = np.zeros(5)
