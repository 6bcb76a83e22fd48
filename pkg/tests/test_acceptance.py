"""Acceptance suite: every criterion prints one PASS/FAIL line (run with -s to see
them live; captured output appears in failure reports).

Three clauses fail by design because the claims they transcribe do not hold
numerically for the stated configurations:
  * criterion 6d / 7d: with the violating scaling vectors the solved functions
    stay positive / above g; a negative excursion appears only under the
    opposite sign convention in the bivariate map (equivalently -alpha).
  * criterion 8b: for convex germs the solved family increases monotonically
    toward the germ from below; the claimed non-increasing ordering is
    incompatible with convergence from below.
The observed magnitudes are printed for diagnosis; see the decisions ledger.
"""

import math
import time

import numpy as np
import pytest

from mkzfractal.analysis import (
    classical_bound_tables,
    dimension_experiment,
    monotone_sequence_check,
    quantum_bound_table,
)
from mkzfractal.cli import main as cli_main
from mkzfractal.constraints import (
    dominance_bounds,
    one_sided_bounds,
    positivity_bounds,
    sample_admissible,
    validate_alpha,
)
from mkzfractal.fractal import (
    FractalSpec,
    Partition,
    ScalingFunction,
    ScalingVector,
    lp_contraction_factor,
    rb_apply,
    solve_fixed_point,
)
from mkzfractal.grid import GridFunction
from mkzfractal.muntz import LambdaSequence, density_experiment
from mkzfractal.analysis import lp_error_table
from mkzfractal.operators import QuantumBase, eval_quantum_mkz, mkz_weights, quantum_mkz_gridfn

Q2 = (2.0 / math.pi) * math.atan(2.0)
THIRDS = [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]


def report(criterion: str, ok: bool, detail: str) -> bool:
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    return ok


# ---------------------------------------------------------------------------
# 1. weight normalization
# ---------------------------------------------------------------------------


def test_criterion_1_weight_normalization():
    start = time.monotonic()
    worst = 0.0
    for n in range(1, 51):
        for q in (0.5, 0.9, 1.0):
            for t10 in range(0, 10):
                w = mkz_weights(n, q, t10 / 10.0, eps=1e-12)
                worst = max(worst, abs(w.mass() - 1.0))
    elapsed = time.monotonic() - start
    ok = worst <= 1e-10 and elapsed < 10.0
    assert report("1", ok, f"max |sum w - 1| = {worst:.2e} over n<=50, {elapsed:.1f}s")
    assert worst <= 1e-10
    assert elapsed < 10.0


# ---------------------------------------------------------------------------
# 2. endpoint and node fidelity
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def example2():
    part = Partition(THIRDS)
    alpha = ScalingVector.sigmoids([0.1298, 0.100, 0.2168], part.interval, rate=10.0)
    spec = FractalSpec.build(lambda x: np.sin(np.pi * x) + 1.0, part, alpha,
                             QuantumBase(2, Q2), 1501, tol=1e-10)
    return part, spec, solve_fixed_point(spec)


def test_criterion_2_endpoint_and_node_fidelity(example2):
    part, spec, solved = example2
    f = spec.germ
    end_exact = True
    for n, q in ((2, Q2), (7, 0.5), (12, 1.0)):
        end_exact &= eval_quantum_mkz(f, n, q, 0.0) == f.values[0]
        end_exact &= eval_quantum_mkz(f, n, q, 1.0) == f.values[-1]
        g = quantum_mkz_gridfn(f, n, q)
        end_exact &= g.values[0] == f.values[0] and g.values[-1] == f.values[-1]
    node_dev = float(np.max(np.abs(solved(part.nodes) - f(part.nodes))))
    ok = end_exact and node_dev <= 1e-9
    assert report("2", ok, f"endpoints exact = {end_exact}, node deviation = {node_dev:.2e}")


# ---------------------------------------------------------------------------
# 3. contraction and identity
# ---------------------------------------------------------------------------


def test_criterion_3_contraction_and_identity():
    part = Partition(THIRDS)
    alpha = ScalingVector.constants([0.5, 0.5, 0.5], part.interval)
    spec = FractalSpec.build(lambda x: np.sin(np.pi * x) + 1.0, part, alpha,
                             QuantumBase(4, 0.7), 1501, tol=1e-10)
    solved, info = solve_fixed_point(spec, method="iterate", return_info=True)
    residual = float(np.max(np.abs((rb_apply(solved, spec) - solved).values)))
    r = np.array(info.residuals)
    live = r > 1e-13  # ratios near the floating floor are rounding noise
    ratios = r[1:][live[1:]] / r[:-1][live[1:]]
    max_ratio = float(np.max(ratios))
    zero = ScalingVector.constants([0.0, 0.0, 0.0], part.interval)
    zspec = FractalSpec(spec.germ, part, zero, spec.base, tol=1e-10)
    bitwise = np.array_equal(solve_fixed_point(zspec).values, spec.germ.values)
    ok = residual <= 1e-10 and bitwise and max_ratio <= alpha.sup_norm + 0.02
    assert report("3", ok, f"residual = {residual:.2e}, identity bitwise = {bitwise}, "
                           f"max ratio = {max_ratio:.4f} <= {alpha.sup_norm + 0.02:.2f}")


# ---------------------------------------------------------------------------
# 4. uniform convergence bound (quantum family)
# ---------------------------------------------------------------------------


def test_criterion_4_quantum_uniform_bound():
    start = time.monotonic()
    part = Partition(np.arange(8) / 7.0)
    alpha = ScalingVector.sigmoids([1.0] * 7, part.interval, rate=10.0)
    rows = quantum_bound_table(np.sin, part, alpha, range(3, 51), grid_size=1751, tol=1e-8)
    elapsed = time.monotonic() - start
    all_ok = all(r.satisfied for r in rows)
    trend = rows[-1].sup_error < rows[0].sup_error
    ok = all_ok and trend and elapsed < 120.0
    assert report("4", ok, f"48 rows satisfied = {all_ok}, "
                           f"sup_error {rows[0].sup_error:.3f} -> {rows[-1].sup_error:.3f}, "
                           f"{elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 5. classical corollary bounds
# ---------------------------------------------------------------------------


def test_criterion_5_classical_bounds():
    part = Partition(np.arange(8) / 7.0)
    alpha = ScalingVector.constants([0.5] * 7, part.interval)
    tables = classical_bound_tables(np.sin, np.cos, part, alpha, range(4, 65),
                                    hoelder=(1.0, 1.0), grid_size=1051, tol=1e-8)
    oks = {name: all(r.satisfied for r in rows) for name, rows in tables.items()}
    ok = all(oks.values())
    assert report("5", ok, f"modulus = {oks['modulus']}, c1 = {oks['c1']}, "
                           f"hoelder = {oks['hoelder']} over n in 4..64")


# ---------------------------------------------------------------------------
# 6. positivity soundness
# ---------------------------------------------------------------------------


def test_criterion_6_positivity_soundness(example2):
    part, spec, solved = example2
    bounds = positivity_bounds(spec.germ, spec)
    compliant_min = float(np.min(solved.values))
    rng = np.random.default_rng(20260809)
    random_min = np.inf
    for _ in range(20):
        alpha = sample_admissible(bounds, rng, part.interval, margin=1e-3)
        trial = FractalSpec(spec.germ, part, alpha, spec.base, tol=1e-9)
        random_min = min(random_min, float(np.min(solve_fixed_point(trial).values)))
    bad = ScalingVector.constants([0.7, -0.9, 0.9], part.interval)
    rejected = not validate_alpha(bad, bounds).ok
    ok = compliant_min >= -1e-6 and random_min >= -1e-6 and rejected
    assert report("6", ok, f"compliant min = {compliant_min:.3f}, "
                           f"20 random admissible min = {random_min:.3f}, violating rejected = {rejected}")


def test_criterion_6_violating_negative_excursion(example2):
    # The violating (0.7, -0.9, 0.9) keeps the solved function positive; a
    # negative excursion appears only under the flipped-sign map (equivalently
    # -alpha).  Asserted as stated; expected to fail.
    part, spec, _ = example2
    bad = ScalingVector.constants([0.7, -0.9, 0.9], part.interval)
    bad_min = float(np.min(solve_fixed_point(
        FractalSpec(spec.germ, part, bad, spec.base, tol=1e-9)).values))
    flipped = ScalingVector.constants([-0.7, 0.9, -0.9], part.interval)
    flipped_min = float(np.min(solve_fixed_point(
        FractalSpec(spec.germ, part, flipped, spec.base, tol=1e-9)).values))
    ok = bad_min < -1e-6
    report("6 (negative excursion)", ok,
           f"violating-alpha min = {bad_min:.4f} (no excursion; flipped-sign min = {flipped_min:.4f})")
    assert ok, "violating alpha does not dip negative under the plus-sign RB convention"


# ---------------------------------------------------------------------------
# 7. one-sided and dominance soundness
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def example3():
    part = Partition(THIRDS)
    alpha = ScalingVector.sigmoids([0.3950, 0.3550, 0.2774], part.interval, rate=10.0)
    spec = FractalSpec.build(lambda x: 0.5 * np.sin(4 * np.pi * x) + 1.0, part, alpha,
                             QuantumBase(2, Q2), 1501, tol=1e-10)
    lower = GridFunction.from_callable(lambda x: -0.5 * (2 * x - 1.1) ** 2,
                                       spec.germ.interval, spec.grid_size)
    return part, spec, lower


def test_criterion_7_orderings(example3):
    part, spec3, lower3 = example3
    solved3 = solve_fixed_point(spec3)
    gap3 = float(np.min(solved3.values - lower3.values))

    cauchy = ScalingFunction.from_samples(
        GridFunction(part.interval, 0.6 / (1.0 + np.linspace(0, 1, 1501) ** 2)))
    alpha4 = ScalingVector(
        [ScalingFunction.sigmoid(0.6, 8.0), ScalingFunction.sigmoid(0.6, 7.0), cauchy],
        part.interval)
    spec4 = FractalSpec.build(lambda x: np.sin(np.pi * x), part, alpha4,
                              QuantumBase(2, Q2), 1501, tol=1e-10)
    lower4 = GridFunction.from_callable(lambda x: -((2 * x - 1.0) ** 2),
                                        spec4.germ.interval, spec4.grid_size)
    admissible4 = validate_alpha(alpha4, dominance_bounds(spec4.germ, lower4, spec4)).ok
    upper = solve_fixed_point(spec4)
    lower_frac = solve_fixed_point(FractalSpec(lower4, part, alpha4, spec4.base, tol=1e-10))
    gap4 = float(np.min(upper.values - lower_frac.values))

    bounds3 = one_sided_bounds(spec3.germ, lower3, spec3)
    bad = ScalingVector.constants([0.4, 0.355, 0.8], part.interval)
    rejected = not validate_alpha(bad, bounds3).ok
    ok = gap3 >= -1e-6 and gap4 >= -1e-6 and admissible4 and rejected
    assert report("7", ok, f"one-sided gap = {gap3:.3f}, dominance gap = {gap4:.3f}, "
                           f"dominance alpha admissible = {admissible4}, violating rejected = {rejected}")


def test_criterion_7_violating_dips_below(example3):
    # The violating (0.4, 0.355, 0.8) keeps f^alpha above g; a crossing
    # appears only under the flipped-sign map.  Asserted as stated.
    part, spec3, lower3 = example3
    bad = ScalingVector.constants([0.4, 0.355, 0.8], part.interval)
    solved = solve_fixed_point(FractalSpec(spec3.germ, part, bad, spec3.base, tol=1e-9))
    gap = float(np.min(solved.values - lower3.values))
    flipped = ScalingVector.constants([-0.4, -0.355, -0.8], part.interval)
    solved_f = solve_fixed_point(FractalSpec(spec3.germ, part, flipped, spec3.base, tol=1e-9))
    gap_f = float(np.min(solved_f.values - lower3.values))
    ok = gap < -1e-6
    report("7 (dip below g)", ok,
           f"violating-alpha min(f^a - g) = {gap:.4f} (no dip; flipped-sign gap = {gap_f:.4f})")
    assert ok, "violating alpha stays above g under the plus-sign RB convention"


# ---------------------------------------------------------------------------
# 8. monotone family for a convex germ
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def monotone_report():
    part = Partition(THIRDS)
    alpha = ScalingVector.constants([0.3, 0.3, 0.3], part.interval)
    return monotone_sequence_check(lambda x: np.asarray(x, float) ** 2, part, alpha,
                                   q=0.8, n_values=range(1, 22), grid_size=1501, tol=1e-10)


def test_criterion_8_envelope(monotone_report):
    rep = monotone_report
    ok = rep.envelope_direction == "fractal <= germ" and rep.envelope_violation <= 1e-9
    assert report("8 (envelope)", ok,
                  f"direction '{rep.envelope_direction}' holds, violation = {rep.envelope_violation:.2e}")


def test_criterion_8_sequence_nonincreasing(monotone_report):
    # The family increases toward the germ from below (violation of the
    # opposite ordering is numerically zero), so the stated non-increasing
    # ordering cannot hold.  Asserted as stated; expected to fail.
    rep = monotone_report
    ok = rep.nonincreasing_violation <= 1e-9
    report("8 (sequence)", ok,
           f"non-increasing violation = {rep.nonincreasing_violation:.4f}, "
           f"non-decreasing violation = {rep.nondecreasing_violation:.2e}")
    assert ok, "the family is non-decreasing; the stated non-increasing ordering fails"


# ---------------------------------------------------------------------------
# 9. L^p suite
# ---------------------------------------------------------------------------


def test_criterion_9_lp_suite():
    part = Partition(THIRDS)
    alpha = ScalingVector.constants([0.5, 0.5, 0.5], part.interval)
    from mkzfractal.operators import IntegralBase

    probe = FractalSpec.build(lambda x: np.asarray(x, float), part, alpha, IntegralBase(5), 601)
    lam = lp_contraction_factor(probe, 2.0)
    lam_ok = abs(lam - 0.5) <= 1e-14
    rows = lp_error_table(lambda x: np.asarray(x, float), part, alpha,
                          p_values=[1.0, 2.0], n_values=range(2, 41), grid_size=1401, tol=1e-9)
    rows_ok = all(r.satisfied for r in rows)
    try:
        lp_contraction_factor(probe, 0.5)
        rejected = False
    except ValueError as exc:
        rejected = "not well-defined" in str(exc)
    ok = lam_ok and rows_ok and rejected
    assert report("9", ok, f"Lambda = {lam} (hand value 0.5), 78 rows satisfied = {rows_ok}, "
                           f"p < 1 rejected = {rejected}")


# ---------------------------------------------------------------------------
# 10. box dimension
# ---------------------------------------------------------------------------


def test_criterion_10_box_dimension():
    start = time.monotonic()
    part3 = Partition(THIRDS)
    gentle = ScalingVector.constants([0.2, 0.2, 0.2], part3.interval)
    est_a = dimension_experiment(np.sin, part3, gentle, n=10, beta=1.0,
                                 grid_size=1501, min_points=150_000)
    part4 = Partition([0.0, 0.25, 0.5, 0.75, 1.0])
    rough = ScalingVector.constants([0.5] * 4, part4.interval)
    est_b = dimension_experiment(lambda x: np.sin(np.pi * x), part4, rough, n=1, beta=1.0,
                                 grid_size=2001, min_points=1_000_000)
    elapsed = time.monotonic() - start
    ok_a = 0.9 <= est_a.slope <= 1.1
    lower_b = est_b.theorem_bounds[0]
    ok_b = est_b.slope >= lower_b - 0.1
    ok = ok_a and ok_b and elapsed < 180.0
    assert report("10", ok, f"gamma<=1 slope = {est_a.slope:.3f} in [0.9, 1.1]; "
                            f"gamma=2 slope = {est_b.slope:.3f} >= {lower_b - 0.1:.2f}; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 11. Muntz density dichotomy
# ---------------------------------------------------------------------------


def test_criterion_11_muntz_density():
    part = Partition(THIRDS)
    alpha = ScalingVector.constants([0.2, 0.2, 0.2], part.interval)
    target = lambda x: np.sin(np.pi * x)
    rows_div = density_experiment(target, LambdaSequence.integers(12), range(1, 13),
                                  part, alpha, grid_size=1501)
    rows_lac = density_experiment(target, LambdaSequence.powers_of_two(12), range(1, 13),
                                  part, alpha, grid_size=1501)
    sup_div = [r.residual_sup for r in rows_div]
    monotone = all(b <= a + 1e-9 for a, b in zip(sup_div, sup_div[1:]))
    small = sup_div[11] < 0.05
    dominated = all(l.residual_sup > d.residual_sup
                    for d, l in zip(rows_div[3:], rows_lac[3:]))
    ok = monotone and small and dominated
    assert report("11", ok, f"divergent-sum residual non-increasing = {monotone}, "
                            f"residual(m=12) = {sup_div[11]:.4f} < 0.05, "
                            f"lacunary dominates for m >= 4 = {dominated}")


# ---------------------------------------------------------------------------
# 12. determinism
# ---------------------------------------------------------------------------


CONVERGE_CFG = """
germ.kind = sine
partition.nodes = 0, 1/7, 2/7, 3/7, 4/7, 5/7, 6/7, 1
alpha.all = sigmoid, 1.0, 10
base.kind = quantum
base.n = 3
base.q = 0.8
grid.size = 701
solver.tol = 1e-7
converge.n_from = 3
converge.n_to = 10
"""

MUNTZ_CFG = """
germ.kind = sine
germ.omega = 3.14159265358979
partition.nodes = 0, 1/3, 2/3, 1
alpha.all = constant, 0.2
base.kind = quantum
base.n = 5
base.q = 0.8
grid.size = 601
solver.tol = 1e-8
muntz.lambda = integers
muntz.m_from = 1
muntz.m_to = 4
"""


def test_criterion_12_determinism(tmp_path):
    results = {}
    for name, cfg_text, command, outputs in (
        ("converge", CONVERGE_CFG, "converge", ("convergence.csv", "convergence.svg")),
        ("muntz", MUNTZ_CFG, "muntz", ("density.csv", "density.svg")),
    ):
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(cfg_text, encoding="utf-8")
        pair = []
        for run, threads in (("a", "1"), ("b", "8")):
            out = tmp_path / f"{name}_{run}"
            code = cli_main([command, "--config", str(cfg), "--out", str(out),
                             "--seed", "7", "--threads", threads])
            assert code == 0
            pair.append(out)
        results[name] = all(
            (pair[0] / f).read_bytes() == (pair[1] / f).read_bytes() for f in outputs
        )
    ok = all(results.values())
    assert report("12", ok, f"byte-identical outputs across runs and thread counts: {results}")
