"""Experiment runner: solve fractal functions and drive the verification suites.

One config file describes one experiment in flat `section.key = value` lines
('#' comments, fractions like 1/7 allowed).  Unknown keys are rejected.  Every
SVG written has a CSV sibling holding exactly the plotted data, and repeated
runs with the same config are byte-identical: all numeric paths are
single-threaded regardless of --threads, which is accepted for interface
compatibility.

Exit codes: 0 ok, 2 config error, 3 solver non-convergence, 4 constraint
validation failure, 5 bound-assertion failure.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import analysis, constraints, muntz
from .fractal import (
    FractalSpec,
    NonContractionError,
    NonConvergenceError,
    Partition,
    ScalingFunction,
    ScalingVector,
    snap_grid_size,
    solve_fixed_point,
    solve_lp_fixed_point,
)
from .germs import make_germ
from .grid import GridFunction
from .operators import ClassicalBase, IntegralBase, QuantumBase, SeriesTruncationError
from .svgplot import polyline_plot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_CONSTRAINT = 4
EXIT_BOUND = 5


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

_GERM_KEYS = {"kind", "amp", "omega", "offset", "coeffs", "exponent", "scale", "shift"}
_KNOWN_KEYS = {
    "germ": _GERM_KEYS,
    "germ2": _GERM_KEYS,
    "partition": {"nodes"},
    "alpha": {"all"} | {str(i) for i in range(1, 33)},
    "base": {"kind", "n", "q"},
    "grid": {"size"},
    "solver": {"tol", "max_iter"},
    "constrain": {"mode", "ceiling"},
    "converge": {"variant", "n_from", "n_to", "q"},
    "dimension": {"n", "beta", "points"},
    "muntz": {"lambda", "m_from", "m_to", "lp"},
    "lp": {"p_values", "n_from", "n_to"},
}


def _num(text: str) -> float:
    text = text.strip()
    try:
        if "/" in text and "e" not in text.lower():
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad numeric value {text!r}") from exc


def parse_config(path) -> dict:
    """Flat dotted key-value text -> nested dict; rejects unknown keys."""
    cfg: dict[str, dict[str, str]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if "." not in key:
                raise ConfigError(f"line {lineno}: key {key!r} is missing its section prefix")
            section, field = key.split(".", 1)
            if section not in _KNOWN_KEYS or field not in _KNOWN_KEYS[section]:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
            cfg.setdefault(section, {})[field] = value
    return cfg


def _build_germ(cfg: dict, section: str = "germ"):
    if section not in cfg:
        raise ConfigError(f"missing [{section}] settings")
    g = dict(cfg[section])
    kind = g.pop("kind", None)
    if kind is None:
        raise ConfigError(f"{section}.kind is required")
    params = {}
    for key, value in g.items():
        params[key] = [_num(v) for v in value.split(",")] if key == "coeffs" else _num(value)
    try:
        return make_germ(kind, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad {section} spec: {exc}") from exc


def _build_partition(cfg: dict) -> Partition:
    try:
        nodes = [_num(v) for v in cfg["partition"]["nodes"].split(",")]
    except KeyError as exc:
        raise ConfigError("partition.nodes is required") from exc
    try:
        return Partition(nodes)
    except ValueError as exc:
        raise ConfigError(f"partition: {exc}") from exc


def _one_scaling(spec_text: str, interval, grid_size: int) -> ScalingFunction:
    parts = [p.strip() for p in spec_text.split(",")]
    kind, args = parts[0], [_num(p) for p in parts[1:]]
    if kind == "constant" and len(args) == 1:
        return ScalingFunction.constant(args[0])
    if kind == "sigmoid" and len(args) in (1, 2):
        return ScalingFunction.sigmoid(args[0], args[1] if len(args) == 2 else 10.0)
    if kind == "cauchy" and len(args) == 1:
        xs = np.linspace(interval.left, interval.right, grid_size)
        return ScalingFunction.from_samples(GridFunction(interval, args[0] / (1.0 + xs**2)))
    raise ConfigError(f"bad alpha spec {spec_text!r} (use constant,c | sigmoid,c[,rate] | cauchy,c)")


def _build_alpha(cfg: dict, partition: Partition, grid_size: int) -> ScalingVector:
    section = cfg.get("alpha")
    if not section:
        raise ConfigError("alpha settings are required")
    iv = partition.interval
    n_int = partition.n_intervals
    if "all" in section:
        fn_spec = section["all"]
        return ScalingVector([_one_scaling(fn_spec, iv, grid_size) for _ in range(n_int)], iv)
    fns = []
    for i in range(1, n_int + 1):
        if str(i) not in section:
            raise ConfigError(f"alpha.{i} missing ({n_int} intervals)")
        fns.append(_one_scaling(section[str(i)], iv, grid_size))
    return ScalingVector(fns, iv)


def _build_base(cfg: dict):
    section = cfg.get("base")
    if not section or "kind" not in section:
        raise ConfigError("base.kind is required")
    kind = section["kind"]
    n = int(_num(section.get("n", "2")))
    try:
        if kind == "quantum":
            if "q" not in section:
                raise ConfigError("base.q is required for the quantum operator")
            return QuantumBase(n, _num(section["q"]))
        if kind == "classical":
            return ClassicalBase(n)
        if kind == "integral":
            return IntegralBase(n)
    except ValueError as exc:
        raise ConfigError(f"base: {exc}") from exc
    raise ConfigError(f"unknown base.kind {kind!r}")


def _solver_settings(cfg: dict, args) -> tuple[int, float, int]:
    grid = int(args.grid) if args.grid else int(_num(cfg.get("grid", {}).get("size", "1501")))
    tol = float(args.tol) if args.tol else _num(cfg.get("solver", {}).get("tol", "1e-9"))
    max_iter = int(_num(cfg.get("solver", {}).get("max_iter", "200")))
    return grid, tol, max_iter


def _spec_from_config(cfg: dict, args, base=None) -> tuple[FractalSpec, object]:
    germ = _build_germ(cfg)
    partition = _build_partition(cfg)
    grid, tol, max_iter = _solver_settings(cfg, args)
    grid = snap_grid_size(partition, grid)
    alpha = _build_alpha(cfg, partition, grid)
    base = base if base is not None else _build_base(cfg)
    spec = FractalSpec.build(germ.fn, partition, alpha, base, grid, tol=tol, max_iter=max_iter)
    return spec, germ


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_solve(cfg: dict, args, out: Path) -> int:
    spec, _ = _spec_from_config(cfg, args)
    solved = solve_lp_fixed_point(spec, p=2.0) if isinstance(spec.base, IntegralBase) else solve_fixed_point(spec)
    spec.germ.to_csv(out / "germ.csv")
    spec.base_gridfn().to_csv(out / "base.csv")
    solved.to_csv(out / "fractal.csv")
    xs = solved.xs()
    polyline_plot(
        out / "fractal.svg",
        [("germ", xs, spec.germ.values), ("base", xs, spec.base_gridfn().values), ("fractal", xs, solved.values)],
        "fractal function",
    )
    return EXIT_OK


def cmd_constrain(cfg: dict, args, out: Path) -> int:
    mode = cfg.get("constrain", {}).get("mode", "positivity")
    if mode not in ("positivity", "one_sided", "dominance"):
        raise ConfigError(f"constrain.mode must be positivity|one_sided|dominance, got {mode!r}")
    spec, _ = _spec_from_config(cfg, args)
    lower = None
    if mode in ("one_sided", "dominance"):
        germ2 = _build_germ(cfg, "germ2")
        lower = GridFunction.from_callable(germ2.fn, spec.germ.interval, spec.grid_size)

    if mode == "positivity":
        ceiling_text = cfg.get("constrain", {}).get("ceiling")
        ceiling = _num(ceiling_text) if ceiling_text else None
        bounds = constraints.positivity_bounds(spec.germ, spec, ceiling)
    elif mode == "one_sided":
        bounds = constraints.one_sided_bounds(spec.germ, lower, spec)
    else:
        bounds = constraints.dominance_bounds(spec.germ, lower, spec)
    bounds.to_csv(out / "bounds.csv")
    report = constraints.validate_alpha(spec.alpha, bounds)

    solved = solve_fixed_point(spec)
    solved.to_csv(out / "fractal.csv")
    series = [("germ", solved.xs(), spec.germ.values), ("fractal", solved.xs(), solved.values)]
    if lower is not None:
        series.append(("lower", solved.xs(), lower.values))
    if mode == "dominance":
        spec_g = FractalSpec(lower, spec.partition, spec.alpha, spec.base, tol=spec.tol, max_iter=spec.max_iter)
        solved_g = solve_fixed_point(spec_g)
        solved_g.to_csv(out / "fractal_lower.csv")
        series.append(("fractal_lower", solved_g.xs(), solved_g.values))
    polyline_plot(out / "constrain.svg", series, f"constrained approximation ({mode})")

    with open(out / "validation.txt", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"mode: {mode}\n")
        fh.write(f"admissible: {report.ok}\n")
        fh.write(f"sup_norm: {report.sup_norm!r} (< 1: {report.sup_ok})\n")
        fh.write(f"worst_violation: {report.worst_violation!r}\n")
        fh.write(f"failing_intervals: {report.failing_intervals()}\n")
    return EXIT_OK if report.ok else EXIT_CONSTRAINT


def _converge_range(cfg: dict, default_from: int, default_to: int):
    section = cfg.get("converge", {})
    lo = int(_num(section.get("n_from", str(default_from))))
    hi = int(_num(section.get("n_to", str(default_to))))
    if lo < 1 or hi < lo:
        raise ConfigError(f"bad converge range [{lo}, {hi}]")
    return range(lo, hi + 1)


def cmd_converge(cfg: dict, args, out: Path) -> int:
    variant = cfg.get("converge", {}).get("variant", "quantum")
    germ = _build_germ(cfg)
    partition = _build_partition(cfg)
    grid, tol, _ = _solver_settings(cfg, args)
    grid = snap_grid_size(partition, grid)
    alpha = _build_alpha(cfg, partition, grid)

    if variant == "quantum":
        rows = analysis.quantum_bound_table(
            germ.fn, partition, alpha, _converge_range(cfg, 3, 30), grid_size=grid, tol=tol
        )
        analysis.convergence_to_csv(rows, out / "convergence.csv")
        polyline_plot(
            out / "convergence.svg",
            [("sup_error", [r.n for r in rows], [r.sup_error for r in rows]),
             ("bound", [r.n for r in rows], [r.bound for r in rows])],
            "uniform error vs operator order", xlabel="n", ylabel="error",
        )
        return EXIT_OK if all(r.satisfied for r in rows if r.n >= 3) else EXIT_BOUND

    if variant == "classical":
        if germ.derivative is None:
            raise ConfigError("classical variant needs a germ with a derivative")
        tables = analysis.classical_bound_tables(
            germ.fn, germ.derivative, partition, alpha, _converge_range(cfg, 4, 32),
            hoelder=germ.hoelder, grid_size=grid, tol=tol,
        )
        ok = True
        for name, rows in tables.items():
            if not rows:
                continue
            analysis.convergence_to_csv(rows, out / f"convergence_{name}.csv")
            ok = ok and all(r.satisfied for r in rows)
        rows = tables["modulus"]
        polyline_plot(
            out / "convergence.svg",
            [("sup_error", [r.n for r in rows], [r.sup_error for r in rows]),
             ("bound", [r.n for r in rows], [r.bound for r in rows])],
            "classical error vs operator order", xlabel="n", ylabel="error",
        )
        return EXIT_OK if ok else EXIT_BOUND

    if variant == "monotone":
        q = _num(cfg.get("converge", {}).get("q", "0.8"))
        report = analysis.monotone_sequence_check(
            germ.fn, partition, alpha, q, list(_converge_range(cfg, 1, 20)), grid_size=grid, tol=tol
        )
        with open(out / "monotone.txt", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"envelope_direction: {report.envelope_direction}\n")
            fh.write(f"envelope_violation: {report.envelope_violation!r}\n")
            fh.write(f"sequence_direction: {report.sequence_direction}\n")
            fh.write(f"nonincreasing_violation: {report.nonincreasing_violation!r}\n")
            fh.write(f"nondecreasing_violation: {report.nondecreasing_violation!r}\n")
        return EXIT_OK

    raise ConfigError(f"unknown converge.variant {variant!r}")


def cmd_dimension(cfg: dict, args, out: Path) -> int:
    germ = _build_germ(cfg)
    partition = _build_partition(cfg)
    grid, tol, _ = _solver_settings(cfg, args)
    grid = snap_grid_size(partition, grid)
    alpha = _build_alpha(cfg, partition, grid)
    section = cfg.get("dimension", {})
    n = int(_num(section.get("n", "1")))
    beta = _num(section.get("beta", "1"))
    points = int(_num(section.get("points", "200000")))
    est = analysis.dimension_experiment(
        germ.fn, partition, alpha, n=n, beta=beta, grid_size=grid, min_points=points, tol=tol
    )
    est.to_csv(out / "dimension.csv")
    polyline_plot(
        out / "dimension.svg",
        [("log2 count", np.log2(1.0 / est.epsilons), np.log2(est.counts.astype(float)))],
        f"box counting (slope {est.slope:.3f})", xlabel="log2(1/eps)", ylabel="log2 N",
    )
    if est.theorem_bounds is not None:
        lo, hi = est.theorem_bounds
        if not (lo - 0.1 <= est.slope <= hi + 0.1):
            return EXIT_BOUND
    return EXIT_OK


def cmd_muntz(cfg: dict, args, out: Path) -> int:
    germ = _build_germ(cfg)
    partition = _build_partition(cfg)
    grid, tol, _ = _solver_settings(cfg, args)
    grid = snap_grid_size(partition, grid)
    alpha = _build_alpha(cfg, partition, grid)
    section = cfg.get("muntz", {})
    m_lo = int(_num(section.get("m_from", "1")))
    m_hi = int(_num(section.get("m_to", "8")))
    family = section.get("lambda", "integers")
    if family == "integers":
        lambdas = muntz.LambdaSequence.integers(m_hi)
    elif family == "powers_of_two":
        lambdas = muntz.LambdaSequence.powers_of_two(m_hi)
    else:
        raise ConfigError(f"muntz.lambda must be integers|powers_of_two, got {family!r}")
    lp = _num(section["lp"]) if "lp" in section else None
    rows = muntz.density_experiment(
        germ.fn, lambdas, range(m_lo, m_hi + 1), partition, alpha,
        grid_size=grid, tol=tol, lp=lp,
    )
    muntz.density_rows_to_csv(rows, out / "density.csv")
    polyline_plot(
        out / "density.svg",
        [("residual_sup", [r.m for r in rows], [r.residual_sup for r in rows]),
         ("residual_l2", [r.m for r in rows], [r.residual_l2 for r in rows])],
        f"Muntz density ({rows[0].lambda_class})", xlabel="m", ylabel="residual",
    )
    return EXIT_OK


def cmd_lp(cfg: dict, args, out: Path) -> int:
    germ = _build_germ(cfg)
    partition = _build_partition(cfg)
    grid, tol, _ = _solver_settings(cfg, args)
    grid = snap_grid_size(partition, grid)
    alpha = _build_alpha(cfg, partition, grid)
    section = cfg.get("lp", {})
    p_values = [_num(v) for v in section.get("p_values", "1,2").split(",")]
    n_lo = int(_num(section.get("n_from", "2")))
    n_hi = int(_num(section.get("n_to", "20")))
    rows = analysis.lp_error_table(
        germ.fn, partition, alpha, p_values, range(n_lo, n_hi + 1), grid_size=grid, tol=tol
    )
    analysis.lp_rows_to_csv(rows, out / "lp.csv")
    first_p = p_values[0]
    sel = [r for r in rows if r.p == first_p]
    polyline_plot(
        out / "lp.svg",
        [("lp_error", [r.n for r in sel], [r.lp_error for r in sel]),
         ("rhs_bound", [r.n for r in sel], [r.rhs_bound for r in sel])],
        f"L^p error (p={first_p})", xlabel="n", ylabel="error",
    )
    return EXIT_OK if all(r.satisfied for r in rows) else EXIT_BOUND


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "solve": cmd_solve,
    "constrain": cmd_constrain,
    "converge": cmd_converge,
    "dimension": cmd_dimension,
    "muntz": cmd_muntz,
    "lp": cmd_lp,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkzfractal",
        description="Quantum MKZ fractal function experiments (CSV + SVG outputs).",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid", type=int, default=None, help="override grid size")
        p.add_argument("--tol", type=float, default=None, help="override solver tolerance")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
        p.add_argument("--threads", type=int, default=1,
                       help="accepted for compatibility; computation is single-threaded")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out)
    try:
        cfg = parse_config(args.config)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, args, out)
    except (NonConvergenceError, NonContractionError, SeriesTruncationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
