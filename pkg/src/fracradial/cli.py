"""Command-line front end: reference tables, oracle runs, solves, reports.

Four subcommands share one configuration document (INI syntax with the flat
sections problem, grid, solver, analysis, output).  Unknown sections or keys
are rejected rather than ignored, and every value is parsed before any
computation starts; a typo in a tolerance knob fails the run instead of
silently changing it.  Numeric output is serialized with repr, the shortest
decimal string that round-trips the double, so identical runs produce
byte-identical files and a written solution reloads without loss.

Exit codes: 0 success, 1 at least one verification check failed,
2 configuration error, 3 the iteration failed to converge.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from pathlib import Path

import numpy as np

from fracradial.decay_analysis import (
    bound_constants,
    fit_tail,
    predict_decay,
    sharp_constant,
    verify_chain_rule,
    verify_riesz_tail,
)
from fracradial.radial_ops import (
    RadialFunction,
    RadialGrid,
    frac_laplacian_on_grid,
    h_beta_function,
)
from fracradial.solver import (
    NonlinearitySpec,
    ProblemParams,
    Solution,
    SolverOpts,
    ZeroCollapseError,
    solve_ground_state,
)
from fracradial.specfun import (
    NonConvergenceError,
    ProfileParams,
    frac_lap_h_asymptotic,
    frac_lap_h_exact,
    h_beta_eval,
)

SCHEMA_VERSION = 1

# quadrature-vs-closed-form comparisons run by the oracle command:
# (N, s, beta) triples with a hypergeometric reference, all expected to agree
# to 1e-3 on r in [0.1, 50] at the default grid resolution
_ORACLE_CASES = ((3, 0.5, 2.0), (3, 0.5, 3.5), (2, 0.5, 2.5), (3, 0.25, 3.0))
_ORACLE_TOLERANCE = 1e-3
_ORACLE_WINDOW = (0.1, 50.0)

# default radii for the pointwise chain-rule check; well inside the grid
_CHAIN_RADII = (0.5, 1.0, 5.0, 20.0)


class ConfigError(ValueError):
    """Invalid configuration: unknown key, bad value, or malformed file."""


# ---------------------------------------------------------------------------
# configuration document


def _parse_float(text: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValueError("must be finite")
    return value


def _parse_int(text: str) -> int:
    return int(text)


def _parse_optional_float(text: str) -> float | None:
    return None if text.strip() == "" else _parse_float(text)


def _parse_convention(text: str) -> str:
    if text not in ("sqrt_r", "power"):
        raise ValueError(f"must be 'sqrt_r' or 'power', got {text!r}")
    return text


def _parse_float_pair(text: str) -> tuple[float, float]:
    parts = [p for p in text.split(",") if p.strip() != ""]
    if len(parts) != 2:
        raise ValueError(f"need two comma-separated numbers, got {text!r}")
    return (_parse_float(parts[0]), _parse_float(parts[1]))


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(_parse_float(p) for p in text.split(",") if p.strip() != "")


def _parse_formats(text: str) -> tuple[str, ...]:
    out: list[str] = []
    for part in text.split(","):
        part = part.strip()
        if part == "":
            continue
        if part not in ("csv", "json"):
            raise ValueError(f"unknown format {part!r}, choose from csv, json")
        if part not in out:
            out.append(part)
    if not out:
        raise ValueError("at least one output format is required")
    return tuple(out)


# section -> key -> (parser, default).  The seed is recorded but unused: the
# whole pipeline is deterministic; the knob exists so configs stay valid once
# stochastic components appear.
_CONFIG_SCHEMA = {
    "problem": {
        "n": (_parse_int, "3"),
        "s": (_parse_float, "0.5"),
        "alpha": (_parse_float, "2.0"),
        "mu": (_parse_float, "1.0"),
        "r": (_parse_float, "1.7"),
        "convention": (_parse_convention, "sqrt_r"),
    },
    "grid": {
        "r_min": (_parse_float, "1e-3"),
        "r_max": (_parse_float, "1e3"),
        "nodes": (_parse_int, "1200"),
    },
    "solver": {
        "tolerance": (_parse_float, "1e-10"),
        "max_iter": (_parse_int, "5000"),
        "damping": (_parse_float, "0.5"),
        "init_profile": (_parse_optional_float, ""),
        "seed": (_parse_int, "0"),
    },
    "analysis": {
        "fit_window": (_parse_float_pair, "50,100"),
        "theta": (_parse_optional_float, ""),
        "chain_rule_theta": (_parse_float_list, ""),
        "kappa": (_parse_optional_float, ""),
    },
    "output": {
        "directory": (str, "."),
        "formats": (_parse_formats, "csv,json"),
    },
}


def load_config(path: str | None, overrides: list[str]) -> dict:
    """Read, override, and fully parse one configuration document.

    Args:
        path: INI file, or None for pure defaults.
        overrides: "section.key=value" strings applied after the file.

    Raises:
        ConfigError: unreadable file, unknown section or key, or a value
            that does not parse; messages name the offending field.
    """
    raw = {sec: dict(keys) for sec, keys in
           ((s, {k: d for k, (_, d) in ks.items()})
            for s, ks in _CONFIG_SCHEMA.items())}

    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"malformed config {path!r}: {exc}") from exc
        for sec in parser.sections():
            if sec not in _CONFIG_SCHEMA:
                raise ConfigError(f"unknown config section [{sec}]")
            for key, value in parser.items(sec):
                if key not in _CONFIG_SCHEMA[sec]:
                    raise ConfigError(f"unknown config key {sec}.{key}")
                raw[sec][key] = value

    for item in overrides:
        target, sep, value = item.partition("=")
        sec, dot, key = target.partition(".")
        if not sep or not dot or sec not in _CONFIG_SCHEMA \
                or key not in _CONFIG_SCHEMA[sec]:
            raise ConfigError(
                f"override {item!r} is not of the form section.key=value "
                "with a known field")
        raw[sec][key] = value

    cfg: dict = {}
    for sec, keys in _CONFIG_SCHEMA.items():
        cfg[sec] = {}
        for key, (parse, _) in keys.items():
            try:
                cfg[sec][key] = parse(raw[sec][key])
            except ValueError as exc:
                raise ConfigError(f"{sec}.{key}: {exc}") from exc
    return cfg


def _build_problem(cfg: dict) -> ProblemParams:
    p = cfg["problem"]
    try:
        spec = NonlinearitySpec.homogeneous(p["r"], convention=p["convention"])
        return ProblemParams(N=p["n"], s=p["s"], alpha=p["alpha"], mu=p["mu"],
                             nonlinearity=spec)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_grid(cfg: dict, N: int) -> RadialGrid:
    g = cfg["grid"]
    try:
        return RadialGrid.log_spaced(r_min=g["r_min"], r_max=g["r_max"],
                                     num=g["nodes"], N=N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _build_solver_opts(cfg: dict, grid: RadialGrid) -> SolverOpts:
    s = cfg["solver"]
    init = None
    if s["init_profile"] is not None:
        if s["init_profile"] <= 0.0:
            raise ConfigError("solver.init_profile: the initial bump exponent "
                              "must be positive")
        init = h_beta_function(grid, s["init_profile"])
    try:
        return SolverOpts(grid=grid, tolerance=s["tolerance"],
                          max_iterations=s["max_iter"], damping=s["damping"],
                          initial_profile=init)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# serialization


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2)
        fh.write("\n")


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit_table(cfg: dict, stem: str, header: list[str], rows: list[list],
                payload: dict) -> list[Path]:
    out = _out_dir(cfg)
    written = []
    for fmt in cfg["output"]["formats"]:
        path = out / f"{stem}.{fmt}"
        if fmt == "csv":
            _write_csv(path, header, rows)
        else:
            _write_json(path, payload)
        written.append(path)
    return written


def _solution_record(sol: Solution, cfg: dict) -> dict:
    params = sol.params
    spec = params.nonlinearity
    if not spec.is_homogeneous:
        raise ConfigError("only homogeneous nonlinearities are serializable")
    pred = predict_decay(params)
    u = sol.u
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "fracradial.solution",
        "problem": {
            "n": params.N, "s": params.s, "alpha": params.alpha,
            "mu": params.mu, "r": spec.r, "convention": spec.convention,
        },
        "solver": dict(cfg["solver"]),
        "grid": {
            "n": u.grid.N, "r_max": u.grid.r_max,
            "nodes": u.grid.nodes, "weights": u.grid.weights,
        },
        "profile": {
            "values": u.values,
            "value_at_origin": u.value_at_origin,
            "tail_amplitude": u.tail_amplitude,
            "tail_exponent": u.tail_exponent,
        },
        "diagnostics": {
            "iterations": sol.iterations,
            "residual_sup": sol.residual_sup,
            "pohozaev_defect": sol.pohozaev_defect,
            "norm_r": sol.norm_r,
            "mass_F": sol.mass_F,
            "sup": float(np.max(u.values)),
            "predicted_beta": pred.beta,
            "regime": pred.regime,
        },
    }


def load_solution(path: str) -> Solution:
    """Rebuild a Solution from a record written by the solve command."""
    try:
        with open(path, encoding="utf-8") as fh:
            rec = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read solution {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed solution {path!r}: {exc}") from exc
    if rec.get("kind") != "fracradial.solution" \
            or rec.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"{path!r} is not a schema-version-{SCHEMA_VERSION} solution record")
    try:
        pr = rec["problem"]
        spec = NonlinearitySpec.homogeneous(pr["r"], convention=pr["convention"])
        params = ProblemParams(N=pr["n"], s=pr["s"], alpha=pr["alpha"],
                               mu=pr["mu"], nonlinearity=spec)
        gr = rec["grid"]
        grid = RadialGrid(nodes=np.asarray(gr["nodes"], dtype=float),
                          weights=np.asarray(gr["weights"], dtype=float),
                          r_max=gr["r_max"], N=gr["n"])
        prof = rec["profile"]
        u = RadialFunction(grid=grid,
                           values=np.asarray(prof["values"], dtype=float),
                           tail=(prof["tail_amplitude"], prof["tail_exponent"]),
                           value_at_origin=prof["value_at_origin"])
        diag = rec["diagnostics"]
        return Solution(u=u, params=params,
                        residual_sup=diag["residual_sup"],
                        pohozaev_defect=diag["pohozaev_defect"],
                        iterations=diag["iterations"],
                        norm_r=diag["norm_r"], mass_F=diag["mass_F"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solution record {path!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# commands


def _cmd_specfun_table(cfg: dict, args) -> int:
    N = cfg["problem"]["n"]
    s = cfg["problem"]["s"]
    beta = args.beta
    try:
        radii = _parse_float_list(args.radii)
        profile = ProfileParams(N, s, beta)
        law = frac_lap_h_asymptotic(profile)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    rows = []
    for r in radii:
        exact = frac_lap_h_exact(r, profile)
        asym = float(law.evaluate(r))
        ratio = exact / asym if asym != 0.0 else float("inf")
        rows.append([r, h_beta_eval(r, beta), exact, asym, ratio])

    header = ["radius", "h_beta", "fraclap_exact", "fraclap_asymptotic", "ratio"]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fracradial.specfun_table",
        "problem": {"n": N, "s": s, "beta": beta},
        "asymptotic_regime": law.regime,
        "rows": [dict(zip(header, row)) for row in rows],
    }
    for path in _emit_table(cfg, "specfun_table", header, rows, payload):
        print(f"wrote {path}")
    print(f"specfun-table: {len(rows)} radii, regime {law.regime}")
    return 0


def _cmd_oracle(cfg: dict, args) -> int:
    if args.case:
        try:
            cases = []
            for text in args.case:
                n_str, s_str, b_str = (text.split(",") + ["", "", ""])[:3]
                cases.append((int(n_str), float(s_str), float(b_str)))
        except ValueError as exc:
            raise ConfigError(f"--case expects N,s,beta: {exc}") from exc
    else:
        cases = list(_ORACLE_CASES)

    g = cfg["grid"]
    lo, hi = _ORACLE_WINDOW
    rows = []
    worst = 0.0
    for (N, s, beta) in cases:
        try:
            grid = RadialGrid.log_spaced(r_min=g["r_min"], r_max=g["r_max"],
                                         num=g["nodes"], N=N)
            profile = ProfileParams(N, s, beta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        h = h_beta_function(grid, beta)
        lap = frac_laplacian_on_grid(h, s)
        sel = (grid.nodes >= lo) & (grid.nodes <= hi)
        want = np.array([frac_lap_h_exact(r, profile) for r in grid.nodes[sel]])
        err = float(np.max(np.abs(lap[sel] / want - 1.0)))
        worst = max(worst, err)
        passed = err <= _ORACLE_TOLERANCE
        rows.append([N, s, beta, err, _ORACLE_TOLERANCE, passed])
        status = "PASS" if passed else "FAIL"
        print(f"{status} oracle ({N}, {s}, {beta}): max rel err {err:.3e} "
              f"(tolerance {_ORACLE_TOLERANCE:.0e})")

    header = ["n", "s", "beta", "max_rel_err", "tolerance", "passed"]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fracradial.oracle_report",
        "grid": dict(g),
        "window": list(_ORACLE_WINDOW),
        "rows": [dict(zip(header, row)) for row in rows],
    }
    for path in _emit_table(cfg, "oracle_report", header, rows, payload):
        print(f"wrote {path}")
    return 0 if worst <= _ORACLE_TOLERANCE else 1


def _solve_from_config(cfg: dict) -> Solution:
    params = _build_problem(cfg)
    grid = _build_grid(cfg, params.N)
    opts = _build_solver_opts(cfg, grid)
    return solve_ground_state(params, opts)


def _cmd_solve(cfg: dict, args) -> int:
    sol = _solve_from_config(cfg)
    record = _solution_record(sol, cfg)
    out = _out_dir(cfg)
    sol_path = out / "solution.json"
    _write_json(sol_path, record)
    print(f"wrote {sol_path}")

    beta = record["diagnostics"]["predicted_beta"]
    nodes = sol.u.grid.nodes
    rows = [[r, u, u * r ** beta]
            for r, u in zip(nodes.tolist(), sol.u.values.tolist())]
    header = ["radius", "u", "u_scaled"]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fracradial.profile_table",
        "scaling_exponent": beta,
        "rows": [dict(zip(header, row)) for row in rows],
    }
    for path in _emit_table(cfg, "profile", header, rows, payload):
        print(f"wrote {path}")

    d = record["diagnostics"]
    print(f"converged in {d['iterations']} iterations: sup u = {d['sup']:.6e}, "
          f"residual = {d['residual_sup']:.3e}, defect = {d['pohozaev_defect']:.3e}")
    print(f"predicted decay: beta = {beta!r} ({d['regime']})")
    return 0


def _verify_checks(sol: Solution, cfg: dict) -> tuple[list[dict], dict]:
    """All decay checks for one solution; returns (checks, report numbers)."""
    params = sol.params
    ana = cfg["analysis"]
    pred = predict_decay(params)
    checks: list[dict] = []

    def add(name, passed, measured, reference, tolerance):
        checks.append({"name": name, "passed": bool(passed),
                       "measured": float(measured),
                       "reference": float(reference),
                       "tolerance": float(tolerance)})

    fit = fit_tail(sol.u, ana["fit_window"])
    add("fit_exponent", abs(fit.fitted_exponent - pred.beta) <= 0.1 * pred.beta,
        fit.fitted_exponent, pred.beta, 0.1)

    constants: dict = {"sharp": None}
    if pred.regime == "choquard_dominated":
        c_sharp = sharp_constant(sol)
        constants["sharp"] = c_sharp
        grid = sol.u.grid
        lo, hi = ana["fit_window"]
        sel = (grid.nodes >= lo) & (grid.nodes <= hi)
        product = sol.u.values[sel] * grid.nodes[sel] ** pred.beta
        dev = float(np.max(np.abs(product - c_sharp))) / c_sharp
        add("tail_constant", dev <= 0.2, dev, 0.0, 0.2)

    bounds = bound_constants(sol, kappa=ana["kappa"])
    constants.update(C_upper=bounds.C_upper, C_lower=bounds.C_lower,
                     kappa=bounds.kappa, kappa_star=bounds.kappa_star)
    add("bounds_ordered", bounds.C_lower <= bounds.C_upper * (1.0 + 1e-12),
        bounds.C_lower / bounds.C_upper, 1.0, 1e-12)
    if bounds.kappa_star is not None:
        at_star = bound_constants(sol)
        gap = abs(at_star.C_upper - at_star.C_lower) / at_star.C_lower
        invariant = all(
            bound_constants(sol, kappa=m * at_star.kappa_star).C_lower
            == at_star.C_lower for m in (2.0, 3.0, 10.0))
        add("kappa_ledger", gap <= 1e-10 and invariant, gap, 0.0, 1e-10)

    theta = ana["theta"]
    if theta is None:
        theta = params.N + params.alpha
    riesz = verify_riesz_tail(sol, theta=theta)
    ratio_end = float(riesz.normalized_ratio[-1])
    add("riesz_tail", abs(ratio_end - 1.0) <= 0.05, ratio_end, 1.0, 0.05)

    thetas = ana["chain_rule_theta"]
    if not thetas:
        r = params.nonlinearity.r
        thetas = (0.3,) if abs(2.0 - r - 0.3) < 1e-12 else (0.3, 2.0 - r)
    chain_reports = []
    for th in thetas:
        rep = verify_chain_rule(sol.u, th, list(_CHAIN_RADII), params.s)
        worst = float(np.min(rep.margin / rep.scale))
        add(f"chain_rule_theta_{th:g}", rep.passed, worst, 0.0, rep.tolerance)
        chain_reports.append({"theta": th, "min_margin_over_scale": worst,
                              "passed": rep.passed})

    numbers = {
        "prediction": {"beta": pred.beta, "regime": pred.regime,
                       "r_star": pred.r_star},
        "fit": {"window": list(fit.window),
                "fitted_exponent": fit.fitted_exponent,
                "fitted_amplitude": fit.fitted_amplitude,
                "rms_log_residual": fit.rms_log_residual,
                "log_corrected": fit.log_corrected},
        "constants": constants,
        "riesz_tail": {"theta": riesz.theta, "mass": riesz.mass,
                       "normalized_ratio_end": ratio_end,
                       "sup_deviation": riesz.sup_deviation},
        "chain_rule": chain_reports,
    }
    return checks, numbers


def _cmd_verify_decay(cfg: dict, args) -> int:
    if args.solution is not None:
        sol = load_solution(args.solution)
    else:
        sol = _solve_from_config(cfg)
    checks, numbers = _verify_checks(sol, cfg)

    params = sol.params
    payload = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fracradial.verify_report",
        "problem": {
            "n": params.N, "s": params.s, "alpha": params.alpha,
            "mu": params.mu, "r": params.nonlinearity.r,
            "convention": params.nonlinearity.convention,
        },
        **numbers,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    header = ["name", "passed", "measured", "reference", "tolerance"]
    rows = [[c[k] for k in header] for c in checks]
    for path in _emit_table(cfg, "verify_report", header, rows, payload):
        print(f"wrote {path}")

    pred = numbers["prediction"]
    print(f"predicted decay: beta = {pred['beta']!r} ({pred['regime']})")
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        print(f"{status} {c['name']}: measured {c['measured']!r} "
              f"(reference {c['reference']!r}, tolerance {c['tolerance']!r})")
    return 0 if payload["passed"] else 1


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="INI configuration document")
    common.add_argument("--out", metavar="DIR",
                        help="output directory (overrides output.directory)")
    common.add_argument("--format", choices=("csv", "json"),
                        help="restrict outputs to one format")
    common.add_argument("--set", action="append", default=[],
                        metavar="SECTION.KEY=VALUE",
                        help="override any config field; repeatable")

    parser = argparse.ArgumentParser(
        prog="fracradial",
        description="Tables, oracle comparisons, ground-state solves, and "
                    "decay verification for the doubly nonlocal equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("specfun-table", parents=[common],
                       help="tabulate h_beta, its fractional Laplacian, and "
                            "the far-field model")
    p.add_argument("--beta", type=float, default=2.0,
                   help="profile exponent (default 2.0)")
    p.add_argument("--radii", default="1,10,100",
                   help="comma-separated radii; empty for a header-only table")

    sub.add_parser("oracle", parents=[common],
                   help="compare quadrature against the closed form on the "
                        "configured grid").add_argument(
        "--case", action="append", metavar="N,S,BETA",
        help="run a single comparison instead of the default four; repeatable")

    sub.add_parser("solve", parents=[common],
                   help="solve the configured problem and write the solution "
                        "record plus a plot-ready profile table")

    p = sub.add_parser("verify-decay", parents=[common],
                       help="run the decay checks on a fresh solve or a "
                            "stored solution record")
    p.add_argument("--solution", metavar="PATH",
                   help="verify this solution record instead of solving")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, list(args.set))
        if args.out is not None:
            cfg["output"]["directory"] = args.out
        if args.format is not None:
            cfg["output"]["formats"] = (args.format,)
        if args.command == "specfun-table":
            return _cmd_specfun_table(cfg, args)
        if args.command == "oracle":
            return _cmd_oracle(cfg, args)
        if args.command == "solve":
            return _cmd_solve(cfg, args)
        return _cmd_verify_decay(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, ZeroCollapseError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
