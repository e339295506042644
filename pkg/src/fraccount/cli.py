"""Command-line runner: ``frac-count <command> [config.json] [flags]``.

Exit codes: 0 ok, 2 config error, 3 numeric check failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import counting as C
from . import risk as R
from .report import build_report, canonical_json, to_jsonable, write_report
from .specfun import WrightSpec, digamma, gen_binomial, mittag_leffler_3p, wright_pq
from .subordinators import (
    GammaParams,
    MixtureParams,
    RngStream,
    TssParams,
    laplace_exponent_composed,
)
from .verify import SUITES, format_matrix, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ schemas

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}

PROCESS = {
    "type": "object",
    "properties": {
        "lambdas": {"type": "array", "items": _pos, "minItems": 1, "maxItems": 5},
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "theta": _nonneg,
        "mu": _pos,
        "rho": _pos,
    },
    "required": ["lambdas", "alpha", "theta"],
    "additionalProperties": False,
}

CLAIM = {
    "oneOf": [
        {"type": "object", "properties": {"kind": {"const": "exponential"}, "mean": _pos},
         "required": ["kind", "mean"], "additionalProperties": False},
        {"type": "object", "properties": {"kind": {"const": "deterministic"}, "value": _nonneg},
         "required": ["kind", "value"], "additionalProperties": False},
        {"type": "object", "properties": {"kind": {"const": "uniform"}, "a": _nonneg, "b": _pos},
         "required": ["kind", "a", "b"], "additionalProperties": False},
        {"type": "object", "properties": {"kind": {"const": "empirical"},
                                          "values": {"type": "array", "items": _nonneg, "minItems": 1}},
         "required": ["kind", "values"], "additionalProperties": False},
    ]
}

MODEL = {
    "type": "object",
    "properties": {
        "lambda0": _nonneg, "lambda1": _nonneg, "lambda2": _nonneg,
        "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
        "theta": _nonneg, "mu": _pos, "rho": _pos,
        "claims": {"type": "array", "items": CLAIM, "minItems": 4, "maxItems": 4},
        "omega": _pos, "nu": _nonneg,
    },
    "required": ["lambda0", "lambda1", "lambda2", "alpha", "theta", "mu", "rho", "claims", "omega"],
    "additionalProperties": False,
}

MIXTURE = {
    "type": "object",
    "properties": {
        "eta1": _nonneg, "eta2": _nonneg,
        "alpha1": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}, "theta1": _nonneg,
        "alpha2": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}, "theta2": _nonneg,
    },
    "required": ["eta1", "eta2", "alpha1", "theta1", "alpha2", "theta2"],
    "additionalProperties": False,
}

_common = {
    "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
    "output": {"type": "string"},
    "verbosity": {"type": "integer", "minimum": 0},
}
_kvec = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 0},
                                     "minItems": 1}, "minItems": 1}


def _schema(props: dict, required: list) -> dict:
    return {"type": "object", "properties": {**_common, **props}, "required": required,
            "additionalProperties": False}


SCHEMAS = {
    "pmf": _schema({"process": PROCESS, "t": _pos, "k": _kvec,
                    "method": {"enum": ["series", "inversion", "quadrature"]},
                    "M": {"type": "integer", "minimum": 8}, "nodes": {"type": "integer", "minimum": 16}},
                   ["process", "t", "k"]),
    "pgf": _schema({"process": PROCESS, "t": _nonneg,
                    "u": {"type": "array", "items": {"type": "array", "items": {"type": "number"}},
                          "minItems": 1}},
                   ["process", "t", "u"]),
    "levy": _schema({"process": PROCESS, "k": _kvec,
                     "method": {"enum": ["series", "inversion"]}}, ["process", "k"]),
    "simulate": _schema({"process": PROCESS, "t": _pos,
                         "kind": {"enum": ["terminal", "path", "mmtsfpp", "mmttfpp"]},
                         "mixture": MIXTURE, "paths": {"type": "integer", "minimum": 1},
                         "grid_dt": _pos}, ["process", "t"]),
    "ruin": _schema({"model": MODEL, "u_max": _pos, "h_u": _pos, "horizon": _pos,
                     "paths": {"type": "integer", "minimum": 1}, "grid_dt": _pos, "y": _nonneg,
                     "claims_per_event": {"enum": ["single", "batch"]}}, ["model"]),
    "lrd": _schema({"model": MODEL, "s": _pos,
                    "t_list": {"type": "array", "items": _pos, "minItems": 2},
                    "paths": {"type": "integer", "minimum": 2}}, ["model", "s", "t_list"]),
}


def _locate(err: jsonschema.ValidationError) -> str:
    path = "/".join(str(p) for p in err.absolute_path) or "<root>"
    return f"{path}: {err.message}"


def load_config(command: str, path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError:
        raise
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(SCHEMAS[command])
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError("; ".join(_locate(e) for e in errors))
    return cfg


def process_from(block: dict) -> C.ProcessParams:
    tss = TssParams(block["alpha"], block["theta"])
    gamma = None
    if "mu" in block or "rho" in block:
        if not ("mu" in block and "rho" in block):
            raise ConfigError("process: mu and rho must be given together")
        gamma = GammaParams(block["mu"], block["rho"])
    return C.ProcessParams(block["lambdas"], tss, gamma)


def model_from(block: dict) -> R.ShockModelConfig:
    claims = tuple(R.ClaimDistribution.from_record(c) for c in block["claims"])
    return R.ShockModelConfig(block["lambda0"], block["lambda1"], block["lambda2"],
                              TssParams(block["alpha"], block["theta"]),
                              GammaParams(block["mu"], block["rho"]), claims,
                              block["omega"], block.get("nu", 0.0))


def _check_dims(p: C.ProcessParams, ks):
    for k in ks:
        if len(k) != p.m:
            raise ConfigError(f"k={k} does not match the process dimension {p.m}")


# ------------------------------------------------------------------ commands

def cmd_pmf(cfg: dict, args):
    p = process_from(cfg["process"])
    _check_dims(p, cfg["k"])
    method = (args.method or [cfg.get("method", "series")])[-1]
    t = cfg["t"]
    rows, recs = [], []
    for k in cfg["k"]:
        if method == "series":
            res = (C.pmf_mtsfnbp if p.is_nb else C.pmf_mtsfpp)(k, t, p, full_output=True)
        elif method == "inversion":
            res = C.pmf_by_inversion(k, t, C.pgf_for(p), cfg.get("M", 128), full_output=True)
        elif method == "quadrature":
            if not p.is_nb:
                raise ConfigError("quadrature needs mu and rho in the process block")
            res = C.pmf_by_quadrature(k, t, p, cfg.get("nodes", 64), full_output=True)
        else:
            raise ConfigError(f"method {method!r} does not apply to pmf")
        recs.append({"k": k, **res.to_record()})
        rows.append([" ".join(map(str, k)), res.value, res.abs_error_bound, res.method])
    checks = [{"check": "pmf_in_unit_interval", "passed": all(0 <= r["value"] <= 1 for r in recs)}]
    return {"method": method, "pmf": recs}, checks, {"pmf": (["k", "value", "abs_error_bound", "method"], rows)}


def cmd_pgf(cfg: dict, args):
    p = process_from(cfg["process"])
    vals = []
    for u in cfg["u"]:
        if len(u) != p.m:
            raise ConfigError(f"u={u} does not match the process dimension {p.m}")
        g = (C.pgf_mtsfnbp if p.is_nb else C.pgf_mtsfpp)(u, cfg["t"], p)
        vals.append({"u": u, "re": g.real, "im": g.imag})
    return {"pgf": vals}, [], None


def cmd_levy(cfg: dict, args):
    p = process_from(cfg["process"])
    if not p.is_nb:
        raise ConfigError("levy needs mu and rho in the process block")
    _check_dims(p, cfg["k"])
    methods = args.method or [cfg.get("method", "series")]
    recs, rows = [], []
    for k in cfg["k"]:
        rec = {"k": k}
        if "series" in methods:
            rec["series"] = C.levy_mass(k, p, full_output=True).to_record()
        if "inversion" in methods:
            rec["inversion"] = C.levy_mass_by_inversion(k, p)
        recs.append(rec)
        rows.append([" ".join(map(str, k)), rec.get("series", {}).get("value", float("nan")),
                     rec.get("inversion", float("nan"))])
    checks = []
    if "series" in methods and "inversion" in methods:
        worst = max(abs(r["series"]["value"] - r["inversion"]) / max(abs(r["inversion"]), 1e-300)
                    for r in recs)
        checks.append({"check": "levy_series_vs_inversion", "value": worst, "tolerance": 1e-8,
                       "passed": worst < 1e-8})
    return ({"levy_mass": recs, "total_jump_rate": C.total_jump_rate(p)}, checks,
            {"levy": (["k", "series", "inversion"], rows)})


def cmd_simulate(cfg: dict, args):
    p = process_from(cfg["process"])
    kind = cfg.get("kind", "terminal")
    n = args.paths or cfg.get("paths", 10_000)
    seed = _seed(cfg, args)
    gen = RngStream(seed, 1).generator()
    t = cfg["t"]
    grid_dt = args.grid_dt or cfg.get("grid_dt", 0.01)
    if kind == "terminal":
        draws = C.sample_terminal(t, p, gen, size=n)
    elif kind == "path":
        paths = [C.sample_path(t, p, grid_dt, gen) for _ in range(n)]
        draws = np.array([q.terminal for q in paths])
    elif kind in ("mmtsfpp", "mmttfpp"):
        if "mixture" not in cfg:
            raise ConfigError(f"kind {kind!r} needs a mixture block")
        mb = cfg["mixture"]
        mix = MixtureParams(mb["eta1"], mb["eta2"], TssParams(mb["alpha1"], mb["theta1"]),
                            TssParams(mb["alpha2"], mb["theta2"]))
        if kind == "mmtsfpp":
            draws = C.mmtsfpp_terminal(t, p.lambdas, mix, gen, size=n)
        else:
            draws = C.mmttfpp_terminal(t, p.lambdas, mix, grid_dt, gen, size=n)
    else:
        raise ConfigError(f"unknown kind {kind!r}")
    draws = np.asarray(draws, dtype=float)
    res = {
        "kind": kind,
        "paths": n,
        "mean": draws.mean(axis=0),
        "cov": np.atleast_2d(np.cov(draws, rowvar=False)),
        "prob_zero": float(np.mean(np.all(draws == 0, axis=1))),
    }
    if kind in ("terminal", "path"):
        res["pgf_at_zero"] = (C.pgf_mtsfnbp if p.is_nb else C.pgf_mtsfpp)(np.zeros(p.m), t, p).real
        if p.tss.theta > 0 or p.tss.alpha == 1:
            res["mean_formula"] = C.mean_counts(t, p)
    rows = [list(map(int, d)) for d in draws]
    return res, [], {"draws": ([f"N{i + 1}" for i in range(p.m)], rows)}


def cmd_ruin(cfg: dict, args):
    model = model_from(cfg["model"])
    methods = args.method or ["ode"]
    bad = set(methods) - {"mc", "ode"}
    if bad:
        raise ConfigError(f"ruin supports --method mc|ode, got {sorted(bad)}")
    out, checks, tables = {"loading": R.premium_loading(model).to_record()}, [], {}
    out["composed_exponent"] = {
        "corrected_log_mu": laplace_exponent_composed(model.lam, model.tss, model.gamma, "corrected"),
        "printed_log_alpha": laplace_exponent_composed(model.lam, model.tss, model.gamma, "printed"),
    }
    u_max = cfg.get("u_max", 20.0)
    h_u = cfg.get("h_u")
    if "ode" in methods:
        cpe = cfg.get("claims_per_event", "single")
        grid = R.solve_ruin_ode(model, u_max, h_u, claims_per_event=cpe)
        out["ode"] = {"p0": grid.values[0], "p0_closed_form": grid.diagnostics["p0_closed_form"],
                      "at_nu": grid.at(model.nu), "diagnostics": grid.diagnostics}
        tables["ode"] = (["u", "P"], grid.to_rows())
        if "y" in cfg:
            jg = R.solve_joint_ruin_ode(model, cfg["y"], u_max, h_u, claims_per_event=cpe)
            out["ode"]["joint"] = {"y": cfg["y"], "j0": jg.values[0], "at_nu": jg.at(model.nu)}
            tables["joint"] = (["u", "J"], jg.to_rows())
    if "mc" in methods:
        est = R.estimate_ruin_mc(model, cfg.get("horizon"), args.paths or cfg.get("paths", 100_000),
                                 args.grid_dt or cfg.get("grid_dt"), RngStream(_seed(cfg, args), 7),
                                 threads=args.threads)
        out["mc"] = est.to_record()
    if "mc" in methods and "ode" in methods:
        gap = out["mc"]["ruin_prob"] - out["ode"]["at_nu"]
        out["gap"] = {"mc_minus_ode": gap, "within_mc_ci": abs(gap) <= out["mc"]["ci_halfwidth"],
                      "note": "the ODE uses one claim per jump event; the simulation pays one "
                              "claim per unit of a batch jump"}
    return out, checks, tables


def cmd_lrd(cfg: dict, args):
    model = model_from(cfg["model"])
    ts = cfg["t_list"]
    out = {"corr": [R.risk_correlation(cfg["s"], t, model) for t in ts]}
    try:
        out["formula"] = R.lrd_check(model, cfg["s"], ts).to_record()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n = args.paths or cfg.get("paths")
    if n:
        slope, corr = R.lrd_slope_mc(model, cfg["s"], ts, n, RngStream(_seed(cfg, args), 9).generator())
        out["mc"] = {"slope": slope, "corr": corr}
    rows = [[t, c] for t, c in zip(ts, out["corr"])]
    return out, [], {"corr": (["t", "corr"], rows)}


COMMANDS = {"pmf": cmd_pmf, "pgf": cmd_pgf, "levy": cmd_levy, "simulate": cmd_simulate,
            "ruin": cmd_ruin, "lrd": cmd_lrd}


def _seed(cfg: dict, args) -> int:
    if args.seed is not None:
        return args.seed
    return int(cfg.get("seed", 0))


def _specfun_eval(args) -> dict:
    name, vals = args.function, args.args
    try:
        if name == "mittag_leffler":
            a, b, g, z = map(float, vals)
            res = mittag_leffler_3p(a, b, g, z, full_output=True).to_record()
        elif name == "wright":
            spec = json.loads(vals[0])
            res = wright_pq(WrightSpec(spec["upper"], spec["lower"]), float(vals[1]),
                            start=int(spec.get("start", 0)), full_output=True).to_record()
        elif name == "digamma":
            res = {"value": digamma(float(vals[0]))}
        elif name == "gen_binomial":
            res = {"value": gen_binomial(float(vals[0]), int(vals[1]))}
        else:
            raise ConfigError(f"unknown function {name!r}")
    except (IndexError, ValueError, KeyError, json.JSONDecodeError) as exc:
        if isinstance(exc, ArithmeticError):
            raise
        raise ConfigError(f"bad arguments for {name}: {exc}") from exc
    return {"function": name, "args": vals, **res}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frac-count", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", type=Path, default=None, help="directory for report files")
    common.add_argument("--paths", type=int, default=None)
    common.add_argument("--grid-dt", type=float, default=None)
    common.add_argument("--method", action="append",
                        choices=["mc", "ode", "series", "inversion", "quadrature"])
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("config")
    sp = sub.add_parser("specfun", parents=[common])
    sp.add_argument("action", choices=["eval"])
    sp.add_argument("function", choices=["mittag_leffler", "wright", "digamma", "gen_binomial"])
    sp.add_argument("args", nargs="*")
    sp = sub.add_parser("verify", parents=[common])
    sp.add_argument("suite", choices=[*SUITES, "all"])
    return ap


def summarize(command: str, results: dict) -> list[str]:
    """A few human-readable lines for the terminal."""
    lines = []
    if command == "pmf":
        for r in results["pmf"]:
            lines.append(f"P{tuple(r['k'])} = {r['value']:.12g}  (+/- {r['abs_error_bound']:.2g}, {r['method']})")
    elif command == "levy":
        for r in results["levy_mass"]:
            parts = [f"{m}={r[m]['value'] if m == 'series' else r[m]:.12g}"
                     for m in ("series", "inversion") if m in r]
            lines.append(f"nu{tuple(r['k'])}: " + ", ".join(parts))
    elif command == "ruin":
        ce = results["composed_exponent"]
        lines.append(f"clock exponent psi(S): corrected (log mu) {ce['corrected_log_mu']:.9g}, "
                     f"printed (log alpha) {ce['printed_log_alpha']:.9g}")
        if "ode" in results:
            lines.append(f"ODE  P(nu) = {results['ode']['at_nu']:.9g}  "
                         f"(closed-form P(0) = {results['ode']['p0_closed_form']:.9g})")
        if "mc" in results:
            mc = results["mc"]
            lines.append(f"MC   P(nu) = {mc['ruin_prob']:.6g} +/- {mc['ci_halfwidth']:.2g} "
                         f"({mc['n_ruined']}/{mc['n_paths']} ruined)")
        if "gap" in results:
            g = results["gap"]
            lines.append(f"gap MC - ODE = {g['mc_minus_ode']:+.6g} "
                         f"({'inside' if g['within_mc_ci'] else 'outside'} the MC interval)")
    elif command == "lrd":
        f = results["formula"]
        lines.append(f"corr slope {f['slope']:.4g}, d = {f['d']:.4g}, long-range dependent: {f['is_lrd']}")
    return lines


def _emit(args, command: str, report: dict, tables, started: float):
    if args.out is not None:
        paths = write_report(args.out, command, report, tables, started)
        for line in summarize(command, report["results"]):
            print(line)
        print(f"wrote {', '.join(str(p) for p in paths)}")
    else:
        sys.stdout.write(canonical_json(report))


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    started = time.time()
    try:
        if args.command == "verify":
            seed = 42 if args.seed is None else args.seed
            rows = run_suite(args.suite, seed, threads=args.threads)
            print(format_matrix(rows))
            ok = all(r.passed for r in rows)
            resolved = {"suite": args.suite, "seed": seed}
            report = build_report("verify", resolved, {"n_checks": len(rows),
                                                       "n_failed": sum(not r.passed for r in rows)},
                                  [r.to_record() for r in rows], "ok" if ok else "failed")
            if args.out is not None:
                write_report(args.out, f"verify-{args.suite}", to_jsonable(report), None, started)
            return EXIT_OK if ok else EXIT_NUMERIC
        if args.command == "specfun":
            res = _specfun_eval(args)
            report = build_report("specfun eval", {"function": args.function, "args": args.args}, res)
            _emit(args, "specfun", to_jsonable(report), None, started)
            return EXIT_OK
        cfg = load_config(args.command, args.config)
        resolved = dict(cfg)
        resolved["cli"] = {k: v for k, v in (("seed", args.seed), ("paths", args.paths),
                                             ("grid_dt", args.grid_dt), ("method", args.method))
                           if v is not None}
        results, checks, tables = COMMANDS[args.command](cfg, args)
        ok = all(c.get("passed", True) for c in checks)
        report = to_jsonable(build_report(args.command, resolved, results, checks,
                                          "ok" if ok else "failed"))
        _emit(args, args.command, report, tables, started)
        if not ok:
            failed = [c["check"] for c in checks if not c.get("passed", True)]
            print(f"frac-count: numeric check failed: {', '.join(failed)}", file=sys.stderr)
            return EXIT_NUMERIC
        return EXIT_OK
    except (ConfigError, jsonschema.ValidationError) as exc:
        print(f"frac-count: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"frac-count: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ArithmeticError as exc:
        print(f"frac-count: numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"frac-count: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
