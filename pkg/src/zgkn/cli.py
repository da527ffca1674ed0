"""Command-line surface: solve, scan, portrait, validate, explore.

Data goes to stdout (JSONL or CSV, deterministic field order, 17 significant
digits); human diagnostics go to stderr.  With --out, delimited output is
written to files and the report figures are rendered next to them.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .eigenmaps import energy_of_lambda, lambda_of_E
from .flows import FlowKind, FlowParams, sample_nullclines
from .model import ModelParams, ParameterError, check_admissibility, normalize
from .orbits import IntegratorControls, integrate_distinguished, mismatch
from .spectrum import AdmissibilityError, ConvergenceError, explore, solve_ground_pair
from .wavefunction import angular_profile, hilbert_norm, radial_profile, residuals

USAGE_ERROR = 2
NUMERICAL_ERROR = 1


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _threads() -> int:
    raw = os.environ.get("ZGKN_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def _read_config_file(path: str) -> dict[str, str]:
    """Plain key=value lines; '#' starts a comment; unknown keys are errors."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


_CONFIG_KEYS = {
    "a", "m", "e", "Q", "I", "gamma", "kappa",
    "tol", "max-iter", "rmax", "out", "format",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zgkn",
        description="Bound states of a Dirac electron on the zero-gravity "
        "Kerr-Newman ring spacetime.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="key=value config file; flags take precedence")
        sp.add_argument("--a", type=float, help="ring radius")
        sp.add_argument("--m", type=float, default=None, help="electron mass (default 1)")
        sp.add_argument("--e", type=float, default=None, help="elementary charge (default 1)")
        sp.add_argument("--Q", type=float, default=None, help="ring charge")
        sp.add_argument("--I", type=float, default=None, help="ring current")
        sp.add_argument(
            "--gamma", type=float, default=None,
            help="coupling -eQ; shorthand that overrides --e/--Q and fixes I = Q/(pi a)",
        )
        sp.add_argument("--kappa", type=float, default=None, help="half-integer (default 0.5)")
        sp.add_argument("--tol", type=float, default=None, help="fixed-point tolerance")
        sp.add_argument("--max-iter", type=int, default=None)
        sp.add_argument("--rmax", type=float, default=None, help="radial truncation")
        sp.add_argument("--out", default=None, help="output directory for files and figures")
        sp.add_argument("--format", choices=("json", "csv"), default=None)

    sp = sub.add_parser("solve", help="solve the ground connector pair")
    add_common(sp)
    sp.add_argument("--profiles", action="store_true", help="also export profile CSVs")
    sp.add_argument("--force", action="store_true", help="skip the coupling admissibility gate")

    sp = sub.add_parser("scan", help="tabulate the eigenvalue maps over grids")
    add_common(sp)
    sp.add_argument("--E-grid", default="0.3:0.99:9", help="lo:hi:n grid for Lambda(E)")
    sp.add_argument("--lambda-grid", default=None, help="lo:hi:n grid for E(lambda)")

    sp = sub.add_parser("portrait", help="export orbit and nullcline samples for one flow")
    add_common(sp)
    sp.add_argument("flow", choices=("theta", "omega"))
    sp.add_argument("--E", type=float, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--grid", type=int, default=256)

    sp = sub.add_parser("validate", help="run the invariant suite on given parameters")
    add_common(sp)

    sp = sub.add_parser("explore", help="scan for non-guaranteed connector candidates")
    add_common(sp)
    sp.add_argument("--grid", type=int, default=24)
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    """File values fill in flags left at None; flags win."""
    if not getattr(args, "config", None):
        return args
    values = _read_config_file(args.config)
    unknown = set(values) - _CONFIG_KEYS
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
    casts = {"max-iter": int, "out": str, "format": str}
    for key, raw in values.items():
        attr = key.replace("-", "_")
        if getattr(args, attr, None) is None:
            cast = casts.get(key, float)
            setattr(args, attr, cast(raw))
    return args


def _model_params(args: argparse.Namespace) -> ModelParams:
    if args.a is None:
        raise ParameterError("--a is required")
    a = args.a
    m = 1.0 if args.m is None else args.m
    kappa = 0.5 if args.kappa is None else args.kappa
    if args.gamma is not None:
        if args.Q is not None or args.e is not None:
            raise ParameterError("--gamma conflicts with --e/--Q; give one or the other")
        e = 1.0
        Q = -args.gamma
        I = Q / (math.pi * a)
    else:
        e = 1.0 if args.e is None else args.e
        Q = 0.0 if args.Q is None else args.Q
        I = Q / (math.pi * a) if args.I is None else args.I
    return ModelParams(a=a, m=m, e=e, Q=Q, I=I, kappa=kappa)


def _controls(args: argparse.Namespace) -> IntegratorControls:
    kwargs = {}
    if args.rmax is not None:
        kwargs["r_max"] = args.rmax
    return IntegratorControls(**kwargs)


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise ParameterError(f"grid must be lo:hi:n, got {text!r}") from exc


def _eigen_record(res, a, gamma) -> str:
    fields = [
        ("a", _fmt(a)),
        ("gamma", _fmt(gamma)),
        ("kappa", _fmt(res.kappa)),
        ("E", _fmt(res.E_star)),
        ("lambda", _fmt(res.lambda_star)),
        ("E_physical", _fmt(res.E_star * res.params_echo.E_scale)),
        ("residual_theta", _fmt(res.residuals[0])),
        ("residual_omega", _fmt(res.residuals[1])),
        ("iterations", str(res.iterations)),
        ("converged", "true" if res.converged else "false"),
    ]
    return "{" + ", ".join(f'"{k}": {v}' for k, v in fields) + "}"


def _write_csv(path_or_stream, header: list[str], rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if isinstance(path_or_stream, (str, Path)):
        Path(path_or_stream).write_text(text)
    else:
        path_or_stream.write(text)


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    d = Path(args.out)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _cmd_solve(args) -> int:
    params = _model_params(args)
    report = check_admissibility(params)
    if not report.all_ok and not args.force:
        for msg in report.messages:
            print(msg, file=sys.stderr)
        print(json.dumps({"error": "admissibility", "messages": report.messages}))
        return NUMERICAL_ERROR
    p = normalize(params)
    c = _controls(args)
    res = solve_ground_pair(
        p, c,
        max_iter=args.max_iter or 50,
        fix_tol=args.tol or 1e-10,
        force=args.force,
    )
    line = _eigen_record(res, p.a, p.gamma)
    print(line)
    out = _out_dir(args)
    if out is not None:
        (out / "eigenvalue.jsonl").write_text(line + "\n")
    if args.profiles:
        rad = radial_profile(p, res.E_star, res.lambda_star, c)
        ang = angular_profile(p, res.E_star, res.lambda_star, c)
        if out is not None:
            _write_csv(out / "radial_profile.csv", ["r", "Omega", "lnR"],
                       zip(rad.r, rad.Omega, rad.lnR))
            _write_csv(out / "angular_profile.csv", ["theta", "Theta", "lnS"],
                       zip(ang.theta, ang.Theta, ang.lnS))
            from .plotting import render_profiles
            render_profiles(out / "profiles.png", rad, ang)
        norm = hilbert_norm(rad, ang, p)
        print(f"norm_squared = {_fmt(norm.norm_squared)}", file=sys.stderr)
    return 0


def _cmd_scan(args) -> int:
    params = _model_params(args)
    p = normalize(params)
    c = _controls(args)
    out = _out_dir(args)

    Es = _parse_grid(args.E_grid)
    lam_rows = [(E, lambda_of_E(p, float(E), c)) for E in Es]
    if args.lambda_grid is not None:
        lams = _parse_grid(args.lambda_grid)
    else:
        lams = np.linspace(-1.0 - p.a, -1.0 + p.a, 9)
    e_rows = [(lam, energy_of_lambda(p, float(lam), c)) for lam in lams]

    if out is not None:
        _write_csv(out / "lambda_of_E.csv", ["E", "lambda"], lam_rows)
        _write_csv(out / "energy_of_lambda.csv", ["lambda", "E"], e_rows)
        from .plotting import render_scan
        render_scan(out / "lambda_of_E.png", [r[0] for r in lam_rows],
                    [r[1] for r in lam_rows], "E", "lambda(E)")
        render_scan(out / "energy_of_lambda.png", [r[0] for r in e_rows],
                    [r[1] for r in e_rows], "lambda", "E(lambda)")
    else:
        _write_csv(sys.stdout, ["E", "lambda"], lam_rows)
        _write_csv(sys.stdout, ["lambda", "E"], e_rows)
    return 0


def _cmd_portrait(args) -> int:
    params = _model_params(args)
    p = normalize(params)
    c = _controls(args)
    kind = FlowKind.THETA if args.flow == "theta" else FlowKind.OMEGA
    fp = FlowParams(a=p.a, kappa=abs(p.kappa), E=args.E, lam=args.lam, gamma=p.gamma)

    lines = sample_nullclines(kind, fp, grid=args.grid)
    orbits = [
        (w, integrate_distinguished(kind, fp, w, c)) for w in ("Wminus", "Wplus")
    ]

    out = _out_dir(args)
    null_rows = []
    for idx, line in enumerate(lines):
        for x, y in line:
            null_rows.append((idx, x, y))
    orbit_rows = []
    for name, orb in orbits:
        branch = 0 if name == "Wminus" else 1
        for x, y in zip(orb.x, orb.y):
            orbit_rows.append((branch, x, y))

    if out is not None:
        _write_csv(out / "nullclines.csv", ["branch", "x", "y"], null_rows)
        _write_csv(out / "orbits.csv", ["branch", "x", "y"], orbit_rows)
        from .plotting import render_portrait
        render_portrait(
            out / "portrait.png", args.flow,
            [(orb.x, orb.y, name) for name, orb in orbits],
            lines,
            title=f"{args.flow} flow, E={args.E}, lambda={args.lam}",
        )
    else:
        _write_csv(sys.stdout, ["branch", "x", "y"], null_rows)
        _write_csv(sys.stdout, ["branch", "x", "y"], orbit_rows)
    return 0


def _cmd_validate(args) -> int:
    params = _model_params(args)
    report = check_admissibility(params)
    checks: list[tuple[str, bool, str]] = [
        ("admissibility", report.all_ok, "; ".join(report.messages) or "ok"),
    ]
    if report.all_ok:
        p = normalize(params)
        c = _controls(args)
        try:
            res = solve_ground_pair(p, c, max_iter=args.max_iter or 50,
                                    fix_tol=args.tol or 1e-10)
            checks.append(("fixed_point", True,
                           f"E*={_fmt(res.E_star)} lambda*={_fmt(res.lambda_star)}"))
            tol = 1e-8
            checks.append(("residual_theta", res.residuals[0] < tol, _fmt(res.residuals[0])))
            checks.append(("residual_omega", res.residuals[1] < tol, _fmt(res.residuals[1])))
            checks.append(("gap_membership", 0.0 < res.E_star < 1.0, _fmt(res.E_star)))
            in_band = -1.0 - p.a <= res.lambda_star <= -1.0 + p.a
            checks.append(("lambda_band", in_band, _fmt(res.lambda_star)))
            rad = radial_profile(p, res.E_star, res.lambda_star, c)
            ang = angular_profile(p, res.E_star, res.lambda_star, c)
            norm = hilbert_norm(rad, ang, p)
            checks.append(("norm_bound", norm.bound_check, _fmt(norm.norm_squared)))
            r_res, a_res, defect = residuals(rad, ang, p, res.E_star, res.lambda_star)
            checks.append(("radial_residual", r_res < 1e-5, _fmt(r_res)))
            checks.append(("angular_residual", a_res < 1e-5, _fmt(a_res)))
            checks.append(("moduli_constancy", defect < 1e-12, _fmt(defect)))
        except (ConvergenceError, AdmissibilityError) as exc:
            checks.append(("fixed_point", False, str(exc)))
    ok = all(passed for _, passed, _ in checks)
    for name, passed, detail in checks:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}", file=sys.stderr)
    print(json.dumps({"validate": "pass" if ok else "fail",
                      "checks": [[n, bool(p_)] for n, p_, _ in checks]}))
    return 0 if ok else NUMERICAL_ERROR


def _cmd_explore(args) -> int:
    params = _model_params(args)
    p = normalize(params)
    candidates = explore(p, grid=args.grid)
    for cand in candidates:
        print(json.dumps({
            "E": float(_fmt(cand.E)), "lambda": float(_fmt(cand.lam)),
            "residual_theta": float(_fmt(cand.residual_theta)),
            "residual_omega": float(_fmt(cand.residual_omega)),
            "guaranteed": cand.guaranteed,
        }))
    print(f"{len(candidates)} candidate cell(s); no convergence guarantee",
          file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0,) else 0
    os.environ.setdefault("OMP_NUM_THREADS", str(_threads()))
    try:
        args = _merge_config(args)
        handler = {
            "solve": _cmd_solve,
            "scan": _cmd_scan,
            "portrait": _cmd_portrait,
            "validate": _cmd_validate,
            "explore": _cmd_explore,
        }[args.command]
        return handler(args)
    except AdmissibilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"error": "admissibility", "message": str(exc)}))
        return NUMERICAL_ERROR
    except ParameterError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ConvergenceError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
