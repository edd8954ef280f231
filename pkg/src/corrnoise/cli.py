"""Command-line front end.

    corrnoise coeffs --family nu --param 0.05 --steps 2048
    corrnoise sensitivity --family anti_pgd --steps 16 --limiting
    corrnoise analyze linreg --family nu --param 0.01 --spectrum 'pow(1):128' --eta 0.02
    corrnoise bound --kappa 10,100 --eta 0.5 --profile dpsgd,tuned,optimize
    corrnoise simulate --problem linreg --family nu --param 0.01 --steps 5000
    corrnoise sweep --axis dimension --grid 8,16,32,64,128 --family nu --param 0.001

Exit codes: 0 success, 2 invalid input, 3 numerical infeasibility or
divergence. CSV numbers carry 17 significant digits; JSON output validates
against schemas/output.schema.json. --figures DIR additionally renders PNGs
next to the numeric output (matplotlib, optional).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .analysis import (ProblemParams, effective_dim, linreg_finf_lower, linreg_finf_upper, linreg_optimal_profile,
                       mean_finf, mean_optimal_profile, rate_table, universal_floor)
from .coeffs import DEFAULT_T, FAMILIES, limiting_bmagsq, make_coeffs
from .convex_bound import (ConvexClass, MultiplierSeq, alternating_minimization, certificate_min_eig, min_psi,
                           omega_grid, optimize_lambda)
from .engine import DivergenceError, LinearRegression, MeanEstimation, RunConfig, run, zcdp_to_eps
from .simlab import SweepConfig, sweep
from .spectral import Spectrum
from .toeplitz import sensitivity_T, sensitivity_inf

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


class NumericError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- formatting --------------------------------------------------------------

def fmt(x) -> str:
    """Locale-free decimal text; floats with 17 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return format(x, ".17g")
    return str(x)


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt(x)
    return obj


def to_json(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def to_csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([fmt(r.get(f)) for f in fields])
    return buf.getvalue()


def load_schema() -> dict:
    return json.loads(resources.files("corrnoise").joinpath("schemas/output.schema.json").read_text())


def validate_json(obj) -> None:
    """Raise jsonschema.ValidationError if obj does not match the output schema."""
    import jsonschema

    jsonschema.validate(obj, load_schema())


def _write(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    d = os.path.dirname(os.path.abspath(out))
    os.makedirs(d, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _sidecar(out: str, explicit: str | None) -> str | None:
    """Path for the secondary JSON output: explicit, else <out stem>.json when out is a file."""
    if explicit:
        return explicit
    if out == "-":
        return None
    return os.path.splitext(out)[0] + ".json"


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{name}: empty list")
    return vals


def parse_spectrum(text: str) -> Spectrum:
    """'const:D', 'pow(a):D', a comma list of eigenvalues, or a file of eigenvalues."""
    t = text.strip()
    if os.path.isfile(t):
        with open(t, encoding="utf-8") as fh:
            raw = fh.read().replace(",", " ").split()
        try:
            return Spectrum.from_values([float(s) for s in raw])
        except ValueError as e:
            raise UsageError(f"--spectrum file {t}: {e}") from None
    if ":" in t:
        kind, _, dim = t.rpartition(":")
        try:
            d = int(dim)
        except ValueError:
            raise UsageError(f"--spectrum: bad dimension in {text!r}") from None
        from .analysis import decay_spectrum

        return decay_spectrum(kind, d)
    return Spectrum.from_values(_floats(t, "--spectrum"))


def _family_param(args):
    if args.family in ("nu", "anti_pgd_damped") and args.param is None:
        raise UsageError(f"--family {args.family} needs --param")
    if args.family == "mean_optimal" and args.param is None:
        eta = getattr(args, "eta", None)
        if eta is None:
            raise UsageError("--family mean_optimal needs --param (a learning rate)")
        return eta
    return args.param


def _figure(args, name, fn, *a):
    if getattr(args, "figures", None):
        fn(os.path.join(args.figures, name), *a)


# -- subcommands -------------------------------------------------------------

def cmd_coeffs(args) -> int:
    param = _family_param(args)
    beta = make_coeffs(args.family, param, args.steps)
    if args.format == "json":
        _write(to_json({"command": "coeffs", "family": args.family, "param": param, "steps": args.steps,
                        "values": beta.values.tolist()}), args.out)
    else:
        _write("".join(fmt(float(v)) + "\n" for v in beta.values), args.out)
    from .plotting import plot_coeffs

    _figure(args, "coeffs.png", plot_coeffs, beta.values.tolist(), f"{args.family} {'' if param is None else param}")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    param = _family_param(args)
    beta = make_coeffs(args.family, param, args.steps)
    rec = {"command": "sensitivity", "family": args.family, "param": param, "steps": args.steps,
           "gamma_T": sensitivity_T(beta)}
    if args.limiting:
        rec["gamma_inf"] = sensitivity_inf(limiting_bmagsq(args.family, param))
    if args.format == "csv":
        fields = ["family", "param", "steps", "gamma_T"] + (["gamma_inf"] if args.limiting else [])
        _write(to_csv([rec], fields), args.out)
    else:
        _write(to_json(rec), args.out)
    return EXIT_OK


def _analysis_profile(args, spectrum):
    param = _family_param(args)
    if args.family == "optimal":
        if args.problem == "mean":
            return lambda w: mean_optimal_profile(args.eta, w), param
        return linreg_optimal_profile(spectrum, args.eta), param
    if args.form == "time":
        return make_coeffs(args.family, param, args.steps), param
    return (args.family, param), param


def cmd_analyze(args) -> int:
    params = ProblemParams(args.eta, args.rho, args.clip_G, args.sigma_sgd, args.r_sq)
    want_lower = args.bounds in ("lower", "both")
    want_upper = args.bounds in ("upper", "both")
    base = {"problem": args.problem, "family": args.family, "eta": args.eta, "rho": args.rho,
            "clip_G": args.clip_G, "sigma_sgd": args.sigma_sgd}
    if args.problem == "rates":
        decays = [s for s in args.decays.split(",") if s.strip()]
        rows = rate_table(decays, args.d, params)
        records = [dict(problem="rates", eta=args.eta, rho=args.rho, clip_G=args.clip_G,
                        sigma_sgd=args.sigma_sgd, **r) for r in rows]
        fields = ["decay", "d", "d_eff", "nu", "noisy_sgd_bound", "noisy_ftrl_bound", "noisy_sgd_lower",
                  "noisy_ftrl_lower", "ratio"]
    elif args.problem == "mean":
        prof, param = _analysis_profile(args, None)
        val = mean_finf(prof, params)
        # the mean-estimation value is exact: lower and upper coincide
        rec = dict(base, param=param, d=1, value=val)
        if want_lower:
            rec["lower"] = val
        if want_upper:
            rec["upper"] = val
        records = [rec]
        fields = ["problem", "family", "param", "eta", "rho", "clip_G", "sigma_sgd", "d", "value"] + \
            (["lower"] if want_lower else []) + (["upper"] if want_upper else [])
    else:
        if not args.spectrum:
            raise UsageError("analyze linreg needs --spectrum")
        sp = parse_spectrum(args.spectrum)
        prof, param = _analysis_profile(args, sp)
        rec = dict(base, param=param, d=sp.d, d_eff=effective_dim(sp), trace=sp.trace,
                   floor=universal_floor(sp, params))
        form = "frequency" if args.family == "optimal" else args.form
        if want_lower:
            rec["lower"] = linreg_finf_lower(prof, sp, params)
        if want_upper:
            rec["upper"] = linreg_finf_upper(prof, sp, params, form=form)
        records = [rec]
        fields = ["problem", "family", "param", "eta", "rho", "clip_G", "sigma_sgd", "d", "d_eff", "trace",
                  "floor"] + (["lower"] if want_lower else []) + (["upper"] if want_upper else [])
    if args.format == "csv":
        _write(to_csv(records, fields), args.out)
    else:
        _write(to_json({"command": "analyze", "records": records}), args.out)
    return EXIT_OK


def _parse_profiles(text: str) -> list[str]:
    out = []
    for p in [s.strip() for s in text.split(",") if s.strip()]:
        if p in ("dpsgd", "tuned", "optimize"):
            out.append(p)
        elif p.startswith("nu:"):
            v = _floats(p[3:], "--profile nu")[0]
            if not (0.0 <= v < 1.0):
                raise UsageError(f"--profile {p}: nu must lie in [0, 1)")
            out.append(f"nu:{fmt(v)}")
        else:
            raise UsageError(f"--profile: expected dpsgd, nu:<v>, tuned or optimize, got {p!r}")
    if not out:
        raise UsageError("--profile: empty list")
    return out


def _certificate(lam: MultiplierSeq, cls: ConvexClass, k: int) -> float:
    w = omega_grid(k)
    psi = np.asarray(min_psi(w, lam, cls))
    if not np.all(np.isfinite(psi)):
        return math.inf
    return float(np.min(certificate_min_eig(w, lam, psi, cls)))


def _bound_record(kappa, name, lam, bound, iterations, cls, k, **extra):
    feasible = math.isfinite(bound)
    return dict(kappa=kappa, profile=name, bound=bound, feasible=feasible, lambda_support=lam.support,
                iterations=iterations, certificate_min_eig=_certificate(lam, cls, k) if feasible else None,
                **extra)


def cmd_bound(args) -> int:
    kappas = _floats(args.kappa, "--kappa")
    profiles = _parse_profiles(args.profile)
    nu_grid = _floats(args.nu_grid, "--nu-grid")
    if any(k < 1 for k in kappas):
        raise UsageError("--kappa values must be >= 1")
    records = []
    for kappa in kappas:
        cls = ConvexClass(mu=args.L / kappa, L=args.L, eta=args.eta, G=args.G, sigma_sgd=args.sigma_sgd,
                          rho=args.rho, d=args.d)
        init = MultiplierSeq.zeros(args.tmax) if args.init == "zero" else None

        def solve(bm):
            return optimize_lambda(bm, cls, args.grid, args.tmax, args.budget, init=init)

        tuned = None
        for name in profiles:
            if name == "dpsgd" or name.startswith("nu:"):
                bm = limiting_bmagsq("dpsgd") if name == "dpsgd" else limiting_bmagsq("nu", float(name[3:]))
                r = solve(bm)
                records.append(_bound_record(kappa, name, r.lam, r.bound, r.iterations, cls, args.grid))
                continue
            if tuned is None:
                best = None
                for nu in nu_grid:
                    r = solve(limiting_bmagsq("nu", nu))
                    if best is None or r.bound < best[1].bound:
                        best = (nu, r)
                tuned = best
            nu, r = tuned
            if name == "tuned":
                records.append(_bound_record(kappa, "tuned", r.lam, r.bound, r.iterations, cls, args.grid, nu=nu))
            else:
                am = alternating_minimization(limiting_bmagsq("nu", nu), cls, args.grid, args.tmax,
                                              rounds=args.rounds, budget=args.budget)
                records.append(_bound_record(kappa, "optimize", am.lam, am.bound, am.rounds, cls, args.grid,
                                             nu=nu))
    if args.format == "csv":
        rows = [dict(r, lambda_support=" ".join(str(s) for s in r["lambda_support"])) for r in records]
        _write(to_csv(rows, ["kappa", "profile", "bound", "feasible", "iterations", "certificate_min_eig",
                             "lambda_support"]), args.out)
    else:
        body = dict(records[0]) if len(records) == 1 else {"records": records}
        _write(to_json(dict({"command": "bound"}, **body)), args.out)
    from .plotting import plot_bounds

    _figure(args, "bound.png", plot_bounds, records)
    bad = [r for r in records if not r["feasible"]]
    if bad:
        which = ", ".join(f"kappa={fmt(r['kappa'])} {r['profile']}" for r in bad)
        raise NumericError(f"no feasible multipliers for {which}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    param = _family_param(args)
    beta = make_coeffs(args.family, param, args.steps)
    if args.problem == "meanest":
        oracle = MeanEstimation(args.d, s=args.sigma_sgd)
        metric = oracle.suboptimality
        d = args.d
        star = np.zeros(d)
    else:
        sp = parse_spectrum(args.spectrum)
        oracle = LinearRegression(sp.eigenvalues, sigma_sgd=args.sigma_sgd, covariates=args.covariates)
        metric = oracle.suboptimality
        d = sp.d
        star = oracle.theta_star
    theta0 = star + args.init_dist / math.sqrt(d)
    cfg = RunConfig(T=args.steps, eta=args.eta, clip_G=args.clip_G, rho=args.rho, beta=beta, d=d, seed=args.seed,
                    clip_enabled=not args.no_clip, log_stride=args.stride, theta0=theta0)
    try:
        log = run(oracle, cfg, metric=metric)
    except DivergenceError as e:
        raise NumericError(str(e)) from None
    tail = log.metrics[log.steps >= args.steps - args.steps // 4]
    summary = {"command": "simulate", "problem": args.problem, "family": args.family, "param": param,
               "label": log.label, "private": log.private, "steps": args.steps, "d": d, "eta": args.eta,
               "rho": args.rho, "clip_G": args.clip_G, "seed": args.seed, "sigma_dp": log.sigma_dp,
               "epsilon": zcdp_to_eps(args.rho, args.delta) if log.private else None, "delta": args.delta,
               "max_grad_norm": log.max_grad_norm, "final_suboptimality": float(log.metrics[-1]),
               "tail_mean_suboptimality": float(np.mean(tail))}
    if args.format == "json":
        _write(to_json(summary), args.out)
    else:
        rows = [{"step": int(s), "suboptimality": float(m)} for s, m in zip(log.steps, log.metrics)]
        _write(to_csv(rows, ["step", "suboptimality"]), args.out)
        side = _sidecar(args.out, args.summary)
        if side:
            _write(to_json(summary), side)
    from .plotting import plot_trace

    _figure(args, "simulate.png", plot_trace, log.steps.tolist(), log.metrics.tolist(), log.label)
    return EXIT_OK


def cmd_sweep(args) -> int:
    grid = _floats(args.grid, "--grid")
    if args.family != "nu":
        raise UsageError("sweep compares Noisy-SGD with the nu family; use --family nu")
    if args.param is not None and not (0.0 <= args.param < 1.0):
        raise UsageError("--param: nu must lie in [0, 1)")
    base = SweepConfig(d=args.d, alpha=args.alpha, eta=args.eta, rho=args.rho, clip_G=args.clip_G,
                       sigma_sgd=args.sigma_sgd, trials=args.trials, T=args.steps, nu=args.param, seed=args.seed,
                       covariates=args.covariates, workers=args.workers)
    try:
        res = sweep(args.axis, grid, base)
    except DivergenceError as e:
        raise NumericError(str(e)) from None

    def fitdict(f):
        return {a: {"slope": v.slope, "intercept": v.intercept, "r_squared": v.r_squared} for a, v in f.items()}

    report = {"command": "sweep", "axis": args.axis, "grid": grid, "family": args.family, "param": args.param,
              "trials": args.trials, "seed": args.seed, "fits": fitdict(res.fits),
              "theory_fits": fitdict(res.theory_fits), "excluded": res.excluded, "rows": res.rows}
    if args.format == "json":
        _write(to_json(report), args.out)
    else:
        _write(to_csv(res.rows, ["axis_value", "algorithm", "estimate", "stderr", "x", "theory_lower"]), args.out)
        side = _sidecar(args.out, args.report)
        if side:
            _write(to_json(report), side)
    from .plotting import plot_sweep

    _figure(args, f"sweep_{args.axis}.png", plot_sweep, args.axis, res.rows, report["fits"])
    if not res.rows:
        raise NumericError("every grid point diverged")
    return EXIT_OK


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="run seed (default 0)")
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    figs = _Parser(add_help=False)
    figs.add_argument("--figures", metavar="DIR", default=None, help="also render PNG figures into DIR")

    fam = _Parser(add_help=False)
    fam.add_argument("--family", choices=FAMILIES, default="dpsgd")
    fam.add_argument("--param", type=float, default=None)
    fam.add_argument("--steps", type=int, default=DEFAULT_T)

    p = _Parser(prog="corrnoise", description="Correlated-noise DP-FTRL toolkit.")
    p.add_argument("--version", action="version", version=f"corrnoise {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("coeffs", parents=[common, fam, figs], help="noise coefficients, one per line")
    s.set_defaults(func=cmd_coeffs, fmt_default="csv")

    s = sub.add_parser("sensitivity", parents=[common, fam], help="gamma_T and optionally gamma_inf")
    s.add_argument("--limiting", action="store_true", help="also report the infinite-horizon sensitivity")
    s.set_defaults(func=cmd_sensitivity, fmt_default="json")

    s = sub.add_parser("analyze", parents=[common], help="asymptotic suboptimality F_inf")
    s.add_argument("problem", choices=("mean", "linreg", "rates"))
    s.add_argument("--family", choices=FAMILIES + ("optimal",), default="dpsgd")
    s.add_argument("--param", type=float, default=None)
    s.add_argument("--steps", type=int, default=DEFAULT_T, help="horizon for --form time")
    s.add_argument("--spectrum", default=None, help="const:D, pow(a):D, eigenvalue list or file")
    s.add_argument("--eta", type=float, required=True)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--clip-G", dest="clip_G", type=float, default=1.0)
    s.add_argument("--sigma-sgd", dest="sigma_sgd", type=float, default=0.0)
    s.add_argument("--r-sq", dest="r_sq", type=float, default=None, help="fourth-moment constant (default 3 tr H)")
    s.add_argument("--form", choices=("frequency", "time"), default="frequency")
    s.add_argument("--decays", default="const,pow(0.5),pow(1),pow(2)", help="rates: decay profiles")
    s.add_argument("--d", type=int, default=128, help="rates: dimension")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--lower", dest="bounds", action="store_const", const="lower")
    g.add_argument("--upper", dest="bounds", action="store_const", const="upper")
    g.add_argument("--both", dest="bounds", action="store_const", const="both")
    s.set_defaults(func=cmd_analyze, fmt_default="json", bounds="both")

    s = sub.add_parser("bound", parents=[common, figs], help="convex-program bound for strongly convex losses")
    s.add_argument("--kappa", required=True, help="condition number(s), comma-separated")
    s.add_argument("--eta", type=float, default=0.5)
    s.add_argument("--profile", default="dpsgd", help="comma list of dpsgd, nu:<v>, tuned, optimize")
    s.add_argument("--grid", type=int, default=1000, help="frequency grid size k")
    s.add_argument("--tmax", type=int, default=64, help="multiplier half-width")
    s.add_argument("--budget", type=int, default=12, help="optimizer improvement rounds")
    s.add_argument("--rounds", type=int, default=20, help="alternating-minimization rounds")
    s.add_argument("--init", choices=("spike", "zero"), default="spike")
    s.add_argument("--nu-grid", dest="nu_grid", default="0.3,0.1,0.03,0.01,0.003")
    s.add_argument("--L", type=float, default=1.0)
    s.add_argument("--G", type=float, default=1.0)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--sigma-sgd", dest="sigma_sgd", type=float, default=0.0)
    s.add_argument("--d", type=int, default=1)
    s.set_defaults(func=cmd_bound, fmt_default="json")

    s = sub.add_parser("simulate", parents=[common, fam, figs], help="one DP-FTRL / Noisy-FTRL run")
    s.add_argument("--problem", choices=("meanest", "linreg"), required=True)
    s.add_argument("--eta", type=float, default=0.1)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--clip-G", dest="clip_G", type=float, default=1.0)
    s.add_argument("--no-clip", action="store_true", help="disable clipping (Noisy-FTRL, not private)")
    s.add_argument("--sigma-sgd", dest="sigma_sgd", type=float, default=0.0)
    s.add_argument("--d", type=int, default=16, help="meanest: dimension")
    s.add_argument("--spectrum", default="pow(1):16", help="linreg: const:D, pow(a):D, list or file")
    s.add_argument("--covariates", choices=("gaussian", "rademacher"), default="gaussian")
    s.add_argument("--init-dist", dest="init_dist", type=float, default=1.0, help="||theta_0 - theta*||")
    s.add_argument("--stride", type=int, default=16)
    s.add_argument("--delta", type=float, default=1e-6)
    s.add_argument("--summary", default=None, help="JSON summary path (default <out>.json)")
    s.set_defaults(func=cmd_simulate, fmt_default="csv")

    s = sub.add_parser("sweep", parents=[common, figs], help="stationary-error slope sweeps")
    s.add_argument("--axis", choices=("dimension", "eigen_decay", "learning_rate"), required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--family", default="nu")
    s.add_argument("--param", type=float, default=None, help="nu (default eta * mu)")
    s.add_argument("--d", type=int, default=128)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--eta", type=float, default=0.02)
    s.add_argument("--rho", type=float, default=1.0)
    s.add_argument("--clip-G", dest="clip_G", type=float, default=1.0)
    s.add_argument("--sigma-sgd", dest="sigma_sgd", type=float, default=0.0)
    s.add_argument("--trials", type=int, default=8)
    s.add_argument("--steps", type=int, default=None, help="horizon (default 20/(eta mu), capped)")
    s.add_argument("--covariates", choices=("gaussian", "rademacher"), default="gaussian")
    s.add_argument("--workers", type=int, default=None, help="processes (default CORRNOISE_THREADS or cores)")
    s.add_argument("--report", default=None, help="JSON slope report path (default <out>.json)")
    s.set_defaults(func=cmd_sweep, fmt_default="csv")
    return p


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        if args.format is None:
            args.format = args.fmt_default
        return args.func(args)
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    except UsageError as e:
        print(f"corrnoise: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except NumericError as e:
        print(f"corrnoise: infeasible: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as e:
        print(f"corrnoise: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"corrnoise: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
