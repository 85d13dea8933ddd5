"""Command-line interface.

Subcommands: simulate, alpha-sweep, control-sweep, psitheta-sweep, r0,
equilibria, sensitivity, surface, selftest.  Exit codes: 0 success with
all artifacts written, 1 validation error (nothing written), 2 runtime
failure (manifest records the partial state).
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import fracode
from .fracode import FractionalIVP, SolverConfig, mittag_leffler, solve
from .model import (COMPARTMENTS, ModelParams, disease_free_equilibria,
                    endemic_equilibrium_residual, feasibility_bounds,
                    make_rhs, r0, rhs)
from .scenario import (Scenario, ScenarioError, apply_overrides,
                       parse_scenario)
from . import experiments
from . import sensitivity as sens

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="foodborne",
        description="Fractional-order food-borne disease simulation toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, scenario_required=True):
        p.add_argument("--scenario", type=Path, required=scenario_required,
                       help="scenario file (INI-style key=value sections)")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE",
                       help="override a scenario value (repeatable); bare "
                            "keys address [params]")
        p.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default: scenario run.out, "
                            "else ./out)")
        p.add_argument("--threads", type=int, default=1,
                       help="parallel solves inside sweeps; affects speed only")

    p = sub.add_parser("simulate", help="solve one trajectory, write CSV")
    common(p)
    p.add_argument("--alpha", type=float, default=None,
                   help="fractional order (default: first scenario value)")

    p = sub.add_parser("alpha-sweep", help="one solve per fractional order")
    common(p)
    p.add_argument("--alpha", type=str, default=None, metavar="LIST",
                   help="comma-separated order list overriding the scenario")

    p = sub.add_parser("control-sweep",
                       help="vary intervention level u at fixed order")
    common(p)
    p.add_argument("--alpha", type=float, default=experiments.CONTROL_SWEEP_ALPHA,
                   help="fractional order for every run (default 0.95)")

    p = sub.add_parser("psitheta-sweep",
                       help="vary psi and theta at fixed order")
    common(p)
    p.add_argument("--alpha", type=float,
                   default=experiments.PSI_THETA_SWEEP_ALPHA,
                   help="fractional order for every run (default 0.95)")

    p = sub.add_parser("r0", help="print the reproduction number")
    common(p, scenario_required=False)

    p = sub.add_parser("equilibria",
                       help="print disease-free equilibria and residuals")
    common(p, scenario_required=False)

    p = sub.add_parser("sensitivity",
                       help="LHS + PRCC of R0 against its parameters")
    common(p, scenario_required=False)
    p.add_argument("--samples", type=int, default=2000,
                   help="Latin hypercube sample count (default 2000)")

    p = sub.add_parser("surface", help="R0 grid over two parameters")
    common(p, scenario_required=False)
    p.add_argument("--x", required=True, help="first parameter name")
    p.add_argument("--y", required=True, help="second parameter name")
    p.add_argument("--nx", type=int, default=41)
    p.add_argument("--ny", type=int, default=41)
    p.add_argument("--xrange", default=None, metavar="LO:HI",
                   help="explicit x range (default: +-50%% of baseline, "
                        "u uses [0,1])")
    p.add_argument("--yrange", default=None, metavar="LO:HI")

    p = sub.add_parser("selftest",
                       help="run the solver weight/oracle invariant suite")

    return parser


def _err(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return EXIT_VALIDATION


def _load_scenario(args) -> Scenario:
    sc = parse_scenario(args.scenario)
    if args.overrides:
        sc = apply_overrides(sc, args.overrides)
    if args.seed is not None:
        sc = apply_overrides(sc, [f"run.seed={args.seed}"])
    return sc


def _load_params(args) -> ModelParams:
    """Parameters for scalar subcommands; scenario file optional."""
    if args.scenario is not None:
        return _load_scenario(args).params
    params = ModelParams.baseline()
    if args.overrides:
        from dataclasses import replace
        from .model import param_names
        changes = {}
        for item in args.overrides:
            if "=" not in item:
                raise ScenarioError(f"override {item!r} is not key=value")
            key, _, raw = item.partition("=")
            key = key.strip().lower().removeprefix("params.")
            if key not in param_names():
                raise ScenarioError(
                    f"unknown model parameter {key!r} in override {item!r}")
            try:
                changes[key] = float(raw)
            except ValueError:
                raise ScenarioError(
                    f"params.{key} must be a number, got {raw!r}") from None
        try:
            params = replace(params, **changes)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc
    return params


def _out_dir(args, sc: Scenario | None = None) -> Path:
    if args.out is not None:
        return args.out
    if sc is not None and sc.output_dir is not None:
        return Path(sc.output_dir)
    return Path("out")


def _finish(sc, subcommand: str, result, out: Path) -> int:
    manifest = experiments.run_manifest(sc, subcommand, result, out)
    for name in result.files:
        print(f"wrote {out / name}")
    print(f"wrote {out / 'manifest.json'} (status: {manifest['status']})")
    for entry in manifest["runs"]:
        if entry["status"] != "ok":
            print(f"run {entry['label']} failed: {entry['reason']}",
                  file=sys.stderr)
    return EXIT_OK if manifest["status"] == "ok" else EXIT_RUNTIME


def _cmd_simulate(args) -> int:
    sc = _load_scenario(args)
    alpha = args.alpha if args.alpha is not None else sc.alpha_values[0]
    if not 0.0 < alpha <= 1.0:
        return _err(f"--alpha must lie in (0, 1], got {alpha}")
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    label = f"alpha={alpha!r}"
    try:
        traj = experiments.solve_scenario(sc, alpha)
        name = f"trajectory_alpha_{alpha!r}.csv"
        experiments.write_trajectory_csv(traj, out / name)
        records = [experiments.RunRecord(label=label, alpha=alpha,
                                         trajectory=traj, status="ok")]
        files = (name,)
    except fracode.SolverError as exc:
        records = [experiments.RunRecord(label=label, alpha=alpha,
                                         trajectory=None, status="failed",
                                         reason=str(exc))]
        files = ()
    result = experiments.SweepResult(records=tuple(records), files=files)
    return _finish(sc, "simulate", result, out)


def _cmd_alpha_sweep(args) -> int:
    sc = _load_scenario(args)
    alphas = None
    if args.alpha is not None:
        try:
            alphas = tuple(float(s) for s in args.alpha.split(",") if s.strip())
        except ValueError:
            return _err(f"--alpha must be a comma list of numbers, "
                        f"got {args.alpha!r}")
        if not alphas:
            return _err("--alpha list is empty")
        for a in alphas:
            if not 0.0 < a <= 1.0:
                return _err(f"--alpha values must lie in (0, 1], got {a}")
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    result = experiments.run_alpha_sweep(sc, alphas=alphas, out_dir=out,
                                         threads=args.threads)
    return _finish(sc, "alpha-sweep", result, out)


def _cmd_control_sweep(args) -> int:
    sc = _load_scenario(args)
    if not 0.0 < args.alpha <= 1.0:
        return _err(f"--alpha must lie in (0, 1], got {args.alpha}")
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    result = experiments.run_control_sweep(sc, alpha=args.alpha, out_dir=out,
                                           threads=args.threads)
    return _finish(sc, "control-sweep", result, out)


def _cmd_psitheta_sweep(args) -> int:
    sc = _load_scenario(args)
    if not 0.0 < args.alpha <= 1.0:
        return _err(f"--alpha must lie in (0, 1], got {args.alpha}")
    out = _out_dir(args, sc)
    out.mkdir(parents=True, exist_ok=True)
    result = experiments.run_psi_theta_sweep(sc, alpha=args.alpha, out_dir=out,
                                             threads=args.threads)
    return _finish(sc, "psitheta-sweep", result, out)


def _cmd_r0(args) -> int:
    params = _load_params(args)
    value = r0(params)
    print(f"R0 = {value!r}")
    for name in sens.R0_PARAMS:
        print(f"  {name} = {getattr(params, name)!r}")
    print(f"  k1 = {params.k1!r}")
    return EXIT_OK


def _cmd_equilibria(args) -> int:
    params = _load_params(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        e1, e2 = disease_free_equilibria(params)
    for w in caught:
        print(f"warning: {w.message}")
    human_cap, fly_cap = feasibility_bounds(params)
    print(f"feasibility bounds: N_h <= {human_cap!r}, N_f <= {fly_cap!r}")
    for name, point in (("E1", e1), ("E2", e2)):
        res = rhs(0.0, point, params)
        print(f"{name}: " + ", ".join(
            f"{c}={v!r}" for c, v in zip(COMPARTMENTS, point.as_array())))
        print(f"{name} residual: "
              + ", ".join(f"{c}={v:.6e}" for c, v in zip(COMPARTMENTS, res)))
        print(f"{name} max |residual| = {np.max(np.abs(res)):.6e}")
    report = endemic_equilibrium_residual(e2, params, refine=True)
    status = "converged" if report.converged else "did not converge"
    print(f"endemic refinement from E2 {status}; "
          f"max |residual| = {report.max_abs_residual:.6e}"
          + (f" ({report.note})" if report.note else ""))
    if report.converged:
        print("endemic point: " + ", ".join(
            f"{c}={v!r}" for c, v in zip(COMPARTMENTS,
                                         report.point.as_array())))
    return EXIT_OK


def _cmd_sensitivity(args) -> int:
    params = _load_params(args)
    seed = args.seed if args.seed is not None else 0
    if args.scenario is not None and args.seed is None:
        seed = _load_scenario(args).seed
    if args.samples < 2:
        return _err(f"--samples must be >= 2, got {args.samples}")
    ranges = sens.default_ranges(params)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    design = sens.lhs_sample(args.samples, ranges, seed=seed)
    outputs = sens.evaluate_r0(design, params)
    report = sens.prcc(design, outputs, output_name="r0")
    sens.write_samples_csv(design, outputs, "r0", out / "lhs_samples.csv")
    sens.write_prcc_csv(report, out / "prcc.csv")
    inputs = {"params": params.as_dict(), "n_samples": args.samples,
              "seed": seed,
              "ranges": {r.name: [r.low, r.high] for r in ranges}}
    experiments.write_manifest(
        out, "sensitivity", inputs,
        [{"label": "lhs+prcc", "alpha": None, "status": "ok", "reason": None}],
        ("lhs_samples.csv", "prcc.csv"))
    for name, value in report.prcc.items():
        print(f"PRCC[{name}] = {value:+.4f}")
    print(f"wrote {out / 'lhs_samples.csv'}")
    print(f"wrote {out / 'prcc.csv'}")
    print(f"wrote {out / 'manifest.json'}")
    return EXIT_OK


def _parse_range(name: str, spec_str: str | None,
                 params: ModelParams) -> sens.ParamRange:
    if spec_str is None:
        return sens.default_ranges(params, names=(name,))[0]
    lo, sep, hi = spec_str.partition(":")
    if not sep:
        raise ScenarioError(
            f"range for {name} must be LO:HI, got {spec_str!r}")
    return sens.ParamRange(name, float(lo), float(hi))


def _cmd_surface(args) -> int:
    params = _load_params(args)
    from .model import param_names
    for name in (args.x, args.y):
        if name not in param_names():
            return _err(f"unknown parameter {name!r}; expected one of "
                        f"{param_names()}")
    x = _parse_range(args.x, args.xrange, params)
    y = _parse_range(args.y, args.yrange, params)
    grid = sens.r0_surface(params, x, y, args.nx, args.ny)
    out = _out_dir(args)
    out.mkdir(parents=True, exist_ok=True)
    name = f"surface_{args.x}_{args.y}.csv"
    sens.write_surface_csv(grid, out / name)
    inputs = {"params": params.as_dict(),
              "x": {"name": x.name, "low": x.low, "high": x.high, "n": args.nx},
              "y": {"name": y.name, "low": y.low, "high": y.high, "n": args.ny}}
    experiments.write_manifest(
        out, "surface", inputs,
        [{"label": f"{args.x} x {args.y}", "alpha": None, "status": "ok",
          "reason": None}], (name,))
    if grid.missing:
        print(f"{grid.missing} grid cells were undefined (left empty)")
    print(f"wrote {out / name}")
    print(f"wrote {out / 'manifest.json'}")
    return EXIT_OK


def _selftest_checks():
    """(name, passed) pairs for the weight/oracle invariant suite."""
    checks = []

    alphas = np.arange(0.05, 1.0001, 0.05)
    n = np.arange(2000, dtype=float)
    ok = True
    for alpha in alphas:
        alpha = float(alpha)
        _, b, c = fracode._power_tables(2000, alpha)
        d0 = n ** (alpha + 1.0) - (n - alpha) * (n + 1.0) ** alpha
        ok &= bool(np.all(b > 0) and np.all(c > 0) and np.all(d0 > 0))
    checks.append(("weight positivity (n <= 2000, alpha grid)", ok))

    seq = [fracode.corrector_weight(6, j, 1.0) for j in range(8)]
    checks.append(("alpha=1 corrector collapse (1,2,...,2,1)",
                   seq == [1.0] + [2.0] * 6 + [1.0]))
    checks.append(("alpha=1 predictor collapse (all ones)",
                   all(fracode.predictor_weight(6, j, 1.0) == 1.0
                       for j in range(7))))

    checks.append(("Mittag-Leffler E_1(-1) = exp(-1)",
                   abs(mittag_leffler(1.0, -1.0) - math.exp(-1.0)) < 1e-10))

    ivp = FractionalIVP(alpha=0.75, t0=0.0, t_end=1.0, y0=np.array([1.0]),
                        rhs=lambda t, y: -y)
    traj = solve(ivp, SolverConfig(step_count=200))
    ref = np.array([mittag_leffler(0.75, -(t ** 0.75)) for t in traj.times])
    err = float(np.max(np.abs(traj.states[:, 0] - ref) / np.abs(ref)))
    checks.append(("linear-oracle agreement (alpha=0.75, M=200)", err < 1e-2))

    zero = FractionalIVP(alpha=0.5, t0=0.0, t_end=2.0, y0=np.array([3.0, -1.0]),
                         rhs=lambda t, y: np.zeros_like(y))
    tz = solve(zero, SolverConfig(step_count=50))
    checks.append(("zero RHS keeps the state constant",
                   bool(np.all(tz.states == tz.states[0]))))

    again = solve(ivp, SolverConfig(step_count=200))
    checks.append(("determinism (bit-identical resolve)",
                   bool(np.array_equal(traj.states, again.states))))
    return checks


def _cmd_selftest(args) -> int:
    all_ok = True
    for name, ok in _selftest_checks():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        all_ok &= ok
    return EXIT_OK if all_ok else EXIT_RUNTIME


_COMMANDS = {
    "simulate": _cmd_simulate,
    "alpha-sweep": _cmd_alpha_sweep,
    "control-sweep": _cmd_control_sweep,
    "psitheta-sweep": _cmd_psitheta_sweep,
    "r0": _cmd_r0,
    "equilibria": _cmd_equilibria,
    "sensitivity": _cmd_sensitivity,
    "surface": _cmd_surface,
    "selftest": _cmd_selftest,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except (ScenarioError, ValueError, ZeroDivisionError) as exc:
        return _err(str(exc))


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
