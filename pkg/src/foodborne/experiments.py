"""Scenario runner: alpha sweeps, control sweeps, psi/theta sweeps, manifests.

Every runner solves one trajectory per swept value, keeps going when an
individual solve fails (the failure lands in the run records and the
manifest), and emits plot-ready comparison CSVs.  All outputs are pure
functions of the scenario and seed: reruns produce byte-identical files.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fracode import FractionalIVP, SolverConfig, SolverError, Trajectory, solve
from .model import COMPARTMENTS, ModelParams, make_rhs, with_params
from .scenario import Scenario, assumed_parameter_notes

CONTROL_SWEEP_ALPHA = 0.95
PSI_THETA_SWEEP_ALPHA = 0.95


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one solve inside a sweep."""

    label: str
    alpha: float
    trajectory: Trajectory | None
    status: str            # "ok" or "failed"
    reason: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class SweepResult:
    records: tuple[RunRecord, ...]
    files: tuple[str, ...]

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.records) and len(self.records) > 0


def solve_scenario(sc: Scenario, alpha: float,
                   params: ModelParams | None = None) -> Trajectory:
    """One solve of the scenario at the given order.

    A zero-length horizon returns the single initial row without touching
    the solver.
    """
    p = sc.params if params is None else params
    y0 = sc.initial.as_array()
    if sc.t_end == 0.0:
        return Trajectory(times=np.array([0.0]), states=y0[None, :],
                          alpha=alpha,
                          manifest={"alpha": alpha, "t0": 0.0, "t_end": 0.0,
                                    "step_count": 0, "step_size": sc.step})
    ivp = FractionalIVP(alpha=alpha, t0=0.0, t_end=sc.t_end, y0=y0,
                        rhs=make_rhs(p))
    return solve(ivp, SolverConfig(step_count=sc.step_count))


def _run_jobs(sc: Scenario, jobs, threads: int = 1) -> tuple[RunRecord, ...]:
    """Execute (label, alpha, params) jobs, preserving order.

    Failures are captured per job, never raised; threads change timing
    only, not results.
    """
    def one(job) -> RunRecord:
        label, alpha, params = job
        try:
            traj = solve_scenario(sc, alpha, params)
            return RunRecord(label=label, alpha=alpha, trajectory=traj,
                             status="ok")
        except SolverError as exc:
            return RunRecord(label=label, alpha=alpha, trajectory=None,
                             status="failed", reason=str(exc))

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return tuple(pool.map(one, jobs))
    return tuple(one(job) for job in jobs)


def run_alpha_sweep(sc: Scenario, alphas=None, out_dir: Path | None = None,
                    threads: int = 1) -> SweepResult:
    """One solve per fractional order; per-compartment comparison CSVs."""
    alphas = tuple(alphas) if alphas is not None else sc.alpha_values
    jobs = [(f"alpha={a!r}", a, None) for a in alphas]
    records = _run_jobs(sc, jobs, threads)
    files = ()
    if out_dir is not None:
        files = _write_comparison_files(out_dir, "alpha_sweep", records,
                                        COMPARTMENTS)
    return SweepResult(records=records, files=files)


def run_control_sweep(sc: Scenario, u_values=None,
                      alpha: float = CONTROL_SWEEP_ALPHA,
                      out_dir: Path | None = None,
                      threads: int = 1) -> SweepResult:
    """One solve per intervention level u at fixed order alpha."""
    u_values = tuple(u_values) if u_values is not None else sc.sweep_values("u")
    jobs = [(f"u={u!r}", alpha, with_params(sc.params, u=float(u)))
            for u in u_values]
    records = _run_jobs(sc, jobs, threads)
    files = ()
    if out_dir is not None:
        files = _write_comparison_files(out_dir, "control_sweep", records,
                                        COMPARTMENTS)
    return SweepResult(records=records, files=files)


def run_psi_theta_sweep(sc: Scenario, psi_values=None, theta_values=None,
                        alpha: float = PSI_THETA_SWEEP_ALPHA,
                        out_dir: Path | None = None,
                        threads: int = 1) -> SweepResult:
    """Vary psi with theta fixed, then theta with psi fixed; compare D."""
    psi_values = (tuple(psi_values) if psi_values is not None
                  else sc.sweep_values("psi"))
    theta_values = (tuple(theta_values) if theta_values is not None
                    else sc.sweep_values("theta"))
    jobs = [(f"psi={v!r}", alpha, with_params(sc.params, psi=float(v)))
            for v in psi_values]
    jobs += [(f"theta={v!r}", alpha, with_params(sc.params, theta=float(v)))
             for v in theta_values]
    records = _run_jobs(sc, jobs, threads)
    files = ()
    if out_dir is not None:
        files = _write_comparison_files(out_dir, "psitheta_sweep", records,
                                        ("D",))
    return SweepResult(records=records, files=files)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trajectory_csv(traj: Trajectory, path: Path) -> None:
    """Full trajectory: time column first, then the seven compartments."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("time",) + COMPARTMENTS)
        for t, row in zip(traj.times, traj.states):
            w.writerow([_fmt(t)] + [_fmt(v) for v in row])


def _write_comparison_files(out_dir: Path, prefix: str, records,
                            compartments) -> tuple[str, ...]:
    """One CSV per compartment, one column per successful run."""
    out_dir = Path(out_dir)
    ok = [r for r in records if r.ok]
    if not ok:
        return ()
    times = ok[0].trajectory.times
    written = []
    for comp in compartments:
        idx = COMPARTMENTS.index(comp)
        name = f"{prefix}_{comp}.csv"
        with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["time"] + [r.label for r in ok])
            for i, t in enumerate(times):
                w.writerow([_fmt(t)]
                           + [_fmt(r.trajectory.states[i, idx]) for r in ok])
        written.append(name)
    return tuple(written)


def sha256_of(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, subcommand: str, inputs: dict,
                   runs, files) -> dict:
    """Write manifest.json: inputs echo, per-run status, file checksums.

    ``runs`` may hold RunRecords or plain dicts with the same keys.  The
    manifest is deterministic (sorted keys, no timestamps, relative
    filenames), so identical invocations produce byte-identical bytes.
    """
    out_dir = Path(out_dir)
    from . import __version__  # deferred: package init imports this module

    run_entries = [r if isinstance(r, dict)
                   else {"label": r.label, "alpha": r.alpha,
                         "status": r.status, "reason": r.reason}
                   for r in runs]
    n_ok = sum(1 for r in run_entries if r["status"] == "ok")
    if len(run_entries) == 0:
        status = "empty"
    elif n_ok == len(run_entries):
        status = "ok"
    elif n_ok > 0:
        status = "partial"
    else:
        status = "failed"

    manifest = {
        "tool": "foodborne",
        "version": __version__,
        "subcommand": subcommand,
        "inputs": inputs,
        "runs": run_entries,
        "status": status,
        "outputs": {name: sha256_of(out_dir / name) for name in sorted(files)},
    }
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (out_dir / "manifest.json").write_text(text, encoding="utf-8")
    return manifest


def scenario_echo(sc: Scenario) -> dict:
    """Scenario contents for the manifest, with assumed-value provenance."""
    return {
        "params": sc.params.as_dict(),
        "initial": dict(zip(COMPARTMENTS, sc.initial.as_array().tolist())),
        "solver": {"alpha": list(sc.alpha_values), "t_end": sc.t_end,
                   "step": sc.step},
        "sweeps": {k: list(v) for k, v in sc.sweeps.items()},
        "seed": sc.seed,
        "assumed_parameters": assumed_parameter_notes(sc),
    }


def run_manifest(sc: Scenario, subcommand: str, results,
                 out_dir: Path) -> dict:
    """Manifest for a sweep result; ``results`` may hold zero runs."""
    if isinstance(results, SweepResult):
        runs, files = results.records, results.files
    else:
        runs, files = tuple(results), ()
    return write_manifest(out_dir, subcommand, scenario_echo(sc), runs, files)
