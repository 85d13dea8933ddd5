"""Plain-text scenario files: parsing, validation, writing, overrides.

A scenario is an INI-style key=value file with four sections:

    [params]   all 17 model rate constants, each required explicitly
               (vartheta and u have no published values; they are
               "assumed" parameters and must still be stated)
    [initial]  the 7 compartment start values (s, a, i, d, p_f, g_f, w_p)
    [solver]   alpha (comma list, optional), t_end, step
    [sweeps]   optional comma lists for u, psi, theta
    [run]      optional seed (default 0) and out directory

Unknown sections or keys are rejected, not ignored, and every error names
the offending field and the expected form.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, replace
from pathlib import Path

from .model import ModelParams, State, param_names, ASSUMED_PARAMS

DEFAULT_ALPHAS = (0.75, 0.80, 0.85, 0.90, 0.95, 1.0)
DEFAULT_U_SWEEP = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_PSI_SWEEP = (0.1, 0.25, 0.47, 0.7, 0.9)
DEFAULT_THETA_SWEEP = (0.1, 0.3, 0.5, 0.7, 0.9)

_INITIAL_KEYS = ("s", "a", "i", "d", "p_f", "g_f", "w_p")
_STATE_FIELDS = ("S", "A", "I", "D", "P_f", "G_f", "W_p")
_SWEEP_KEYS = ("u", "psi", "theta")
_SECTIONS = ("params", "initial", "solver", "sweeps", "run")

ASSUMED_NOTES = {
    "vartheta": "assumed: fly-to-human transmission has no published value",
    "u": "assumed: baseline intervention level, not a published rate",
}


class ScenarioError(ValueError):
    """A scenario file or override failed validation."""


@dataclass(frozen=True)
class Scenario:
    """A fully validated simulation scenario."""

    params: ModelParams
    initial: State
    alpha_values: tuple[float, ...]
    t_end: float
    step: float
    sweeps: dict[str, tuple[float, ...]]
    seed: int
    output_dir: str | None = None

    def __post_init__(self):
        for a in self.alpha_values:
            if not 0.0 < a <= 1.0:
                raise ScenarioError(
                    f"solver.alpha values must lie in (0, 1], got {a}")
        if self.t_end < 0:
            raise ScenarioError(f"solver.t_end must be >= 0, got {self.t_end}")
        if self.step <= 0:
            raise ScenarioError(f"solver.step must be > 0, got {self.step}")
        if self.t_end > 0:
            m = round(self.t_end / self.step)
            if m < 1 or abs(m * self.step - self.t_end) > 1e-9 * self.t_end:
                raise ScenarioError(
                    f"solver.step = {self.step} does not divide "
                    f"t_end = {self.t_end} within rounding")
        if self.initial.n_h <= 0:
            raise ScenarioError(
                "initial human population S+A+I+D must be > 0 "
                "(the force of infection divides by it)")
        for name, value in zip(_STATE_FIELDS, self.initial.as_array()):
            if value < 0:
                raise ScenarioError(
                    f"initial.{name.lower()} must be >= 0, got {value}")
        for key, values in self.sweeps.items():
            if key not in _SWEEP_KEYS:
                raise ScenarioError(
                    f"unknown sweep parameter {key!r}; expected one of "
                    f"{_SWEEP_KEYS}")
            if len(values) == 0:
                raise ScenarioError(f"sweeps.{key} must list at least one value")
            for v in values:
                if key == "u" and not 0.0 <= v <= 1.0:
                    raise ScenarioError(f"sweeps.u values must lie in [0, 1], got {v}")
                if key != "u" and v < 0:
                    raise ScenarioError(f"sweeps.{key} values must be >= 0, got {v}")

    @property
    def step_count(self) -> int:
        return round(self.t_end / self.step) if self.t_end > 0 else 0

    def sweep_values(self, key: str) -> tuple[float, ...]:
        if key in self.sweeps:
            return self.sweeps[key]
        return {"u": DEFAULT_U_SWEEP, "psi": DEFAULT_PSI_SWEEP,
                "theta": DEFAULT_THETA_SWEEP}[key]


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ScenarioError(
            f"{section}.{key} must be a number, got {raw!r}") from None


def _parse_float_list(section: str, key: str, raw: str) -> tuple[float, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ScenarioError(
            f"{section}.{key} must be a comma-separated list of numbers")
    return tuple(_parse_float(section, key, s) for s in items)


def parse_scenario(path) -> Scenario:
    """Parse and fully validate a scenario file."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh, source=str(path))
    except configparser.Error as exc:
        raise ScenarioError(f"{path}: not a valid scenario file: {exc}") from exc

    for section in cp.sections():
        if section not in _SECTIONS:
            raise ScenarioError(
                f"{path}: unknown section [{section}]; expected one of "
                f"{_SECTIONS}")
    for required in ("params", "initial", "solver"):
        if not cp.has_section(required):
            raise ScenarioError(f"{path}: missing required section [{required}]")

    # -- params: all keys required, none extra --------------------------
    seen = dict(cp.items("params"))
    values = {}
    for name in param_names():
        if name not in seen:
            if name in ASSUMED_PARAMS:
                raise ScenarioError(
                    f"{path}: params.{name} is missing; {name} is an assumed "
                    "parameter (no published value) and must be stated "
                    "explicitly")
            raise ScenarioError(f"{path}: params.{name} is missing")
        values[name] = _parse_float("params", name, seen.pop(name))
    if seen:
        raise ScenarioError(
            f"{path}: unknown params key(s): {sorted(seen)}")
    try:
        params = ModelParams(**values)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    # -- initial --------------------------------------------------------
    seen = dict(cp.items("initial"))
    init_vals = {}
    for key, attr in zip(_INITIAL_KEYS, _STATE_FIELDS):
        if key not in seen:
            raise ScenarioError(f"{path}: initial.{key} is missing")
        init_vals[attr] = _parse_float("initial", key, seen.pop(key))
    if seen:
        raise ScenarioError(f"{path}: unknown initial key(s): {sorted(seen)}")
    initial = State(**init_vals)

    # -- solver ---------------------------------------------------------
    seen = dict(cp.items("solver"))
    alphas = DEFAULT_ALPHAS
    if "alpha" in seen:
        alphas = _parse_float_list("solver", "alpha", seen.pop("alpha"))
    if "t_end" not in seen:
        raise ScenarioError(f"{path}: solver.t_end is missing")
    t_end = _parse_float("solver", "t_end", seen.pop("t_end"))
    if "step" not in seen:
        raise ScenarioError(f"{path}: solver.step is missing")
    step = _parse_float("solver", "step", seen.pop("step"))
    if seen:
        raise ScenarioError(f"{path}: unknown solver key(s): {sorted(seen)}")

    # -- sweeps (optional) ------------------------------------------------
    sweeps: dict[str, tuple[float, ...]] = {}
    if cp.has_section("sweeps"):
        for key, raw in cp.items("sweeps"):
            if key not in _SWEEP_KEYS:
                raise ScenarioError(
                    f"{path}: unknown sweeps key {key!r}; expected one of "
                    f"{_SWEEP_KEYS}")
            sweeps[key] = _parse_float_list("sweeps", key, raw)

    # -- run (optional) ---------------------------------------------------
    seed = 0
    output_dir = None
    if cp.has_section("run"):
        seen = dict(cp.items("run"))
        if "seed" in seen:
            raw = seen.pop("seed")
            try:
                seed = int(raw)
            except ValueError:
                raise ScenarioError(
                    f"{path}: run.seed must be an integer, got {raw!r}") from None
        if "out" in seen:
            output_dir = seen.pop("out")
        if seen:
            raise ScenarioError(f"{path}: unknown run key(s): {sorted(seen)}")

    try:
        return Scenario(params=params, initial=initial, alpha_values=alphas,
                        t_end=t_end, step=step, sweeps=sweeps, seed=seed,
                        output_dir=output_dir)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def write_scenario(sc: Scenario, path) -> None:
    """Write a scenario file that parses back to an identical Scenario."""
    lines = ["[params]"]
    for name, value in sc.params.as_dict().items():
        note = "    # assumed, not a published value" if name in ASSUMED_PARAMS else ""
        lines.append(f"{name} = {value!r}{note}")
    lines.append("")
    lines.append("[initial]")
    for key, value in zip(_INITIAL_KEYS, sc.initial.as_array()):
        lines.append(f"{key} = {value!r}")
    lines.append("")
    lines.append("[solver]")
    lines.append("alpha = " + ",".join(repr(a) for a in sc.alpha_values))
    lines.append(f"t_end = {sc.t_end!r}")
    lines.append(f"step = {sc.step!r}")
    if sc.sweeps:
        lines.append("")
        lines.append("[sweeps]")
        for key, values in sc.sweeps.items():
            lines.append(f"{key} = " + ",".join(repr(v) for v in values))
    lines.append("")
    lines.append("[run]")
    lines.append(f"seed = {sc.seed}")
    if sc.output_dir is not None:
        lines.append(f"out = {sc.output_dir}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def apply_overrides(sc: Scenario, overrides) -> Scenario:
    """Apply repeatable ``key=value`` overrides to a scenario.

    Bare keys (``u=0.5``) address model parameters; dotted keys address a
    section explicitly (``params.u``, ``initial.s``, ``solver.step``,
    ``solver.alpha``, ``sweeps.psi``, ``run.seed``).  Unknown keys are
    rejected, not ignored.
    """
    params_kw: dict[str, float] = {}
    initial_kw: dict[str, float] = {}
    solver_kw: dict = {}
    sweeps = dict(sc.sweeps)
    seed = sc.seed
    output_dir = sc.output_dir

    for item in overrides:
        if "=" not in item:
            raise ScenarioError(
                f"override {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        key = key.strip().lower()
        raw = raw.strip()
        section, _, field_name = key.partition(".")
        if not field_name:
            section, field_name = "params", section

        if section == "params":
            if field_name not in param_names():
                raise ScenarioError(
                    f"unknown model parameter {field_name!r} in override "
                    f"{item!r}; expected one of {param_names()}")
            params_kw[field_name] = _parse_float("params", field_name, raw)
        elif section == "initial":
            if field_name not in _INITIAL_KEYS:
                raise ScenarioError(
                    f"unknown initial key {field_name!r} in override {item!r}; "
                    f"expected one of {_INITIAL_KEYS}")
            attr = _STATE_FIELDS[_INITIAL_KEYS.index(field_name)]
            initial_kw[attr] = _parse_float("initial", field_name, raw)
        elif section == "solver":
            if field_name == "alpha":
                solver_kw["alpha_values"] = _parse_float_list(
                    "solver", "alpha", raw)
            elif field_name in ("t_end", "step"):
                solver_kw[field_name] = _parse_float("solver", field_name, raw)
            else:
                raise ScenarioError(
                    f"unknown solver key {field_name!r} in override {item!r}; "
                    "expected alpha, t_end or step")
        elif section == "sweeps":
            if field_name not in _SWEEP_KEYS:
                raise ScenarioError(
                    f"unknown sweeps key {field_name!r} in override {item!r}; "
                    f"expected one of {_SWEEP_KEYS}")
            sweeps[field_name] = _parse_float_list("sweeps", field_name, raw)
        elif section == "run":
            if field_name == "seed":
                try:
                    seed = int(raw)
                except ValueError:
                    raise ScenarioError(
                        f"run.seed must be an integer, got {raw!r}") from None
            elif field_name == "out":
                output_dir = raw
            else:
                raise ScenarioError(
                    f"unknown run key {field_name!r} in override {item!r}; "
                    "expected seed or out")
        else:
            raise ScenarioError(
                f"unknown section {section!r} in override {item!r}; expected "
                f"one of {_SECTIONS}")

    try:
        params = replace(sc.params, **params_kw) if params_kw else sc.params
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc
    initial = replace(sc.initial, **initial_kw) if initial_kw else sc.initial
    return Scenario(params=params, initial=initial,
                    alpha_values=solver_kw.get("alpha_values", sc.alpha_values),
                    t_end=solver_kw.get("t_end", sc.t_end),
                    step=solver_kw.get("step", sc.step),
                    sweeps=sweeps, seed=seed, output_dir=output_dir)


def assumed_parameter_notes(sc: Scenario) -> dict[str, str]:
    """Provenance notes for the manifest: which values are assumptions."""
    return {name: f"{getattr(sc.params, name)!r} ({ASSUMED_NOTES[name]})"
            for name in ASSUMED_PARAMS}
