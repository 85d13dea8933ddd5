"""Global sensitivity machinery: Latin hypercube sampling, PRCC, R0 surfaces.

The Latin hypercube sampler is stratified per dimension: [low, high) is
split into n equal strata, one uniform draw is taken inside each stratum,
and an independent random permutation decouples the dimensions.  The whole
design is a pure function of the seed.

PRCC (partial rank correlation coefficient) rank-transforms every column
and the output (average ranks on ties), regresses each parameter's ranks
and the output's ranks on all remaining parameters (ordinary least squares
with intercept), and reports the Pearson correlation of the two residual
vectors.  PRCC is therefore invariant under strictly monotone
transformations of any single column.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .model import ModelParams, r0, with_params

# Parameters entering the closed-form reproduction number; the default
# sensitivity study samples exactly these.
R0_PARAMS = ("xi", "eta", "mu_h", "rho", "vartheta", "u", "kappa", "tau")


@dataclass(frozen=True)
class ParamRange:
    """A named closed sampling interval [low, high]."""

    name: str
    low: float
    high: float

    def __post_init__(self):
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise ValueError(f"range for {self.name} must be finite")
        if not self.low < self.high:
            raise ValueError(
                f"range for {self.name} must satisfy low < high, "
                f"got [{self.low}, {self.high}]")

    @property
    def width(self) -> float:
        return self.high - self.low


@dataclass(frozen=True)
class LhsDesign:
    """A Latin hypercube sample: matrix of shape (n_samples, len(ranges))."""

    n_samples: int
    ranges: tuple[ParamRange, ...]
    matrix: np.ndarray
    seed: int

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.ranges)


def lhs_sample(n: int, ranges, seed: int) -> LhsDesign:
    """Draw a seeded Latin hypercube design over the given ranges.

    Per dimension: exactly one sample falls inside each stratum
    [low + i*w/n, low + (i+1)*w/n).  Identical seeds give identical
    matrices.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    ranges = tuple(ranges)
    if len(ranges) < 1:
        raise ValueError("need at least one parameter range")
    rng = np.random.default_rng(seed)
    cols = []
    strata = np.arange(n, dtype=float)
    for pr in ranges:
        jitter = rng.random(n)
        values = pr.low + (strata + jitter) * (pr.width / n)
        cols.append(values[rng.permutation(n)])
    return LhsDesign(n_samples=n, ranges=ranges,
                     matrix=np.column_stack(cols), seed=seed)


def default_ranges(p: ModelParams, names=R0_PARAMS) -> list[ParamRange]:
    """+-50% intervals around the baseline values, clipped to validity.

    ``u`` has no meaningful baseline to scale from (the baseline level is
    0), so its default range is the full validity domain [0, 1].
    """
    out = []
    for name in names:
        if name == "u":
            out.append(ParamRange("u", 0.0, 1.0))
            continue
        v = getattr(p, name)
        if v <= 0.0:
            raise ValueError(
                f"cannot build a +-50% range around {name} = {v}; "
                "specify the range explicitly")
        out.append(ParamRange(name, 0.5 * v, 1.5 * v))
    return out


@dataclass(frozen=True)
class SensitivityReport:
    """Per-parameter PRCC values against one scalar output."""

    prcc: dict[str, float]
    output_name: str
    design: LhsDesign = field(repr=False)


def prcc(design: LhsDesign, outputs, output_name: str = "r0") -> SensitivityReport:
    """Partial rank correlation of every design column against the output.

    A parameter whose rank column is collinear with the others (singular
    regression, zero residual variance) gets PRCC = nan rather than a
    fabricated value.  Values are clipped to [-1, 1] against floating
    round-off.
    """
    y = np.asarray(outputs, dtype=float)
    if y.shape != (design.n_samples,):
        raise ValueError(
            f"outputs must have shape ({design.n_samples},), got {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError("outputs contain NaN or Inf")

    ranks_x = np.column_stack([rankdata(design.matrix[:, j], method="average")
                               for j in range(len(design.ranges))])
    ranks_y = rankdata(y, method="average")

    n, k = ranks_x.shape
    values: dict[str, float] = {}
    for j, name in enumerate(design.names):
        others = np.delete(ranks_x, j, axis=1)
        basis = np.column_stack([np.ones(n), others])
        res_x = ranks_x[:, j] - basis @ np.linalg.lstsq(basis, ranks_x[:, j],
                                                        rcond=None)[0]
        res_y = ranks_y - basis @ np.linalg.lstsq(basis, ranks_y, rcond=None)[0]
        sx = np.sqrt(res_x @ res_x)
        sy = np.sqrt(res_y @ res_y)
        if sx <= 1e-10 * n or sy <= 1e-10 * n:
            values[name] = float("nan")
            continue
        values[name] = float(np.clip((res_x @ res_y) / (sx * sy), -1.0, 1.0))
    return SensitivityReport(prcc=values, output_name=output_name, design=design)


def evaluate_r0(design: LhsDesign, p_base: ModelParams) -> np.ndarray:
    """R0 at every design row, all other parameters held at ``p_base``."""
    out = np.empty(design.n_samples)
    names = design.names
    for i, row in enumerate(design.matrix):
        out[i] = r0(with_params(p_base, **dict(zip(names, row))))
    return out


@dataclass(frozen=True)
class SurfaceGrid:
    """R0 evaluated on a tensor grid of two parameters.

    ``values[i, j]`` is R0 at (x_values[i], y_values[j]); cells where R0
    is undefined hold NaN and are counted in ``missing``.
    """

    x_name: str
    y_name: str
    x_values: np.ndarray
    y_values: np.ndarray
    values: np.ndarray
    missing: int


def r0_surface(p_base: ModelParams, x: ParamRange, y: ParamRange,
               nx: int, ny: int) -> SurfaceGrid:
    """Evaluate R0 on the nx-by-ny grid spanned by two parameter ranges.

    Domain errors (degenerate denominator, invalid parameter combination)
    become missing cells, never aborts.
    """
    if nx < 2 or ny < 2:
        raise ValueError(f"grid needs nx, ny >= 2, got {nx}, {ny}")
    if x.name == y.name:
        raise ValueError(f"surface axes must name distinct parameters, "
                         f"both are {x.name!r}")
    xs = np.linspace(x.low, x.high, nx)
    ys = np.linspace(y.low, y.high, ny)
    values = np.empty((nx, ny))
    missing = 0
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            try:
                values[i, j] = r0(with_params(p_base, **{x.name: float(xv),
                                                         y.name: float(yv)}))
            except (ValueError, ZeroDivisionError):
                values[i, j] = np.nan
                missing += 1
    return SurfaceGrid(x_name=x.name, y_name=y.name, x_values=xs,
                       y_values=ys, values=values, missing=missing)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_samples_csv(design: LhsDesign, outputs, output_name: str,
                      path: Path) -> None:
    """One row per sample: parameter columns then the scalar output."""
    outputs = np.asarray(outputs, dtype=float)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(list(design.names) + [output_name])
        for row, out in zip(design.matrix, outputs):
            w.writerow([_fmt(v) for v in row] + [_fmt(out)])


def write_prcc_csv(report: SensitivityReport, path: Path) -> None:
    """Summary: one (parameter, prcc) row per sampled parameter."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["parameter", f"prcc_{report.output_name}"])
        for name, value in report.prcc.items():
            w.writerow([name, _fmt(value)])


def write_surface_csv(grid: SurfaceGrid, path: Path) -> None:
    """Long-format grid: one (x, y, r0) row per cell; missing cells empty."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([grid.x_name, grid.y_name, "r0"])
        for i, xv in enumerate(grid.x_values):
            for j, yv in enumerate(grid.y_values):
                v = grid.values[i, j]
                w.writerow([_fmt(xv), _fmt(yv), "" if np.isnan(v) else _fmt(v)])
