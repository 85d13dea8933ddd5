"""LHS stratification, PRCC behavior, R0 surfaces, CSV emission."""

import csv
import math

import numpy as np
import pytest

from foodborne.model import ModelParams, r0, with_params
from foodborne.sensitivity import (
    LhsDesign,
    ParamRange,
    R0_PARAMS,
    default_ranges,
    evaluate_r0,
    lhs_sample,
    prcc,
    r0_surface,
    write_prcc_csv,
    write_samples_csv,
    write_surface_csv,
)


def stratum_indices(column, pr, n):
    return np.floor((column - pr.low) / pr.width * n).astype(int)


# ------------------------------------------------------------------- LHS

def test_param_range_validation():
    with pytest.raises(ValueError):
        ParamRange("x", 1.0, 1.0)
    with pytest.raises(ValueError):
        ParamRange("x", 2.0, 1.0)
    with pytest.raises(ValueError):
        ParamRange("x", 0.0, math.inf)


def test_lhs_one_sample_per_stratum_unit_range():
    design = lhs_sample(4, [ParamRange("x", 0.0, 1.0)], seed=1)
    idx = sorted(stratum_indices(design.matrix[:, 0],
                                 design.ranges[0], 4))
    assert idx == [0, 1, 2, 3]


@pytest.mark.parametrize("n", [4, 16, 2000])
def test_lhs_marginals_all_dimensions(n):
    p = ModelParams.baseline()
    ranges = default_ranges(p)
    design = lhs_sample(n, ranges, seed=99)
    for j, pr in enumerate(design.ranges):
        idx = sorted(stratum_indices(design.matrix[:, j], pr, n))
        assert idx == list(range(n))


def test_lhs_determinism():
    ranges = default_ranges(ModelParams.baseline())
    a = lhs_sample(64, ranges, seed=123)
    b = lhs_sample(64, ranges, seed=123)
    assert np.array_equal(a.matrix, b.matrix)
    c = lhs_sample(64, ranges, seed=124)
    assert not np.array_equal(a.matrix, c.matrix)


def test_lhs_column_means_near_midpoints():
    ranges = default_ranges(ModelParams.baseline())
    assert len(ranges) == 8
    design = lhs_sample(2000, ranges, seed=5)
    for j, pr in enumerate(ranges):
        mid = 0.5 * (pr.low + pr.high)
        assert abs(design.matrix[:, j].mean() - mid) <= 0.02 * pr.width


def test_lhs_validation():
    with pytest.raises(ValueError):
        lhs_sample(1, [ParamRange("x", 0.0, 1.0)], seed=0)
    with pytest.raises(ValueError):
        lhs_sample(10, [], seed=0)


def test_default_ranges_u_spans_validity_domain():
    ranges = {r.name: r for r in default_ranges(ModelParams.baseline())}
    assert ranges["u"].low == 0.0 and ranges["u"].high == 1.0
    assert ranges["xi"].low == pytest.approx(0.5 * 0.0021)
    assert ranges["xi"].high == pytest.approx(1.5 * 0.0021)
    with pytest.raises(ValueError):
        default_ranges(with_params(ModelParams.baseline(), vartheta=0.0))


# ------------------------------------------------------------------ PRCC

def test_prcc_perfect_monotone_dependence():
    design = lhs_sample(500, [ParamRange(f"p{i}", 0.0, 1.0)
                              for i in range(4)], seed=21)
    outputs = design.matrix[:, 2].copy()
    report = prcc(design, outputs)
    assert report.prcc["p2"] > 0.99
    # For the other parameters the output ranks are perfectly explained by
    # p2, leaving zero residual variance: undefined (nan) is the honest
    # answer there, tiny correlation would also be acceptable.
    for i in (0, 1, 3):
        v = report.prcc[f"p{i}"]
        assert math.isnan(v) or abs(v) < 0.2


def test_prcc_null_output_uncorrelated():
    design = lhs_sample(2000, default_ranges(ModelParams.baseline()), seed=31)
    outputs = np.random.default_rng(77).normal(size=2000)
    report = prcc(design, outputs)
    assert all(abs(v) < 0.1 for v in report.prcc.values())


def test_prcc_bounds():
    design = lhs_sample(200, [ParamRange("a", 0.0, 1.0),
                              ParamRange("b", 0.0, 1.0)], seed=3)
    outputs = 3.0 * design.matrix[:, 0] - 2.0 * design.matrix[:, 1]
    report = prcc(design, outputs)
    assert all(abs(v) <= 1.0 for v in report.prcc.values())


def test_prcc_monotone_transform_invariance():
    design = lhs_sample(300, default_ranges(ModelParams.baseline()), seed=41)
    outputs = evaluate_r0(design, ModelParams.baseline())
    before = prcc(design, outputs)
    cubed = design.matrix.copy()
    j = design.names.index("rho")
    assert np.all(cubed[:, j] > 0)
    cubed[:, j] = cubed[:, j] ** 3
    transformed = LhsDesign(n_samples=design.n_samples, ranges=design.ranges,
                            matrix=cubed, seed=design.seed)
    after = prcc(transformed, outputs)
    for name in design.names:
        assert after.prcc[name] == pytest.approx(before.prcc[name], abs=1e-12)


def test_prcc_collinear_column_undefined():
    col = np.linspace(0.1, 0.9, 50)
    design = LhsDesign(
        n_samples=50,
        ranges=(ParamRange("a", 0.0, 1.0), ParamRange("b", 0.0, 1.0)),
        matrix=np.column_stack([col, col]), seed=0)
    report = prcc(design, np.linspace(0.0, 1.0, 50))
    assert math.isnan(report.prcc["a"])
    assert math.isnan(report.prcc["b"])


def test_prcc_rejects_bad_outputs():
    design = lhs_sample(10, [ParamRange("a", 0.0, 1.0)], seed=0)
    with pytest.raises(ValueError):
        prcc(design, np.ones(9))
    with pytest.raises(ValueError):
        prcc(design, np.full(10, np.nan))


def finite_difference_r0_sign(p, name, lo, hi):
    mid = 0.5 * (lo + hi)
    h = 1e-6 * max(abs(mid), 1.0)
    hi_v = r0(with_params(p, **{name: mid + h}))
    lo_v = r0(with_params(p, **{name: mid - h}))
    return math.copysign(1.0, hi_v - lo_v)


def test_prcc_signs_match_r0_derivatives():
    p = ModelParams.baseline()
    ranges = default_ranges(p)
    design = lhs_sample(2000, ranges, seed=2024)
    outputs = evaluate_r0(design, p)
    report = prcc(design, outputs)
    checked = 0
    for pr in ranges:
        value = report.prcc[pr.name]
        if abs(value) <= 0.1:
            continue
        expected = finite_difference_r0_sign(p, pr.name, pr.low, pr.high)
        assert math.copysign(1.0, value) == expected, pr.name
        checked += 1
    assert checked >= 4  # the study must actually exercise the comparison


# --------------------------------------------------------------- surface

def test_surface_u_row_is_zero():
    p = ModelParams.baseline()
    grid = r0_surface(p, ParamRange("mu_h", 0.005, 0.02),
                      ParamRange("u", 0.0, 1.0), nx=5, ny=5)
    assert np.all(grid.values[:, -1] == 0.0)  # u = 1 edge


def test_surface_monotone_decreasing_in_u():
    p = ModelParams.baseline()
    grid = r0_surface(p, ParamRange("mu_h", 0.005, 0.02),
                      ParamRange("u", 0.0, 1.0), nx=6, ny=11)
    for i in range(6):
        row = grid.values[i]
        assert all(a > b for a, b in zip(row, row[1:]))


def test_surface_two_by_two_matches_pointwise_calls():
    p = ModelParams.baseline()
    x = ParamRange("xi", 0.001, 0.003)
    y = ParamRange("tau", 0.001, 0.004)
    grid = r0_surface(p, x, y, nx=2, ny=2)
    for i, xv in enumerate((0.001, 0.003)):
        for j, yv in enumerate((0.001, 0.004)):
            assert grid.values[i, j] == pytest.approx(
                r0(with_params(p, xi=xv, tau=yv)), rel=1e-15)


def test_surface_missing_cells_not_aborts():
    p = ModelParams.baseline()
    grid = r0_surface(p, ParamRange("vartheta", 0.0, 0.004),
                      ParamRange("tau", 0.0, 0.0042), nx=3, ny=3)
    # vartheta = tau = 0 makes the R0 denominator vanish
    assert grid.missing == 1
    assert math.isnan(grid.values[0, 0])
    assert np.isfinite(grid.values[1:, 1:]).all()


def test_surface_validation():
    p = ModelParams.baseline()
    with pytest.raises(ValueError):
        r0_surface(p, ParamRange("u", 0.0, 1.0), ParamRange("u", 0.0, 0.5),
                   nx=3, ny=3)
    with pytest.raises(ValueError):
        r0_surface(p, ParamRange("u", 0.0, 1.0), ParamRange("xi", 0.001, 0.002),
                   nx=1, ny=3)


# ------------------------------------------------------------ CSV output

def test_samples_csv_layout(tmp_path):
    p = ModelParams.baseline()
    design = lhs_sample(16, default_ranges(p), seed=9)
    outputs = evaluate_r0(design, p)
    path = tmp_path / "samples.csv"
    write_samples_csv(design, outputs, "r0", path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == list(R0_PARAMS) + ["r0"]
    assert len(rows) == 17
    assert float(rows[1][-1]) == pytest.approx(outputs[0], rel=1e-15)


def test_prcc_csv_layout(tmp_path):
    p = ModelParams.baseline()
    design = lhs_sample(64, default_ranges(p), seed=9)
    report = prcc(design, evaluate_r0(design, p))
    path = tmp_path / "prcc.csv"
    write_prcc_csv(report, path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["parameter", "prcc_r0"]
    assert [r[0] for r in rows[1:]] == list(R0_PARAMS)


def test_surface_csv_blank_for_missing(tmp_path):
    p = ModelParams.baseline()
    grid = r0_surface(p, ParamRange("vartheta", 0.0, 0.004),
                      ParamRange("tau", 0.0, 0.0042), nx=2, ny=2)
    path = tmp_path / "surface.csv"
    write_surface_csv(grid, path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["vartheta", "tau", "r0"]
    assert rows[1][2] == ""          # the degenerate corner
    assert len(rows) == 5


def test_sensitivity_end_to_end_determinism(tmp_path):
    p = ModelParams.baseline()
    for sub in ("a", "b"):
        d = tmp_path / sub
        d.mkdir()
        design = lhs_sample(128, default_ranges(p), seed=55)
        outputs = evaluate_r0(design, p)
        report = prcc(design, outputs)
        write_samples_csv(design, outputs, "r0", d / "samples.csv")
        write_prcc_csv(report, d / "prcc.csv")
    assert ((tmp_path / "a" / "samples.csv").read_bytes()
            == (tmp_path / "b" / "samples.csv").read_bytes())
    assert ((tmp_path / "a" / "prcc.csv").read_bytes()
            == (tmp_path / "b" / "prcc.csv").read_bytes())
