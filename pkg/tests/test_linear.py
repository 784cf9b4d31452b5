"""Multiplier inversion of A:Du = f and the regularized representation."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from efos.catalog import cauchy_riemann, dirac, generalized_cauchy_riemann
from efos.ellipticity import NonEllipticError
from efos.grid import GridFunction, PeriodicGrid, gradient, norm_l2, random_band_limited
from efos.linear import (
    REPORT_COLUMNS,
    MultiplierPlan,
    RegularizerSequence,
    report_csv_row,
    riesz_constant,
    solve_linear,
    solve_representation,
    verify_apriori,
)
from efos.sampling import rng_from_seed
from efos.tensor import ConstantTensor

from helpers import dirac_closed_form, single_mode_rhs


def test_dirac_closed_form():
    grid = PeriodicGrid(n=3, G=16)
    f = single_mode_rhs(grid, 4)
    u, report = solve_linear(dirac(), f)
    assert report.residual <= 1e-10
    assert np.max(np.abs(u.values - dirac_closed_form(grid).values)) <= 1e-10


def test_cauchy_riemann_closed_form():
    grid = PeriodicGrid(n=2, G=32)
    f = single_mode_rhs(grid, 2)
    u, report = solve_linear(cauchy_riemann(), f)
    x = grid.points()
    expected = np.zeros((2,) + grid.shape)
    expected[0] = -np.cos(2 * np.pi * x[0]) / (2 * np.pi)
    assert np.max(np.abs(u.values - expected)) <= 1e-12
    assert report.residual <= 1e-12


def test_residual_postcondition_random_rhs():
    cases = [
        (cauchy_riemann(), PeriodicGrid(n=2, G=16)),
        (generalized_cauchy_riemann(2.0, 1.0, 1.0, 1.0), PeriodicGrid(n=2, G=16)),
        (dirac(), PeriodicGrid(n=3, G=8)),
    ]
    rng = rng_from_seed(0)
    for A, grid in cases:
        for _ in range(5):
            f = random_band_limited(grid, A.N, rng)
            _, report = solve_linear(A, f)
            assert report.residual <= 1e-10
            assert not report.nyquist_truncated


def test_zero_rhs_gives_zero_field():
    grid = PeriodicGrid(n=2, G=8)
    u, report = solve_linear(cauchy_riemann(), GridFunction.zeros(grid, 2))
    assert np.max(np.abs(u.values)) == 0.0
    assert report.residual == 0.0


def test_solution_mean_is_zero():
    grid = PeriodicGrid(n=3, G=8)
    f = single_mode_rhs(grid, 4)
    u, _ = solve_linear(dirac(), f)
    assert np.max(np.abs(u.values.mean(axis=(1, 2, 3)))) < 1e-14


def test_rhs_mean_dropped_and_reported():
    grid = PeriodicGrid(n=3, G=8)
    f = single_mode_rhs(grid, 4)
    shifted = GridFunction(grid, f.values + np.array([0.7, 0, 0, -0.2]).reshape(4, 1, 1, 1))
    u0, rep0 = solve_linear(dirac(), f)
    u1, rep1 = solve_linear(dirac(), shifted)
    np.testing.assert_allclose(u1.values, u0.values, atol=1e-14)
    np.testing.assert_allclose(rep1.dropped_mean, [0.7, 0, 0, -0.2], atol=1e-14)
    assert rep1.dropped_mean_norm > 0.0
    assert rep0.dropped_mean_norm < 1e-14


def test_nyquist_content_flagged():
    grid = PeriodicGrid(n=2, G=8)
    i = np.arange(8)
    vals = np.zeros((2,) + grid.shape)
    vals[0] = np.sin(2 * np.pi * i / 8)[:, None] + 0.5 * ((-1.0) ** i)[:, None]
    _, report = solve_linear(cauchy_riemann(), GridFunction(grid, vals))
    assert report.nyquist_truncated


def test_non_elliptic_tensor_rejected():
    entries = np.zeros((2, 2, 2))
    entries[0, 0, 0] = 1.0
    entries[1, 1, 0] = 1.0
    with pytest.raises(NonEllipticError):
        MultiplierPlan(ConstantTensor(entries), PeriodicGrid(n=2, G=8))


def test_dimension_mismatch_rejected():
    with pytest.raises(ValueError):
        MultiplierPlan(dirac(), PeriodicGrid(n=2, G=8))


def test_apriori_ratio_bounded_by_one():
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(1)
    A = dirac()
    plan = MultiplierPlan(A, grid)
    for _ in range(10):
        f = random_band_limited(grid, 4, rng)
        u, _ = solve_linear(A, f, plan=plan)
        rep = verify_apriori(A, u, f, nu=plan.nu)
        assert rep.ratio_grad <= 1.0 + 1e-10
        # the Dirac symbol is an isometry per mode, so the bound is tight
        assert rep.ratio_grad >= 1.0 - 1e-10


def test_apriori_zero_rhs():
    grid = PeriodicGrid(n=3, G=8)
    rep = verify_apriori(dirac(), GridFunction.zeros(grid, 4), GridFunction.zeros(grid, 4))
    assert rep.ratio_grad == 0.0


def test_apriori_sobolev_reported_only_for_n_ge_3():
    grid2 = PeriodicGrid(n=2, G=16)
    f2 = single_mode_rhs(grid2, 2)
    u2, _ = solve_linear(cauchy_riemann(), f2)
    rep2 = verify_apriori(cauchy_riemann(), u2, f2)
    assert math.isnan(rep2.ratio_sobolev)

    grid3 = PeriodicGrid(n=3, G=8)
    f3 = single_mode_rhs(grid3, 4)
    u3, _ = solve_linear(dirac(), f3)
    rep3 = verify_apriori(dirac(), u3, f3)
    assert rep3.ratio_sobolev > 0.0


def test_representation_rational_error_bound():
    grid = PeriodicGrid(n=3, G=16)
    rng = rng_from_seed(2)
    A = dirac()
    f = random_band_limited(grid, 4, rng)
    u, _ = solve_linear(A, f)
    for m in (1, 10, 100, 1000):
        um, rep = solve_representation(A, f, RegularizerSequence("rational", m))
        rel = norm_l2(um - u) / norm_l2(u)
        assert rel <= rep.rational_bound * (1 + 1e-12)
        assert rep.rational_bound == pytest.approx(m**-2 / rep.z_min**2)
        assert 0.0 <= rep.factor_gap <= 1.0


def test_representation_truncation_exact_above_threshold():
    # L = 4 puts the lowest frequency at 1/4; truncation is exact once m >= 4
    grid = PeriodicGrid(n=2, G=16, L=4.0)
    A = cauchy_riemann()
    f = single_mode_rhs(grid, 2)
    u, _ = solve_linear(A, f)
    u1, rep1 = solve_representation(A, f, RegularizerSequence("truncation", 1))
    assert norm_l2(u1 - u) / norm_l2(u) > 1e-3
    u4, _ = solve_representation(A, f, RegularizerSequence("truncation", 4))
    assert np.max(np.abs(u4.values - u.values)) < 1e-14


def test_representation_kinds_agree_in_the_limit():
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(3)
    A = dirac()
    f = random_band_limited(grid, 4, rng)
    ur, _ = solve_representation(A, f, RegularizerSequence("rational", 100_000))
    ut, _ = solve_representation(A, f, RegularizerSequence("truncation", 100_000))
    u, _ = solve_linear(A, f)
    assert norm_l2(ur - ut) / norm_l2(u) <= 1e-9


def test_regularizer_validation():
    with pytest.raises(ValueError):
        RegularizerSequence("unknown", 10)
    with pytest.raises(ValueError):
        RegularizerSequence("rational", 0)


@given(st.floats(min_value=0.05, max_value=50.0), st.integers(min_value=1, max_value=10_000))
@settings(max_examples=60, deadline=None)
def test_regularizer_pointwise_properties(zmag, m):
    # 0 <= h_m <= 1/|z| and the recovery factor h_m |z| sits in [0, 1]
    for kind in ("rational", "truncation"):
        h = RegularizerSequence(kind, m).value(np.array([zmag]))[0]
        assert 0.0 <= h <= 1.0 / zmag + 1e-15
        assert 0.0 <= h * zmag <= 1.0 + 1e-15


def test_regularizer_converges_pointwise():
    z = np.array([0.25, 1.0, 7.0])
    for kind in ("rational", "truncation"):
        err = np.abs(RegularizerSequence(kind, 10_000).value(z) - 1.0 / z)
        assert np.max(err * z) < 1e-6


def test_riesz_constant_values():
    assert riesz_constant(3, 2.0) == pytest.approx(4 * math.pi, rel=1e-13)
    assert riesz_constant(4, 2.0) == pytest.approx(4 * math.pi**2, rel=1e-13)
    with pytest.raises(ValueError):
        riesz_constant(3, 3.0)
    with pytest.raises(ValueError):
        riesz_constant(3, 0.0)


def test_report_csv_row_matches_columns():
    grid = PeriodicGrid(n=3, G=8)
    f = single_mode_rhs(grid, 4)
    u, report = solve_linear(dirac(), f)
    apriori = verify_apriori(dirac(), u, f)
    row = report_csv_row(grid, report, apriori)
    assert len(row.split(",")) == len(REPORT_COLUMNS)
    assert row.startswith("8,")
