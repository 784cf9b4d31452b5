"""Fixed-point iteration, contraction measurement, and the comparison bounds."""

import math

import numpy as np
import pytest

from efos.catalog import dirac, lipschitz_perturbation, variable_linear
from efos.ellipticity import NonEllipticError, cached_nu
from efos.grid import GridFunction, PeriodicGrid, gradient, norm_l2, random_band_limited
from efos.nonlinear import (
    TRACE_COLUMNS,
    DivergenceError,
    NonlinearOperator,
    campanato_solve,
    contraction_metric,
    near_operator_check,
    verify_comparison,
)
from efos.sampling import rng_from_seed
from efos.tensor import contract, operator_norm

from helpers import single_mode_rhs


def _linear_anchor_operator(A, declared=0.0):
    return NonlinearOperator(
        evaluator=lambda x, Q: contract(A, np.asarray(Q)),
        anchor=A,
        declared_nearness=declared,
        name="anchor",
    )


def test_linear_operator_converges_in_one_iteration():
    grid = PeriodicGrid(n=3, G=16)
    f = single_mode_rhs(grid, 4)
    u, trace = campanato_solve(_linear_anchor_operator(dirac()), f, tol=1e-10)
    assert trace.converged
    assert trace.iterations == 1
    assert trace.residual[-1] <= 1e-10


def test_constant_shift_solves_to_zero():
    # F(x, 0) = c and f = c leave nothing to solve once the mean is dropped
    A = dirac()
    c = np.array([0.3, -0.2, 0.1, 0.05])

    def shifted(x, Q):
        return contract(A, np.asarray(Q)) + c

    F = NonlinearOperator(evaluator=shifted, anchor=A, declared_nearness=0.0, name="shifted")
    grid = PeriodicGrid(n=3, G=8)
    f = GridFunction(grid, np.broadcast_to(c.reshape(4, 1, 1, 1), (4,) + grid.shape).copy())
    u, trace = campanato_solve(F, f, tol=1e-10)
    assert trace.converged
    assert np.max(np.abs(u.values)) <= 1e-12
    # the constant cancels inside g_k before the solve ever sees it
    assert trace.dropped_mean_norm[0] <= 1e-15


def test_x_dependent_shift_mean_is_logged():
    # F(x, 0) = (1 + cos(2 pi x1)) e1 with f = 0: the mean-1 part is
    # incompatible on the torus, gets dropped each step, and is reported
    A = dirac()

    def shifted(x, Q):
        x = np.asarray(x, dtype=float)
        Q = np.asarray(Q, dtype=float)
        out = contract(A, Q)
        out[..., 0] += 1.0 + np.cos(2 * np.pi * x[..., 0])
        return out

    F = NonlinearOperator(evaluator=shifted, anchor=A, declared_nearness=0.0, name="x-shift")
    grid = PeriodicGrid(n=3, G=8)
    u, trace = campanato_solve(F, GridFunction.zeros(grid, 4), tol=1e-10)
    assert trace.converged
    assert trace.dropped_mean_norm[0] == pytest.approx(1.0, abs=1e-12)
    # the oscillating part is solvable: A:Du = -cos(2 pi x1) e1
    x = grid.points()
    expected = np.zeros((4,) + grid.shape)
    expected[0] = -np.sin(2 * np.pi * x[0]) / (2 * np.pi)
    np.testing.assert_allclose(u.values, expected, atol=1e-12)


def test_contraction_tracks_declared_rate():
    grid = PeriodicGrid(n=3, G=16)
    f = single_mode_rhs(grid, 4)
    F = lipschitz_perturbation(dirac(), 0.5, "sin_q11")
    u, trace = campanato_solve(F, f, tol=1e-10)
    assert trace.converged
    assert trace.iterations <= 40
    assert trace.K_theory == pytest.approx(0.5, abs=1e-9)
    ratios = [r for r in trace.ratio if not math.isnan(r)]
    assert max(ratios) <= 0.55
    # fixed point solves the equation
    assert trace.residual[-1] <= 10 * 1e-10


def test_trace_d_decreasing_above_floor():
    grid = PeriodicGrid(n=3, G=16)
    f = single_mode_rhs(grid, 4)
    F = lipschitz_perturbation(dirac(), 0.5, "sin_q11")
    _, trace = campanato_solve(F, f, tol=1e-10)
    floor = 1e-13 * norm_l2(f)
    for a, b in zip(trace.d, trace.d[1:]):
        if b > floor:
            assert b < a


def test_uniqueness_from_two_starts():
    grid = PeriodicGrid(n=3, G=16)
    f = single_mode_rhs(grid, 4)
    F = lipschitz_perturbation(dirac(), 0.5, "sin_q11")
    u0 = random_band_limited(grid, 4, rng_from_seed(5))
    ua, _ = campanato_solve(F, f, tol=1e-10)
    ub, _ = campanato_solve(F, f, tol=1e-10, u0=u0)
    assert norm_l2(gradient(ua - ub)) <= 10 * 1e-10 * norm_l2(f)


def test_variable_coefficient_operator_converges():
    grid = PeriodicGrid(n=3, G=16)
    f = single_mode_rhs(grid, 4)
    F = variable_linear(dirac(), 0.05)
    u, trace = campanato_solve(F, f, tol=1e-10)
    assert trace.converged
    assert trace.K_theory == pytest.approx(0.05, abs=1e-9)
    assert trace.residual[-1] <= 1e-8


def test_divergence_detected_with_trace():
    A = dirac()
    # the declared bound is a lie: the increments overshoot by 1.5 nu(A)
    F = NonlinearOperator(
        evaluator=lambda x, Q: 2.5 * contract(A, np.asarray(Q)),
        anchor=A,
        declared_nearness=0.5,
        name="overdriven",
    )
    grid = PeriodicGrid(n=3, G=8)
    f = single_mode_rhs(grid, 4)
    with pytest.raises(DivergenceError) as exc:
        campanato_solve(F, f, tol=1e-10, max_iter=50)
    assert exc.value.trace.iterations >= 3
    assert not exc.value.trace.converged


def test_no_margin_rejected_before_iterating():
    A = dirac()
    F = NonlinearOperator(
        evaluator=lambda x, Q: 2.5 * contract(A, np.asarray(Q)),
        anchor=A,
        name="overdriven",
    )
    grid = PeriodicGrid(n=3, G=8)
    with pytest.raises(NonEllipticError):
        campanato_solve(F, single_mode_rhs(grid, 4), tol=1e-10)


def test_non_periodic_operator_rejected():
    A = dirac()
    F = NonlinearOperator(
        evaluator=lambda x, Q: contract(A, np.asarray(Q)),
        anchor=A,
        declared_nearness=0.0,
        x_periodic=False,
    )
    grid = PeriodicGrid(n=3, G=8)
    with pytest.raises(ValueError):
        campanato_solve(F, single_mode_rhs(grid, 4))


def test_component_mismatch_rejected():
    grid = PeriodicGrid(n=3, G=8)
    f = GridFunction.zeros(grid, 3)
    with pytest.raises(ValueError):
        campanato_solve(_linear_anchor_operator(dirac()), f)


def test_contraction_metric_unitary_symbol():
    # the Dirac direction matrices are orthogonal, so d equals the gradient gap
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(6)
    A = dirac()
    u = random_band_limited(grid, 4, rng)
    v = random_band_limited(grid, 4, rng)
    d = contraction_metric(u, v, A)
    assert d == pytest.approx(norm_l2(gradient(u - v)), rel=1e-12)
    assert contraction_metric(u, u, A) == 0.0


def test_coercivity_chain():
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(7)
    A = dirac()
    nu = cached_nu(A)
    top = operator_norm(A)
    for _ in range(5):
        u = random_band_limited(grid, 4, rng)
        v = random_band_limited(grid, 4, rng)
        d = contraction_metric(u, v, A)
        gap = norm_l2(gradient(u - v))
        assert nu * gap - 1e-10 <= d <= top * gap + 1e-10


def test_comparison_bound_on_random_pairs():
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(8)
    F = lipschitz_perturbation(dirac(), 0.5, "sin_q11")
    for _ in range(10):
        w = random_band_limited(grid, 4, rng)
        v = random_band_limited(grid, 4, rng)
        rep = verify_comparison(F, w, v)
        assert rep.ratio <= 1.0 + 1e-9
    same = verify_comparison(F, w, w)
    assert same.ratio == 0.0


def test_comparison_needs_declared_nearness():
    A = dirac()
    F = NonlinearOperator(evaluator=lambda x, Q: contract(A, np.asarray(Q)), anchor=A)
    grid = PeriodicGrid(n=3, G=8)
    w = single_mode_rhs(grid, 4)
    with pytest.raises(ValueError):
        verify_comparison(F, w, w)


def test_near_operator_inequality():
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(9)
    F = lipschitz_perturbation(dirac(), 0.5, "sin_q11")
    pairs = [
        (random_band_limited(grid, 4, rng), random_band_limited(grid, 4, rng)) for _ in range(10)
    ]
    rep = near_operator_check(F, pairs)
    assert rep.violations == 0
    assert rep.K == pytest.approx(0.5, abs=1e-9)
    assert 0.0 < rep.max_ratio <= 1.0


def test_near_operator_identical_operator():
    grid = PeriodicGrid(n=3, G=8)
    rng = rng_from_seed(10)
    F = _linear_anchor_operator(dirac(), declared=0.0)
    pairs = [(random_band_limited(grid, 4, rng), random_band_limited(grid, 4, rng))]
    rep = near_operator_check(F, pairs)
    assert rep.violations == 0


def test_trace_csv_columns(tmp_path):
    grid = PeriodicGrid(n=3, G=8)
    f = single_mode_rhs(grid, 4)
    F = lipschitz_perturbation(dirac(), 0.5, "sin_q11")
    _, trace = campanato_solve(F, f, tol=1e-8)
    p = tmp_path / "trace.csv"
    trace.write_csv(p)
    lines = p.read_text().strip().split("\n")
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == trace.iterations + 1
    first = lines[1].split(",")
    assert first[0] == "1"
    assert math.isnan(float(first[2]))  # no ratio on the first step


def test_pointwise_evaluator_mode():
    # vectorized=False loops the evaluator over points and must agree
    A = dirac()
    amp = 0.5 * cached_nu(A)

    def pointwise(x, Q):
        out = contract(A, Q)
        out[0] += amp * np.sin(Q[0, 0])
        return out

    F_loop = NonlinearOperator(
        evaluator=pointwise, anchor=A, declared_nearness=amp, vectorized=False, name="loop"
    )
    F_vec = lipschitz_perturbation(A, 0.5, "sin_q11")
    grid = PeriodicGrid(n=3, G=4)
    w = random_band_limited(grid, 4, rng_from_seed(11))
    a = F_loop.apply_to_gradient(gradient(w))
    b = F_vec.apply_to_gradient(gradient(w))
    np.testing.assert_allclose(a.values, b.values, atol=1e-12)
