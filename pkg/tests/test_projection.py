import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinner.core import ZeroSetSpec, bj_residual, evaluate, p_norm, shift
from pinner.errors import ConvergenceError, PreconditionError
from pinner.inner import linear_inner_coefs, phi_from_inner, solve_inner_newton
from pinner.projection import (
    ShiftProblem,
    SolverOptions,
    default_degree,
    extremal_phi_direct,
    nested_projection_sequence,
    project_shift_span,
    projection_objective,
)

F_TWO_ZEROS = np.convolve([1, -1 / 0.6], [1, -1 / (-0.5j)])


def _pad(a, n):
    return np.concatenate([a, np.zeros(n - a.size, dtype=complex)])


def test_linear_factor_p2():
    res = project_shift_span([1, -2], 2.0)
    k = np.arange(1, 40)
    np.testing.assert_allclose(res.co_projection[1:40], -3 * 0.5**k, atol=1e-10)
    assert res.co_projection[0] == pytest.approx(1)
    assert res.norm == pytest.approx(2.0, abs=1e-9)


def test_constant_is_its_own_coprojection():
    res = project_shift_span([1.0], 3.0)
    assert res.norm == pytest.approx(1.0)
    assert np.max(np.abs(res.co_projection[1:]), initial=0) < 1e-14
    assert np.max(np.abs(res.multiplier_poly)) < 1e-14


def test_linear_factor_p3_matches_closed_form():
    res = project_shift_span([1, -1 / 0.6], 3.0)
    ref = linear_inner_coefs(0.6, 3.0, res.co_projection.size - 1)
    assert np.max(np.abs(res.co_projection - ref)) < 1e-6


def test_scale_restored():
    res = project_shift_span([2.0, -4.0], 2.0)
    assert res.co_projection[0] == pytest.approx(2.0)
    assert res.norm == pytest.approx(4.0, abs=1e-8)


def test_origin_zero():
    with pytest.raises(PreconditionError):
        project_shift_span([0, 1, -2], 2.0)
    res = project_shift_span([0, 1, -2], 2.0, origin_multiplicity=1)
    assert res.co_projection[0] == 0
    assert res.norm == pytest.approx(2.0, abs=1e-9)


def test_zero_function_rejected():
    with pytest.raises(PreconditionError):
        project_shift_span([0.0, 0.0], 2.0)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_first_order_optimality_is_orthogonality(p):
    opts = SolverOptions(truncation_degree=80)
    res = project_shift_span(F_TWO_ZEROS, p, opts)
    J = res.co_projection
    worst = max(abs(bj_residual(J, shift(F_TWO_ZEROS, i), p)) for i in range(1, 81))
    assert res.grad_norm <= opts.grad_tol
    assert worst <= 10 * opts.grad_tol


@pytest.mark.parametrize("p", [1.5, 2.5, 4.0])
def test_coprojection_inherits_zeros(p):
    W = ZeroSetSpec.from_pairs([(0.5, 2), (-0.4j, 1)])
    J = project_shift_span(W.polynomial(), p).co_projection
    assert abs(evaluate(J, 0.5)) < 1e-6
    assert abs(evaluate(J, 0.5, 1)) < 1e-6
    assert abs(evaluate(J, -0.4j)) < 1e-6


def test_minimality_against_random_multipliers():
    p = 2.5
    opts = SolverOptions(truncation_degree=60)
    res = project_shift_span(F_TWO_ZEROS, p, opts)
    rng = np.random.default_rng(7)
    for _ in range(100):
        Q = res.multiplier_poly + rng.normal(scale=10.0 ** rng.uniform(-6, 0), size=res.multiplier_poly.size) * (
            1 + 1j * rng.normal(size=res.multiplier_poly.size)
        )
        Q[0] = 0
        assert projection_objective(F_TWO_ZEROS, Q, p) >= res.norm - 1e-12


@given(st.floats(1.2, 5.0), st.integers(0, 2**32 - 1))
@settings(max_examples=25)
def test_objective_midpoint_convex(p, seed):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=4) + 1j * rng.normal(size=4)
    f[0] = 1.0
    prob = ShiftProblem(f, f, 1, 6, p)
    a = rng.normal(size=6) + 1j * rng.normal(size=6)
    b = rng.normal(size=6) + 1j * rng.normal(size=6)
    fa, fb, fm = prob.objective(a), prob.objective(b), prob.objective((a + b) / 2)
    assert fm <= (fa + fb) / 2 + 1e-12 * max(1.0, fa, fb)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(3)
    f = np.array([1.0, 0.3 - 0.2j, -0.5j])
    prob = ShiftProblem(f, f, 1, 5, 2.7)
    x = rng.normal(size=5) + 1j * rng.normal(size=5)
    X = prob.to_real(x)
    g = prob.real_grad(prob.residual(x))

    def F(Y):
        return prob.objective(prob.residual(prob.to_complex(Y)))

    h = 1e-6
    for i in range(X.size):
        e = np.zeros_like(X)
        e[i] = h
        fd = (F(X + e) - F(X - e)) / (2 * h)
        assert fd == pytest.approx(g[i], rel=1e-5, abs=1e-7)


def test_gradient_method_agrees_with_newton():
    opts_g = SolverOptions(truncation_degree=30, method="gradient", max_iters=20000, grad_tol=1e-7)
    opts_n = SolverOptions(truncation_degree=30)
    a = project_shift_span([1, -1 / 0.4], 2.5, opts_g)
    b = project_shift_span([1, -1 / 0.4], 2.5, opts_n)
    assert np.max(np.abs(a.co_projection - b.co_projection)) < 1e-5


def test_nonconvergence_raises_with_last_iterate():
    opts = SolverOptions(truncation_degree=50, max_iters=1)
    with pytest.raises(ConvergenceError) as info:
        project_shift_span(F_TWO_ZEROS, 1.5, opts)
    assert info.value.last_iterate is not None
    assert info.value.residual > 0


def test_default_degree_tracks_decay():
    assert default_degree([1.0], 2.0) == 1
    d1 = default_degree([1, -1 / 0.5], 2.0)
    d2 = default_degree([1, -1 / 0.9], 2.0)
    assert d2 > d1 >= math.ceil(math.log(1e-12) / math.log(0.5))


def test_extremal_phi_single_zero_p2():
    phi = extremal_phi_direct(ZeroSetSpec((0.5,)), 2.0)
    assert p_norm(phi, 2) == pytest.approx(math.sqrt(0.75), abs=1e-9)
    assert evaluate(phi, 0.5) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_extremal_phi_properties(p):
    W = ZeroSetSpec((0.5, -0.3 + 0.4j, 0.7j))
    phi = extremal_phi_direct(W, p)
    for w in W.points:
        assert abs(evaluate(phi, w) - 1) < 1e-9
    assert 0 < p_norm(phi, p) < 1
    ref = phi_from_inner(solve_inner_newton(W, p), p)
    assert p_norm(phi, p) == pytest.approx(ref.phi_norm, abs=1e-8)


def test_extremal_requires_zeros():
    with pytest.raises(PreconditionError):
        extremal_phi_direct(ZeroSetSpec(()), 2.0)


def test_nested_single_equals_extremal():
    W = ZeroSetSpec((0.5, -0.6))
    (P1,) = nested_projection_sequence([1.0], [W], 2.5)
    phi = extremal_phi_direct(W, 2.5)
    n = max(P1.size, phi.size)
    np.testing.assert_allclose(_pad(np.array([1.0 + 0j]), n) - _pad(P1, n), _pad(phi, n), atol=1e-9)


def test_nested_fixed_point():
    W = ZeroSetSpec((0.5, -0.6, 0.7j))
    x = W.polynomial()
    chain = [W.prefix(1), W.prefix(2), W]
    for P in nested_projection_sequence(x, chain, 2.5):
        n = max(P.size, x.size)
        assert np.max(np.abs(_pad(P, n) - _pad(x, n))) < 1e-9


def test_nested_distances_increase():
    W = ZeroSetSpec((0.5, -0.6, 0.7j))
    chain = [W.prefix(1), W.prefix(2), W]
    dists = []
    for P in nested_projection_sequence([1.0], chain, 2.5):
        r = -P
        r[0] += 1
        dists.append(p_norm(r, 2.5))
    assert dists[0] < dists[1] < dists[2]


def test_nested_rejects_unnested_chain():
    with pytest.raises(PreconditionError):
        nested_projection_sequence([1.0], [ZeroSetSpec((0.5,)), ZeroSetSpec((0.6,))], 2.0)
