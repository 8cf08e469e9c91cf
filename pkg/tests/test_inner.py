import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from pinner.core import ZeroSetSpec, bj_residual, evaluate, p_norm, p_norm_power, shift, signed_power
from pinner.errors import PreconditionError
from pinner.inner import (
    b_factor_norm,
    b_factor_norm_power,
    b_factor_norm_power_self,
    inner_by_projection,
    inner_function,
    inner_norm_from_phi,
    linear_inner_closed_form,
    linear_inner_coefs,
    phi_from_inner,
    phi_norm_power_from_inner_norm,
    closed_form_degree,
    series_cap,
    solve_inner_newton,
    verify_p_inner,
)
from pinner.projection import SolverOptions, extremal_phi_direct

disk = st.builds(
    lambda r, t: r * cmath.exp(1j * t), st.floats(0.05, 0.95), st.floats(0, 2 * math.pi)
)


def _blaschke_series(W, degree):
    """Taylor coefficients of prod (1/w) (w - z)/(1 - conj(w) z), by power-series recursion."""
    out = np.zeros(degree + 1, dtype=complex)
    out[0] = 1.0
    for w in W:
        # (1 - z/w) * sum (conj(w) z)**k
        geo = np.conj(w) ** np.arange(degree + 1)
        term = np.convolve([1, -1 / w], geo)[: degree + 1]
        out = np.convolve(out, term)[: degree + 1]
    return out


def test_closed_form_p2_half():
    res = linear_inner_closed_form(0.5, 2.0, 50)
    assert res.J[1] == pytest.approx(-1.5)
    assert res.J[2] == pytest.approx(-0.75)
    assert res.norm == pytest.approx(2.0, abs=1e-9)
    assert abs(evaluate(res.J, 0.5)) < 1e-12


def test_closed_form_orthogonal_to_shift():
    J = linear_inner_closed_form(0.5, 3.0, 60).J
    assert abs(bj_residual(J, shift(J, 1), 3.0)) < 1e-10


@given(disk, st.floats(1.2, 6.0))
@settings(max_examples=40)
def test_closed_form_is_p_inner(w, p):
    J = linear_inner_coefs(w, p, closed_form_degree(w, p))
    scale = p_norm_power(J, p)
    assert max(verify_p_inner(J, p, 10)) <= 1e-10 * scale
    assert abs(evaluate(J, w)) <= 1e-9 * scale


def test_closed_form_rejects_bad_points():
    for w in (0.0, 1.0, 1.5j):
        with pytest.raises(PreconditionError):
            linear_inner_coefs(w, 2.0, 10)


def test_verify_p_inner_examples():
    assert verify_p_inner([0, 0, 1], 3.0) == [0.0] * 20
    assert verify_p_inner([1], 1.7) == [0.0] * 20
    assert verify_p_inner([1, 1], 2.0)[0] == pytest.approx(1.0)
    with pytest.raises(PreconditionError):
        verify_p_inner([0, 0], 2.0)


def test_b_factor_half():
    assert b_factor_norm_power(0.5, 2.0, 2.0) == 4.0
    assert b_factor_norm(0.5, 2.0, 2.0) == pytest.approx(2.0)


def test_b_factor_matches_direct_summation():
    rng = np.random.default_rng(11)
    for _ in range(30):
        w, r, t = rng.uniform(0.1, 0.9), rng.uniform(1.2, 5), rng.uniform(1.2, 5)
        c = linear_inner_coefs(w, r, 500)
        assert b_factor_norm_power(w, r, t) == pytest.approx(p_norm_power(c, t), rel=1e-12)


def test_b_factor_tends_to_one_at_boundary():
    vals = [b_factor_norm(1 - 10.0**-k, 2.5, 1.7) for k in range(1, 9)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # The excess decays like (1 - |w|)**(t - 1).
    assert vals[-1] - 1.0 < 1e-5


def test_b_factor_self_formula_agrees():
    rng = np.random.default_rng(5)
    for _ in range(50):
        w, r = rng.uniform(0.01, 0.99), rng.uniform(1.05, 8)
        assert b_factor_norm_power_self(w, r) == pytest.approx(b_factor_norm_power(w, r, r), rel=1e-12)


def test_newton_single_real_root_constant():
    r, p = 0.6, 3.0
    pc = p / (p - 1)
    res = solve_inner_newton(ZeroSetSpec((r,)), p)
    C = complex(res.constants.ravel()[0])
    assert signed_power(C, pc - 1) == pytest.approx(-(1 - r**pc) / r**pc, rel=1e-10)


def test_newton_p2_is_blaschke_product():
    W = (0.5, -0.3)
    res = solve_inner_newton(ZeroSetSpec(W), 2.0)
    ref = _blaschke_series(W, res.J.size - 1)
    assert np.max(np.abs(res.J - ref)) < 1e-8


@pytest.mark.parametrize(
    "W,p",
    [
        ((0.5, -0.3 + 0.4j), 1.5),
        ((0.5, -0.3 + 0.4j), 3.0),
        ((0.7j, 0.7j, -0.2), 2.5),
        ((0.3, 0.6, -0.8), 4.0),
    ],
)
def test_newton_agrees_with_projection(W, p):
    W = ZeroSetSpec(W)
    a = solve_inner_newton(W, p).J
    b = inner_by_projection(W, p).J
    n = min(a.size, b.size)
    assert np.max(np.abs(a[:n] - b[:n])) < 1e-6
    assert max(np.max(np.abs(a[n:]), initial=0), np.max(np.abs(b[n:]), initial=0)) < 1e-6


def test_newton_vanishes_with_multiplicity():
    W = ZeroSetSpec.from_pairs([(0.4 + 0.3j, 3)])
    J = solve_inner_newton(W, 3.0).J
    for k in range(3):
        assert abs(evaluate(J, 0.4 + 0.3j, k)) < 1e-9


def test_near_coincident_warnings():
    close = solve_inner_newton(ZeroSetSpec((0.5, 0.5 + 1e-5)), 2.0)
    assert "ill-conditioned" in close.warnings[0]
    merged = solve_inner_newton(ZeroSetSpec((0.5, 0.5 + 1e-10)), 2.0)
    assert "merged" in merged.warnings[0]
    assert solve_inner_newton(ZeroSetSpec((0.5, -0.5)), 2.0).warnings == ()


def test_series_cap():
    K = series_cap(0.5, 1.0)
    assert 0.5**K < 1e-14 <= 0.5 ** (K - 1)
    assert series_cap(0.5, 1.0, 3) > K


def test_empty_zero_set_is_one():
    res = solve_inner_newton(ZeroSetSpec(()), 3.0)
    assert res.norm == 1.0


def test_inner_function_dispatch():
    W = ZeroSetSpec((0.5,))
    for method in ("closed", "newton", "project"):
        assert inner_function(W, 2.0, method).norm == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(PreconditionError):
        inner_function(ZeroSetSpec((0.5, 0.6)), 2.0, "closed")
    with pytest.raises(PreconditionError):
        inner_function(W, 2.0, "bogus")


def test_phi_p2_single_zero():
    J = linear_inner_closed_form(0.5, 2.0, 80)
    ph = phi_from_inner(J, 2.0)
    assert ph.g0 == pytest.approx(0.25)
    assert ph.phi_norm == pytest.approx(math.sqrt(0.75), abs=1e-12)
    direct = extremal_phi_direct(ZeroSetSpec((0.5,)), 2.0)
    assert ph.phi_norm == pytest.approx(p_norm(direct, 2.0), abs=1e-6)


def _inverse_condition(x, p):
    """Relative condition number of ``x -> inner_norm_from_phi(x)``."""
    pc = p / (p - 1)
    y = inner_norm_from_phi(x, p)
    t = x**pc
    return (y - 1) / y * (p + (p - 1) * pc * t / -math.expm1(pc * math.log(x)))


@given(st.floats(1.2, 6.0), st.floats(1e-3, 1e4))
def test_phi_norm_formula_matches_vector(p, excess):
    # Phi = 1 - g0 J, J = 1 + excess**(1/p) z has ||J||**p = 1 + excess.
    J = np.array([1.0, excess ** (1 / p)])
    ph = phi_from_inner(J, p)
    assert ph.phi_norm**p == pytest.approx(phi_norm_power_from_inner_norm(1 + excess, p), rel=1e-10)
    # For small p and large excess, 1 - phi_norm drops below double resolution.
    assume(ph.phi_norm < 1.0 - 1e-13)
    # The inverse amplifies the rounding in phi_norm by its condition number.
    cond = _inverse_condition(ph.phi_norm, p)
    assert inner_norm_from_phi(ph.phi_norm, p) == pytest.approx(1 + excess, rel=max(1e-12, 64e-16 * cond))


def test_phi_limit_near_trivial_inner():
    ph = phi_from_inner(np.array([1.0, 1e-8]), 2.0)
    assert ph.g0 == pytest.approx(1.0)
    assert ph.phi_norm < 1e-7


def test_inner_norm_from_phi_examples():
    assert inner_norm_from_phi(0.0, 3.0) == 1.0
    assert inner_norm_from_phi(math.sqrt(0.75), 2.0) == pytest.approx(4.0)
    with pytest.raises(PreconditionError):
        inner_norm_from_phi(1.0, 2.0)


def test_phi_requires_normalized_inner():
    with pytest.raises(PreconditionError):
        phi_from_inner(np.array([2.0, 1.0]), 2.0)
    with pytest.raises(PreconditionError):
        phi_from_inner(np.array([1.0]), 2.0)


def test_inner_json_fields():
    res = solve_inner_newton(ZeroSetSpec((0.5,)), 3.0)
    out = res.to_json()
    assert set(out) >= {"J", "norm", "residuals", "method", "iterations", "warnings"}
