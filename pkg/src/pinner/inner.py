"""p-inner functions: closed forms, the Newton system for finite zero sets,
orthogonality checks, and the extremal function Phi.

For a finite zero set with distinct roots ``w_m`` of multiplicity ``n_m``
the p-inner function has coefficients

    J_0 = 1,   J_k = (sum_{m, j < n_m} C_{j,m} k**j w_m**k)**<p'-1>,  k >= 1,

and the ``N = sum n_m`` constants are fixed by ``J^(i)(w_m) = 0`` for
``i < n_m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    COINCIDENT_ROOT_TOL,
    Parameters,
    ZeroSetSpec,
    as_coefs,
    bj_residual,
    p_norm,
    p_norm_power,
    shift,
)
from .errors import ConvergenceError, PreconditionError
from .projection import SolverOptions, project_shift_span

N_CHECK = 20
SERIES_TOL = 1e-14
CLOSE_ROOT_TOL = 1e-4


@dataclass(frozen=True)
class InnerResult:
    J: np.ndarray
    norm: float
    orth_residuals: tuple
    method: str
    iterations: int = 0
    warnings: tuple = ()
    constants: Optional[np.ndarray] = None

    def to_json(self) -> dict:
        from .io import coefs_to_json

        out = {
            "J": coefs_to_json(self.J),
            "norm": self.norm,
            "residuals": list(self.orth_residuals),
            "method": self.method,
            "iterations": self.iterations,
            "warnings": list(self.warnings),
        }
        if self.constants is not None:
            out["constants"] = coefs_to_json(self.constants)
        return out


@dataclass(frozen=True)
class PhiResult:
    phi: np.ndarray
    phi_norm: float
    g0: float


def verify_p_inner(J, params: "Parameters | float", n_max: int = N_CHECK) -> list:
    """``|(J**<p-1>, z**n J)|`` for ``n = 1..n_max``; all zero iff ``J`` is p-inner."""
    p = Parameters.coerce(params).p
    J = as_coefs(J)
    if not np.any(J != 0):
        raise PreconditionError("J must be nonzero")
    return [abs(bj_residual(J, shift(J, n), p)) for n in range(1, n_max + 1)]


def _result(J, p, method, iterations=0, warnings=(), constants=None, n_check=N_CHECK) -> InnerResult:
    J = as_coefs(J)
    return InnerResult(
        J=J,
        norm=p_norm(J, p),
        orth_residuals=tuple(verify_p_inner(J, p, n_check)),
        method=method,
        iterations=iterations,
        warnings=tuple(warnings),
        constants=constants,
    )


def _check_point(w) -> complex:
    w = complex(w)
    if w == 0:
        raise PreconditionError("w must be nonzero")
    if not abs(w) < 1.0:
        raise PreconditionError(f"w = {w!r} is not inside the unit disk")
    return w


def linear_inner_coefs(w, params: "Parameters | float", degree: int) -> np.ndarray:
    """Taylor coefficients of ``(1 - z/w) / (1 - w**<p'-1> z)`` up to ``degree``."""
    pc = Parameters.coerce(params).p_conj
    w = _check_point(w)
    if degree < 1:
        raise PreconditionError("degree must be positive")
    a = abs(w)
    ratio = a ** (pc - 2.0) * w.conjugate()
    c = np.empty(degree + 1, dtype=np.complex128)
    c[0] = 1.0
    k = np.arange(degree, dtype=np.float64)
    # ratio**k split into modulus and phase so long expansions do not accumulate error.
    c[1:] = -((1.0 - a**pc) / w) * a ** ((pc - 1.0) * k) * np.exp(1j * k * np.angle(ratio))
    return as_coefs(c)


def linear_inner_closed_form(w, params: "Parameters | float", degree: int) -> InnerResult:
    p = Parameters.coerce(params).p
    return _result(linear_inner_coefs(w, p, degree), p, "closed_form")


def b_factor_norm_power(w, r: float, t: float) -> float:
    """``||B_{w,r}||_t**t`` where ``B_{w,r}`` is the r-inner function of ``1 - z/w``."""
    a = abs(complex(w))
    if not 0.0 < a < 1.0:
        raise PreconditionError("need 0 < |w| < 1")
    if not (r > 1.0 and t > 1.0):
        raise PreconditionError("need r > 1 and t > 1")
    rc = r / (r - 1.0)
    # 1 - a**x computed as -expm1(x log a) to keep accuracy as |w| -> 1.
    la = math.log(a)
    num = (-math.expm1(rc * la)) ** t
    den = a**t * (-math.expm1((rc - 1.0) * t * la))
    return 1.0 + num / den


def b_factor_norm(w, r: float, t: float) -> float:
    return b_factor_norm_power(w, r, t) ** (1.0 / t)


def b_factor_norm_power_self(w, r: float) -> float:
    """``||B_{w,r}||_r**r = 1 + (1 - |w|**r')**(r-1) / |w|**r``."""
    a = abs(complex(w))
    if not 0.0 < a < 1.0:
        raise PreconditionError("need 0 < |w| < 1")
    rc = r / (r - 1.0)
    return 1.0 + (-math.expm1(rc * math.log(a))) ** (r - 1.0) / a**r


def closed_form_degree(w, params: "Parameters | float") -> int:
    """Truncation degree for the closed form.

    The orthogonality residuals weigh the dropped coefficients through their
    (p-1)-th power, so for p < 2 the series is carried further.
    """
    P = Parameters.coerce(params)
    tol = max(SERIES_TOL ** max(1.0, 1.0 / (P.p - 1.0)), 1e-300)
    return series_cap(abs(complex(w)), P.p_conj - 1.0, 1, tol)


# Newton system ---------------------------------------------------------------


def series_cap(R: float, s: float, max_mult: int = 1, tol: float = SERIES_TOL) -> int:
    """Smallest ``K`` with ``K**(max_mult-1) R**(s K) < tol`` (``s = p' - 1``)."""
    if R <= 0.0:
        return 1
    rate = s * math.log(R)
    K = max(1, math.ceil(math.log(tol) / rate))
    while (max_mult - 1) * math.log(K) + rate * K >= math.log(tol):
        K += max(1, K // 8)
    return K


def _near_coincident(W: ZeroSetSpec) -> list:
    msgs = []
    pts = W.points
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = abs(pts[i] - pts[j])
            if 0.0 < d < COINCIDENT_ROOT_TOL:
                msgs.append(
                    f"roots {pts[i]!r} and {pts[j]!r} are {d:.1e} apart; merged into one root of higher multiplicity"
                )
            elif COINCIDENT_ROOT_TOL <= d < CLOSE_ROOT_TOL:
                msgs.append(f"roots {pts[i]!r} and {pts[j]!r} are {d:.1e} apart; the constants are ill-conditioned")
    return msgs


class _NewtonSystem:
    """Residual map ``C -> (J^(i)(w_m))`` and its real Jacobian."""

    def __init__(self, W: ZeroSetSpec, K: int):
        self.roots = [w for w, _ in W.distinct]
        self.mults = [m for _, m in W.distinct]
        k = np.arange(1, K + 1, dtype=np.float64)
        self.K = K
        basis, rows, const = [], [], []
        for w, n in zip(self.roots, self.mults):
            wk = np.exp(k * np.log(w))
            for j in range(n):
                basis.append(k**j * wk)
            for i in range(n):
                fall = np.ones_like(k)
                for q in range(i):
                    fall *= k - q
                # d^i/dz^i z**k at w, for k >= 1; the J_0 = 1 term only enters i = 0.
                rows.append(np.where(k >= i, fall * np.exp((k - i) * np.log(w)), 0.0))
                const.append(1.0 if i == 0 else 0.0)
        self.E = np.array(basis, dtype=np.complex128).T  # K x N
        self.M = np.array(rows, dtype=np.complex128)  # N x K
        self.c = np.array(const, dtype=np.complex128)
        self.N = self.E.shape[1]

    def coefs(self, C, s: float) -> np.ndarray:
        u = self.E @ C
        r = np.abs(u)
        J = np.zeros(self.K + 1, dtype=np.complex128)
        J[0] = 1.0
        nz = r > 0
        Jk = np.zeros_like(u)
        Jk[nz] = r[nz] ** (s - 1.0) * np.conj(u[nz])
        J[1:] = Jk
        return J

    def residual(self, C, s: float) -> np.ndarray:
        return self.c + self.M @ self.coefs(C, s)[1:]

    def real_residual(self, C, s):
        R = self.residual(C, s)
        return np.concatenate([R.real, R.imag])

    def real_jacobian(self, C, s: float) -> np.ndarray:
        u = self.E @ C
        r = np.maximum(np.abs(u), 1e-300)
        # u**<s> = |u|**(s-1) conj(u):  d = A du + B conj(du).
        A = 0.5 * (s - 1.0) * r ** (s - 3.0) * np.conj(u) ** 2
        B = 0.5 * (s + 1.0) * r ** (s - 1.0)
        P = self.M @ (A[:, None] * self.E)
        Q = self.M @ (B[:, None] * np.conj(self.E))
        S, D = P + Q, P - Q
        return np.block([[S.real, -D.imag], [S.imag, D.real]])

    def rounding_floor(self, C, s: float) -> float:
        """Residual size explained by rounding alone.

        Constants for roots near 0 are huge and cancel inside ``u = E C``;
        the resulting error in ``u`` propagates through ``u**<s>`` and ``M``.
        """
        eps = np.finfo(float).eps
        u = self.E @ C
        du = eps * (np.abs(self.E) @ np.abs(C))
        r = np.maximum(np.abs(u), 1e-300)
        dJ = max(s, 1.0) * r ** (s - 1.0) * du + eps * r**s
        return float(10.0 * np.linalg.norm(np.abs(self.M) @ dJ))

    def linear_start(self) -> np.ndarray:
        """At p = 2, ``J_k = conj(u_k)`` and the system is linear in ``conj(C)``."""
        G = self.M @ np.conj(self.E)
        return np.conj(np.linalg.solve(G, -self.c))


def _newton_solve(system: _NewtonSystem, C, s: float, tol: float, max_iters: int):
    def to_c(x):
        return x[: system.N] + 1j * x[system.N :]

    x = np.concatenate([C.real, C.imag])
    R = system.real_residual(to_c(x), s)
    rn = float(np.linalg.norm(R))
    it = 0
    while rn > tol and it < max_iters:
        Jac = system.real_jacobian(to_c(x), s)
        # Constants for roots near 0 are huge, so equilibrate rows and columns.
        rs = 1.0 / np.maximum(np.max(np.abs(Jac), axis=1), 1e-300)
        Js = Jac * rs[:, None]
        cs = 1.0 / np.maximum(np.max(np.abs(Js), axis=0), 1e-300)
        Js = Js * cs[None, :]
        try:
            dx = cs * np.linalg.solve(Js, -R * rs)
        except np.linalg.LinAlgError:
            dx = cs * np.linalg.lstsq(Js, -R * rs, rcond=None)[0]
        t = 1.0
        while t > 1e-10:
            xn = x + t * dx
            Rn = system.real_residual(to_c(xn), s)
            rnn = float(np.linalg.norm(Rn))
            if np.isfinite(rnn) and rnn < (1.0 - 1e-4 * t) * rn:
                break
            t *= 0.5
        else:
            break
        x, R, rn = xn, Rn, rnn
        it += 1
    return to_c(x), rn, it


def solve_inner_newton(
    W: ZeroSetSpec,
    params: "Parameters | float",
    opts: SolverOptions = SolverOptions(),
    *,
    steps: int = 8,
    tol: float = 1e-13,
) -> InnerResult:
    """p-inner function of a finite zero set through the Newton system for ``C_{j,m}``.

    Starts from the linear p = 2 solution and continues in p over ``steps``
    equal steps.
    """
    P = Parameters.coerce(params)
    p = P.p
    if len(W) == 0:
        return _result(np.array([1.0 + 0j]), p, "newton")
    notes = _near_coincident(W)
    R = float(max(abs(w) for w, _ in W.distinct))
    # The series must be long enough along the whole path from p = 2.
    s_min = min(1.0, P.p_conj - 1.0)
    K = opts.truncation_degree or series_cap(R, s_min, max(m for _, m in W.distinct))
    system = _NewtonSystem(W, K)
    C = system.linear_start()
    total = 0
    ps = [2.0 + (p - 2.0) * (i + 1) / steps for i in range(steps)] if p != 2.0 else [2.0]
    rn = float("nan")
    for pi in ps:
        s = 1.0 / (pi - 1.0)
        C, rn, it = _newton_solve(system, C, s, tol, opts.max_iters)
        total += it
    if not rn <= max(tol, system.rounding_floor(C, P.p_conj - 1.0)):
        raise ConvergenceError(
            f"Newton system for the inner function stopped at residual {rn:.3e}",
            last_iterate=C,
            residual=rn,
            iterations=total,
        )
    J = system.coefs(C, P.p_conj - 1.0)
    return _result(J, p, "newton", iterations=total, warnings=notes, constants=C)


def inner_by_projection(
    W: ZeroSetSpec, params: "Parameters | float", opts: SolverOptions = SolverOptions()
) -> InnerResult:
    """The p-inner function as the co-projection of the zero-set polynomial."""
    p = Parameters.coerce(params).p
    if len(W) == 0:
        return _result(np.array([1.0 + 0j]), p, "co_projection")
    res = project_shift_span(W.polynomial(), p, opts)
    return _result(res.co_projection, p, "co_projection", iterations=res.iterations, warnings=_near_coincident(W))


def inner_function(W: ZeroSetSpec, params, method: str = "newton", opts: SolverOptions = SolverOptions()) -> InnerResult:
    if method in ("closed", "closed_form"):
        if len(W.distinct) != 1 or W.distinct[0][1] != 1:
            raise PreconditionError("the closed form needs exactly one simple zero")
        p = Parameters.coerce(params).p
        w = W.points[0]
        degree = opts.truncation_degree or closed_form_degree(w, p)
        return linear_inner_closed_form(w, p, degree)
    if method == "newton":
        return solve_inner_newton(W, params, opts)
    if method in ("project", "co_projection"):
        return inner_by_projection(W, params, opts)
    raise PreconditionError(f"unknown method {method!r}")


# Extremal function ------------------------------------------------------------


def phi_from_inner(J, params: "Parameters | float") -> PhiResult:
    """``Phi = 1 - g0 J`` with ``g0 = 1 / (1 + (||J||_p**p - 1)**(p'-1))``."""
    P = Parameters.coerce(params)
    if isinstance(J, InnerResult):
        J = J.J
    J = as_coefs(J)
    if abs(J[0] - 1.0) > 1e-12:
        raise PreconditionError("J must be normalized by J(0) = 1")
    excess = math.fsum(np.abs(J[1:]) ** P.p)
    if not excess > 0.0:
        raise PreconditionError("||J||_p must exceed 1")
    g0 = 1.0 / (1.0 + excess ** (P.p_conj - 1.0))
    phi = -g0 * np.asarray(J)
    phi[0] += 1.0
    return PhiResult(phi=as_coefs(phi), phi_norm=p_norm(phi, P.p), g0=g0)


def phi_norm_power_from_inner_norm(norm_power: float, params: "Parameters | float") -> float:
    """``||Phi||_p**p = A / (1 + A**(p'-1))**(p-1)`` with ``A = ||J||_p**p - 1``."""
    P = Parameters.coerce(params)
    A = norm_power - 1.0
    if A < 0:
        raise PreconditionError("||J||_p**p must be at least 1")
    return A / (1.0 + A ** (P.p_conj - 1.0)) ** (P.p - 1.0)


def inner_norm_from_phi(phi_norm: float, params: "Parameters | float") -> float:
    """``||J||_p**p = 1 + ||Phi||_p**p / (1 - ||Phi||_p**p')**(p-1)``; inverse of the map above."""
    P = Parameters.coerce(params)
    if not 0.0 <= phi_norm < 1.0:
        raise PreconditionError("phi_norm must lie in [0, 1)")
    if phi_norm == 0.0:
        return 1.0
    # 1 - x**p' as -expm1(p' log x) stays accurate when phi_norm is near 1.
    return 1.0 + phi_norm**P.p / (-math.expm1(P.p_conj * math.log(phi_norm))) ** (P.p - 1.0)
