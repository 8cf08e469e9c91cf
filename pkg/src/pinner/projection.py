"""Metric projections onto shift-generated and zero-constrained subspaces.

Every problem here has the form

    minimize  ||b - A x||_p^p   over complex x,

where the columns of ``A`` are consecutive shifts ``z**i g`` of one
polynomial ``g``.  The objective is convex and C^1 for every ``p > 1``; its
stationarity condition is exactly Birkhoff-James orthogonality of the
residual ``b - A x`` to every column.  ``A`` is banded (bandwidth
``deg g``), so the Hessian is banded as well and Newton steps cost
O(n deg(g)**2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .core import (
    Parameters,
    ZeroSetSpec,
    as_coefs,
    p_norm,
    seq_signed_power,
)
from .errors import ConvergenceError, PreconditionError

DEFAULT_EPS = 1e-12
DEFAULT_MAX_DEGREE = 200_000


@dataclass(frozen=True)
class SolverOptions:
    """Knobs shared by the projection solvers.

    ``truncation_degree=None`` selects the degree from the root moduli and
    confirms it by re-solving at twice the degree.
    """

    truncation_degree: Optional[int] = None
    grad_tol: float = 1e-10
    max_iters: int = 500
    step_rule: str = "backtracking"
    method: str = "newton"
    step_size: float = 1e-2
    step_tol: float = 1e-12
    eps: float = DEFAULT_EPS
    max_degree: int = DEFAULT_MAX_DEGREE
    norm_change_tol: float = 1e-9

    def __post_init__(self):
        if self.grad_tol <= 0:
            raise PreconditionError("grad_tol must be positive")
        if self.max_iters <= 0:
            raise PreconditionError("max_iters must be positive")
        if self.truncation_degree is not None and self.truncation_degree <= 0:
            raise PreconditionError("truncation_degree must be positive")
        if self.step_rule not in ("fixed", "backtracking"):
            raise PreconditionError(f"unknown step rule {self.step_rule!r}")
        if self.method not in ("newton", "gradient"):
            raise PreconditionError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class ProjectionResult:
    co_projection: np.ndarray
    multiplier_poly: np.ndarray
    norm: float
    grad_norm: float
    iterations: int
    degree: int = 0

    def to_json(self) -> dict:
        from .io import coefs_to_json

        return {
            "co_projection": coefs_to_json(self.co_projection),
            "multiplier_poly": coefs_to_json(self.multiplier_poly),
            "norm": self.norm,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "degree": self.degree,
        }


@dataclass
class _Solve:
    x: np.ndarray
    residual: np.ndarray
    grad_norm: float
    iterations: int


class ShiftProblem:
    """``minimize ||b - sum_i x_i z**(start+i) g||_p^p`` for ``i < n``."""

    def __init__(self, b, g, start: int, n: int, p: float):
        self.g = np.asarray(g, dtype=np.complex128)
        self.start = int(start)
        self.n = int(n)
        self.p = float(p)
        m = self.g.size
        self.length = max(np.asarray(b).size, self.start + self.n - 1 + m)
        self.b = np.zeros(self.length, dtype=np.complex128)
        bb = np.asarray(b, dtype=np.complex128)
        self.b[: bb.size] = bb
        rows, cols, vals = [], [], []
        for j, gj in enumerate(self.g):
            if gj == 0:
                continue
            idx = np.arange(self.n)
            rows.append(self.start + idx + j)
            cols.append(idx)
            vals.append(np.full(self.n, gj))
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        self.A = sp.csr_matrix((vals, (rows, cols)), shape=(self.length, self.n))
        ar = sp.csr_matrix((vals.real, (rows, cols)), shape=(self.length, self.n))
        ai = sp.csr_matrix((vals.imag, (rows, cols)), shape=(self.length, self.n))
        # Real form of x -> A x with x stacked as [Re x, Im x].
        self.AR = sp.bmat([[ar, -ai], [ai, ar]], format="csr")
        self.ART = self.AR.T.tocsr()

    def residual(self, x):
        return self.b - self.A @ x

    def objective(self, J, mu: float = 0.0) -> float:
        if mu == 0.0:
            return math.fsum(np.abs(J) ** self.p)
        return math.fsum((np.abs(J) ** 2 + mu * mu) ** (0.5 * self.p))

    def complex_grad(self, J, mu: float = 0.0) -> np.ndarray:
        """``G_i = (J**<p-1>, z**(start+i) g)``; the real gradient has norm ``p |G|``.

        With ``mu > 0`` this is the gradient of the smoothed objective
        ``sum (|J_k|**2 + mu**2)**(p/2)``.
        """
        if mu == 0.0:
            y = seq_signed_power(J, self.p - 1.0)
        else:
            y = (np.abs(J) ** 2 + mu * mu) ** (0.5 * (self.p - 2.0)) * np.conj(J)
        return self.A.T @ y

    def real_grad(self, J, mu: float = 0.0) -> np.ndarray:
        G = self.complex_grad(J, mu)
        return np.concatenate([-self.p * G.real, self.p * G.imag])

    def hessian(self, J, mu: float = 0.0):
        p = self.p
        rho2 = np.maximum(np.abs(J) ** 2 + mu * mu, 1e-300)
        u, v = J.real, J.imag
        base = p * rho2 ** (0.5 * (p - 2.0))
        wrr = base * (1.0 + (p - 2.0) * u * u / rho2)
        wii = base * (1.0 + (p - 2.0) * v * v / rho2)
        wri = base * (p - 2.0) * u * v / rho2
        W = sp.bmat(
            [[sp.diags(wrr), sp.diags(wri)], [sp.diags(wri), sp.diags(wii)]],
            format="csr",
        )
        return (self.ART @ W @ self.AR).tocsc()

    def to_complex(self, X):
        return X[: self.n] + 1j * X[self.n :]

    def to_real(self, x):
        return np.concatenate([x.real, x.imag])

    def least_squares_fit(self, target) -> np.ndarray:
        """``x`` minimizing ``||target - A x||_2``."""
        H = (self.ART @ self.AR).tocsc()
        t = np.asarray(target, dtype=np.complex128)
        rhs = self.ART @ np.concatenate([t.real, t.imag])
        return self.to_complex(_robust_solve(H, rhs))

    def least_squares_start(self) -> np.ndarray:
        """Exact minimizer at p = 2."""
        return self.least_squares_fit(self.b)


def _robust_solve(H, rhs):
    diag = H.diagonal()
    scale = float(np.max(np.abs(diag))) if diag.size else 1.0
    mu = 0.0
    eye = sp.identity(H.shape[0], format="csc")
    for _ in range(12):
        M = H if mu == 0.0 else (H + mu * eye).tocsc()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                X = spla.spsolve(M, rhs)
            except RuntimeError:
                X = None
        if X is not None and np.all(np.isfinite(X)):
            return X
        mu = max(mu * 100.0, 1e-14 * max(scale, 1e-300))
    raise ConvergenceError("could not solve the Newton system even with damping")


def _newton_stage(problem: ShiftProblem, X, mu: float, tol: float, step_tol: float, max_iters: int):
    """Damped Newton on the objective smoothed by ``mu``; returns ``(X, iterations)``.

    Stops once the gradient is below ``tol`` and the Newton step is below
    ``step_tol`` in every coordinate.  The step test matters for coordinates
    where the objective is nearly flat: they barely move the gradient norm.
    """
    it = 0
    J = problem.residual(problem.to_complex(X))
    F = problem.objective(J, mu)
    g = problem.real_grad(J, mu)
    while it < max_iters:
        gnorm = float(np.linalg.norm(g))
        delta = -_robust_solve(problem.hessian(J, mu), g)
        slope = float(g @ delta)
        if not slope < 0:
            delta, slope = -g, -float(g @ g)
        small_step = float(np.max(np.abs(delta), initial=0.0)) <= step_tol
        if gnorm <= tol and small_step:
            break
        t = 1.0
        accepted = False
        for _ in range(60):
            Xn = X + t * delta
            Jn = problem.residual(problem.to_complex(Xn))
            Fn = problem.objective(Jn, mu)
            if Fn <= F + 1e-4 * t * slope:
                accepted = True
                break
            if abs(Fn - F) <= 1e-13 * max(abs(F), 1.0):
                gn = problem.real_grad(Jn, mu)
                if np.linalg.norm(gn) < gnorm:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        it += 1
        X, J, F = Xn, Jn, Fn
        g = problem.real_grad(J, mu)
    return X, it


def _gradient_noise_floor(problem: ShiftProblem, X, J) -> float:
    """Size of the gradient error caused by rounding in ``J = b - A x``.

    For p < 2 the map ``J -> J**<p-1>`` has unbounded slope at 0, so an
    entry of size ``1e-20`` carrying a ``1e-17`` rounding error moves the
    gradient far more than the entry itself suggests.  Large coefficients in
    ``A`` raise the floor of the sums ``A^T y`` as well.
    """
    p = problem.p
    x = problem.to_complex(X)
    absA = abs(problem.A)
    delta = 4.0 * np.finfo(float).eps * (np.abs(problem.b) + absA @ np.abs(x))
    mag = np.maximum(np.abs(J), delta)
    dy = max(1.0, abs(p - 1.0)) * mag ** (p - 2.0) * delta
    # Rounding in the sums A^T y adds eps |A|^T |y|.
    dy = dy + 4.0 * np.finfo(float).eps * np.abs(J) ** (p - 1.0)
    return float(np.sqrt(2.0) * p * np.linalg.norm(absA.T @ dy))


def _newton(problem: ShiftProblem, x0, opts: SolverOptions) -> _Solve:
    """Newton path-following on ``sum (|J_k|**2 + mu**2)**(p/2)`` with ``mu -> 0``.

    Plain Newton on ``|h|**p`` overshoots tiny coordinates when p < 2 and
    stalls on them when p > 2.  Smoothing gives every coordinate curvature of
    order ``mu**(p-2)``; shrinking ``mu`` tenfold per stage keeps each stage
    inside Newton's quadratic region.  For p < 2 a final unsmoothed stage
    removes the smoothing bias.  For p > 2 the bias on the gradient is below
    ``mu**(p-1)`` per coordinate, so the path stops once the true gradient
    meets the tolerance.
    """
    p = problem.p
    X = problem.to_real(np.asarray(x0, dtype=np.complex128))
    scale = max(float(np.max(np.abs(problem.b))), 1e-300)
    total = 0
    budget = opts.max_iters

    def true_gnorm(X):
        J = problem.residual(problem.to_complex(X))
        return float(np.linalg.norm(problem.real_grad(J))), J

    if p == 2.0:
        X, it = _newton_stage(problem, X, 0.0, opts.grad_tol, opts.step_tol, budget)
        total += it
    else:
        mu = scale
        floor = 1e-20 * scale
        while mu > floor:
            stage_tol = max(opts.grad_tol, 1e-3 * mu ** (p - 1.0))
            X, it = _newton_stage(problem, X, mu, stage_tol, max(opts.step_tol, 1e-3 * mu), budget - total)
            total += it
            if total >= budget:
                break
            mu *= 0.1
        if total < budget:
            # Tail coordinates can be many orders below step_tol, so aim past the
            # tolerance; a stalled line search ends the stage anyway.
            X, it = _newton_stage(problem, X, 0.0, 1e-2 * opts.grad_tol, opts.step_tol, budget - total)
            total += it
    gnorm, J = true_gnorm(X)
    if gnorm > max(opts.grad_tol, _gradient_noise_floor(problem, X, J)):
        raise ConvergenceError(
            f"Newton projection stopped with gradient norm {gnorm:.3e} > {opts.grad_tol:.1e} "
            f"after {total} iterations",
            last_iterate=problem.to_complex(X),
            residual=gnorm,
            iterations=total,
        )
    return _Solve(problem.to_complex(X), J, gnorm, total)


def _accelerated_gradient(problem: ShiftProblem, x0, opts: SolverOptions) -> _Solve:
    """Nesterov-accelerated gradient descent with backtracking and adaptive restart."""
    X = problem.to_real(np.asarray(x0, dtype=np.complex128))
    Y = X.copy()
    theta = 1.0
    L = 1.0 / opts.step_size
    J = problem.residual(problem.to_complex(X))
    F_x = problem.objective(J)
    for it in range(1, opts.max_iters + 1):
        Jy = problem.residual(problem.to_complex(Y))
        Fy = problem.objective(Jy)
        gy = problem.real_grad(Jy)
        if opts.step_rule == "fixed":
            Xn = Y - opts.step_size * gy
            Jn = problem.residual(problem.to_complex(Xn))
            Fn = problem.objective(Jn)
        else:
            while True:
                Xn = Y - gy / L
                Jn = problem.residual(problem.to_complex(Xn))
                Fn = problem.objective(Jn)
                if Fn <= Fy - 0.5 / L * float(gy @ gy) + 1e-15 * max(abs(Fy), 1.0) or L > 1e30:
                    break
                L *= 2.0
        gn = problem.real_grad(Jn)
        gnorm = float(np.linalg.norm(gn))
        if gnorm <= opts.grad_tol:
            return _Solve(problem.to_complex(Xn), Jn, gnorm, it)
        if Fn > F_x:
            # Restart the momentum when the objective goes up.
            theta = 1.0
            Y = X.copy()
            continue
        theta_n = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
        Y = Xn + ((theta - 1.0) / theta_n) * (Xn - X)
        X, F_x, theta = Xn, Fn, theta_n
        if opts.step_rule == "backtracking":
            L *= 0.9
    J = problem.residual(problem.to_complex(X))
    gnorm = float(np.linalg.norm(problem.real_grad(J)))
    raise ConvergenceError(
        f"gradient method did not converge in {opts.max_iters} iterations (gradient norm {gnorm:.3e})",
        last_iterate=problem.to_complex(X),
        residual=gnorm,
        iterations=opts.max_iters,
    )


def solve_shift_problem(problem: ShiftProblem, opts: SolverOptions, x0=None) -> _Solve:
    if x0 is None:
        x0 = problem.least_squares_start()
    else:
        x0 = np.asarray(x0, dtype=np.complex128)
        if x0.size < problem.n:
            x0 = np.concatenate([x0, np.zeros(problem.n - x0.size, dtype=np.complex128)])
        x0 = x0[: problem.n]
    if opts.method == "gradient":
        return _accelerated_gradient(problem, x0, opts)
    return _newton(problem, x0, opts)


def decay_rate(f, p: float) -> float:
    """Geometric decay ratio of the multiplier series for the co-projection of ``f``.

    Zeros inside the disk make the co-projection decay like ``R**(p'-1)``;
    zeros outside add poles of ``J / f`` at distance ``|rho|``.
    """
    a = np.trim_zeros(np.asarray(f, dtype=np.complex128), "b")
    if a.size <= 1:
        return 0.0
    roots = np.roots(a[::-1])
    mods = np.abs(roots)
    pc = p / (p - 1.0)
    inside = mods[mods < 1.0]
    outside = mods[mods >= 1.0]
    rate = 0.0
    if inside.size:
        rate = max(rate, float(inside.max()) ** (pc - 1.0))
    if outside.size:
        rate = max(rate, 1.0 / float(outside.min()))
    return rate


def default_degree(f, p: float, eps: float = DEFAULT_EPS, max_degree: int = DEFAULT_MAX_DEGREE) -> int:
    """``deg f + ceil(log eps / log rate)`` capped at ``max_degree``."""
    a = np.trim_zeros(np.asarray(f, dtype=np.complex128), "b")
    deg = max(a.size - 1, 0)
    rate = decay_rate(a, p)
    if rate <= 0.0:
        return max(deg, 1)
    if rate >= 1.0:
        return max_degree
    extra = math.ceil(math.log(eps) / math.log(rate))
    return int(min(max_degree, max(deg + extra, 1)))


def _leading_zeros(a) -> int:
    nz = np.nonzero(np.asarray(a) != 0)[0]
    return int(nz[0]) if nz.size else len(a)


def project_shift_span(
    f,
    params: "Parameters | float",
    opts: SolverOptions = SolverOptions(),
    *,
    origin_multiplicity: int = 0,
    warm_start=None,
) -> ProjectionResult:
    """Co-projection ``J = f - Qf`` of ``f`` onto the closed span of ``z**k f``, ``k >= 1``.

    ``Q`` ranges over polynomials with ``Q(0) = 0`` of degree at most the
    truncation degree.  A zero of ``f`` at the origin must be declared through
    ``origin_multiplicity``; ``z**m`` is then factored out (the shift is an
    isometry) and restored on output.
    """
    p = Parameters.coerce(params).p
    f = as_coefs(f)
    lead = _leading_zeros(f)
    if lead >= f.size:
        raise PreconditionError("f must not be identically zero")
    if lead != origin_multiplicity:
        if lead > 0 and origin_multiplicity == 0:
            raise PreconditionError(
                f"f(0) = 0 (zero of order {lead} at the origin) but no origin multiplicity was declared"
            )
        raise PreconditionError(
            f"declared origin multiplicity {origin_multiplicity} but f vanishes to order {lead} at 0"
        )
    core = f[lead:]
    scale = core[0]
    g = core / scale

    def solve(degree, x0):
        problem = ShiftProblem(g, g, 1, degree, p)
        res = solve_shift_problem(problem, opts, x0)
        return problem, res

    if opts.truncation_degree is not None:
        degree = opts.truncation_degree
        problem, res = solve(degree, warm_start)
    else:
        degree = default_degree(g, p, opts.eps, opts.max_degree)
        problem, res = solve(degree, warm_start)
        norm = p_norm(res.residual, p)
        while 2 * degree <= opts.max_degree:
            problem2, res2 = solve(2 * degree, res.x)
            norm2 = p_norm(res2.residual, p)
            degree, problem, res = 2 * degree, problem2, res2
            if abs(norm2 - norm) < opts.norm_change_tol:
                break
            norm = norm2

    J = scale * res.residual
    if lead:
        J = np.concatenate([np.zeros(lead, dtype=np.complex128), J])
    Q = np.concatenate([[0j], res.x])
    return ProjectionResult(
        co_projection=as_coefs(J),
        multiplier_poly=as_coefs(Q),
        norm=p_norm(J, p),
        grad_norm=res.grad_norm,
        iterations=res.iterations,
        degree=degree,
    )


def _zero_constrained(b, W: ZeroSetSpec, p: float, opts: SolverOptions, warm_start=None, min_degree: int = 0):
    """Minimize ``||b - f_W h||_p`` over polynomials ``h``; returns ``(h, residual, solve)``."""
    fW = W.polynomial()
    if opts.truncation_degree is not None:
        degree = max(opts.truncation_degree, min_degree)
        problem = ShiftProblem(b, fW, 0, degree + 1, p)
        res = solve_shift_problem(problem, opts, warm_start)
        return res.x, res.residual, res, degree
    degree = max(default_degree(fW, p, opts.eps, opts.max_degree), min_degree)
    problem = ShiftProblem(b, fW, 0, degree + 1, p)
    res = solve_shift_problem(problem, opts, warm_start)
    norm = p_norm(res.residual, p)
    while 2 * degree <= opts.max_degree:
        degree *= 2
        problem = ShiftProblem(b, fW, 0, degree + 1, p)
        res = solve_shift_problem(problem, opts, res.x)
        norm2 = p_norm(res.residual, p)
        if abs(norm2 - norm) < opts.norm_change_tol:
            break
        norm = norm2
    return res.x, res.residual, res, degree


def extremal_phi_direct(
    W: ZeroSetSpec, params: "Parameters | float", opts: SolverOptions = SolverOptions()
) -> np.ndarray:
    """Minimizer ``Phi = 1 + f_W h`` of ``||1 + g||_p`` over ``g`` vanishing on ``W``."""
    p = Parameters.coerce(params).p
    if len(W) == 0:
        raise PreconditionError("W must be nonempty")
    _, phi, _, _ = _zero_constrained(np.array([1.0 + 0j]), W, p, opts)
    return as_coefs(phi)


def nested_projection_sequence(
    x,
    chain: Sequence[ZeroSetSpec],
    params: "Parameters | float",
    opts: SolverOptions = SolverOptions(),
) -> list:
    """Metric projections ``P_n x`` onto ``{g : g vanishes on chain[n]}``.

    The chain must be nested: each entry extends (or repeats) the previous one.
    """
    p = Parameters.coerce(params).p
    x = as_coefs(x)
    for a, b in zip(chain, chain[1:]):
        if not a.is_prefix_of(b):
            raise PreconditionError("projection chain is not nested")
    out = []
    cache = {}
    for W in chain:
        key = W.points
        if key not in cache:
            min_deg = max(x.size - 1 - len(W), 0)
            _, resid, _, _ = _zero_constrained(x, W, p, opts, min_degree=min_deg)
            proj = np.zeros(resid.size, dtype=np.complex128)
            proj[: x.size] = x
            proj = proj - resid
            cache[key] = as_coefs(proj)
        out.append(cache[key])
    return out


def projection_objective(f, Q, params: "Parameters | float") -> float:
    """``||f - Q f||_p`` for an explicit multiplier ``Q`` (used as a minimality certificate)."""
    p = Parameters.coerce(params).p
    f = np.asarray(f, dtype=np.complex128)
    J = np.convolve(np.asarray(Q, dtype=np.complex128), f)
    pad = np.zeros(J.size, dtype=np.complex128)
    pad[: f.size] = f
    return p_norm(pad - J, p)
