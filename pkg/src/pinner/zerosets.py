"""Zero-set certificates and classical diagnostics.

A sequence ``W`` is a zero set exactly when the norms of the p-inner
functions of its prefixes stay bounded.  Only finitely many prefixes can be
computed, so :func:`j_norm_sequence` reports evidence, never a verdict on
the infinite sequence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import Parameters, ZeroSetSpec
from .errors import PInnerError, PreconditionError
from .inner import (
    b_factor_norm,
    inner_by_projection,
    inner_norm_from_phi,
    phi_from_inner,
    solve_inner_newton,
)
from .projection import SolverOptions

MONOTONE_SLACK = 1e-10


@dataclass(frozen=True)
class CertificateSequence:
    prefix_norms: tuple
    phi_norms: tuple
    verdict: str
    failures: tuple = ()

    @property
    def monotone(self) -> bool:
        n = self.prefix_norms
        return all(b >= a - MONOTONE_SLACK for a, b in zip(n, n[1:]))

    def to_json(self) -> dict:
        return {
            "prefix_norms": list(self.prefix_norms),
            "phi_norms": list(self.phi_norms),
            "verdict": self.verdict,
            "monotone": self.monotone,
            "failures": [list(f) for f in self.failures],
        }


def growth_verdict(norms) -> str:
    """``bounded_evidence``, ``growth_evidence`` or ``inconclusive``.

    Bounded: the last five norms agree to 1e-6 relative.  Growth: over the
    last half, ``log ||J_n||`` rises faster than linearly in ``log n``.
    """
    norms = [float(v) for v in norms]
    if len(norms) >= 5:
        tail = norms[-5:]
        if (max(tail) - min(tail)) < 1e-6 * max(tail):
            return "bounded_evidence"
    n = len(norms)
    if n >= 6:
        idx = np.arange(n // 2, n) + 1
        x = np.log(idx)
        y = np.log(np.asarray(norms[n // 2 :]))
        mid = len(idx) // 2
        s1 = (y[mid] - y[0]) / (x[mid] - x[0])
        s2 = (y[-1] - y[mid]) / (x[-1] - x[mid])
        if s1 > 0 and s2 > s1:
            return "growth_evidence"
    return "inconclusive"


def _prefix_inner(W, p, opts, method):
    if method == "newton":
        try:
            return solve_inner_newton(W, p, opts)
        except PInnerError:
            return inner_by_projection(W, p, opts)
    return inner_by_projection(W, p, opts)


def j_norm_sequence(
    W: ZeroSetSpec,
    params: "Parameters | float",
    n_max: int,
    opts: SolverOptions = SolverOptions(),
    *,
    method: str = "newton",
    threads: int = 1,
) -> CertificateSequence:
    """``||J_n||_p`` and ``||Phi_n||_p`` for the prefixes ``W[:n]``, ``n = 1..n_max``.

    A failed prefix is recorded in ``failures`` and ends the sequence.
    """
    p = Parameters.coerce(params).p
    if not 1 <= n_max <= len(W):
        raise PreconditionError(f"n_max must lie in 1..{len(W)}")

    def one(n):
        try:
            res = _prefix_inner(W.prefix(n), p, opts, method)
            return res.norm, phi_from_inner(res, p).phi_norm, None
        except PInnerError as exc:
            return None, None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(1, n_max + 1)))
    else:
        results = [one(n) for n in range(1, n_max + 1)]
    norms, phis, failures = [], [], []
    for n, (nv, ph, err) in enumerate(results, start=1):
        if err is not None:
            failures.append((n, err))
            break
        norms.append(nv)
        phis.append(ph)
    return CertificateSequence(tuple(norms), tuple(phis), growth_verdict(norms), tuple(failures))


def certificate_consistency(cert: CertificateSequence, params: "Parameters | float") -> float:
    """Largest ``|inner_norm_from_phi(phi_n) - ||J_n||**p|`` over the sequence."""
    p = Parameters.coerce(params).p
    return max(
        (abs(inner_norm_from_phi(ph, p) - nv**p) for nv, ph in zip(cert.prefix_norms, cert.phi_norms)),
        default=0.0,
    )


# Classical diagnostics ----------------------------------------------------------


def _gaps(W) -> np.ndarray:
    """``1 - |w_k|``; accepts a zero set or an array of precomputed gaps."""
    if isinstance(W, ZeroSetSpec):
        return 1.0 - W.moduli
    return np.asarray(W, dtype=np.float64)


def blaschke_sum(W, n: Optional[int] = None) -> float:
    """``sum_{k <= n} (1 - |w_k|)`` over points listed with multiplicity."""
    g = _gaps(W)
    n = g.size if n is None else n
    if n > g.size:
        raise PreconditionError(f"n = {n} exceeds the {g.size} available points")
    return math.fsum(g[:n])


def vinogradov_sums(W, eps: float, n: Optional[int] = None) -> float:
    """``sum_{k <= n} (1 - |w_k|)**(1 + eps)``."""
    g = _gaps(W)
    n = g.size if n is None else n
    if n > g.size:
        raise PreconditionError(f"n = {n} exceeds the {g.size} available points")
    return math.fsum(g[:n] ** (1.0 + eps))


def newman_ratios(W) -> np.ndarray:
    g = _gaps(W)
    if g.size < 2:
        raise PreconditionError("need at least two points")
    if np.any(g <= 0):
        raise PreconditionError("gaps 1 - |w| must be positive; pass them directly if the moduli round to 1")
    return g[1:] / g[:-1]


def newman_rate_check(W) -> float:
    """``sup_k (1 - |w_{k+1}|) / (1 - |w_k|)``; below 1 means an exponential approach to the circle."""
    return float(np.max(newman_ratios(W)))


@dataclass(frozen=True)
class NewmanReport:
    sup_ratio: float
    last_ratio: float
    exponential: bool

    def to_json(self) -> dict:
        return {"sup_ratio": self.sup_ratio, "last_ratio": self.last_ratio, "exponential": self.exponential}


def newman_report(W, margin: float = 1e-3) -> NewmanReport:
    """``exponential`` is False when the ratios come within ``margin`` of 1."""
    r = newman_ratios(W)
    sup = float(np.max(r))
    return NewmanReport(sup, float(r[-1]), sup < 1.0 - margin)


# Young-inequality chain --------------------------------------------------------


@dataclass(frozen=True)
class RSequence:
    """Exponents ``r_k > 1`` with ``sum (1 - 1/r_k) = budget = 1/p' - epsilon``."""

    r: tuple
    budget: float
    epsilon: float

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        if not r or any(not v > 1.0 for v in r):
            raise PreconditionError("every r_k must exceed 1")
        if not self.epsilon > 0:
            raise PreconditionError("epsilon must be positive")
        object.__setattr__(self, "r", r)

    @property
    def spent(self) -> float:
        return math.fsum(1.0 - 1.0 / v for v in self.r)

    @classmethod
    def default(cls, params: "Parameters | float", n: int, epsilon: Optional[float] = None) -> "RSequence":
        """``1 - 1/r_k = budget 2**-k / sum_{j <= n} 2**-j``, which spends the budget exactly."""
        P = Parameters.coerce(params)
        if epsilon is None:
            epsilon = 0.1 / P.p_conj
        budget = 1.0 / P.p_conj - epsilon
        if not budget > 0:
            raise PreconditionError("epsilon must be below 1/p'")
        weights = [2.0**-k for k in range(1, n + 1)]
        total = math.fsum(weights)
        r = tuple(1.0 / (1.0 - budget * wk / total) for wk in weights)
        return cls(r, budget, epsilon)


@dataclass(frozen=True)
class PkSequence:
    p_values: tuple
    p_star: float


def pk_sequence(params: "Parameters | float", r: RSequence) -> PkSequence:
    """``1/p_k = 1/p_{k-1} + 1 - 1/r_k`` from ``p_0 = p``, and ``p* = 1/(1/p + 1/p' - eps)``."""
    P = Parameters.coerce(params)
    if not r.spent < 1.0 / P.p_conj:
        raise PreconditionError("sum (1 - 1/r_k) must stay below 1/p'")
    inv = 1.0 / P.p
    values = []
    for rk in r.r:
        inv = inv + 1.0 - 1.0 / rk
        values.append(1.0 / inv)
    p_star = 1.0 / (1.0 / P.p + 1.0 / P.p_conj - r.epsilon)
    if not p_star > 1.0:
        raise PreconditionError("p* must exceed 1")
    return PkSequence(tuple(values), p_star)


@dataclass(frozen=True)
class YoungBound:
    bound: float
    factors: tuple
    last_factor: float
    cap_chain_holds: bool

    def to_json(self) -> dict:
        return {
            "bound": self.bound,
            "factors": list(self.factors),
            "last_factor": self.last_factor,
            "cap_chain_holds": self.cap_chain_holds,
        }


def young_bound_report(W: ZeroSetSpec, r: RSequence, params: "Parameters | float", n: int) -> YoungBound:
    """``prod_{k<n} ||B_k||_{r_k} * ||B_n||_{p*}`` with ``B_k`` the r_k-inner factor of ``w_k``.

    The last factor is always evaluated exactly.  ``cap_chain_holds`` reports
    whether ``1 - |w_n|**((r_n'-1) p*) >= (1 - |w_n|**r_n')**p*``, the
    inequality under which that factor is bounded by ``1 + |w_n|**-p*``.
    """
    P = Parameters.coerce(params)
    if not 1 <= n <= min(len(W), len(r.r)):
        raise PreconditionError("n must not exceed the lengths of W and r")
    pk = pk_sequence(P, r)
    pts = W.points
    factors = tuple(b_factor_norm(pts[k], r.r[k], r.r[k]) for k in range(n - 1))
    wn, rn, ps = pts[n - 1], r.r[n - 1], pk.p_star
    last = b_factor_norm(wn, rn, ps)
    a = abs(wn)
    rc = rn / (rn - 1.0)
    cap = (-math.expm1((rc - 1.0) * ps * math.log(a))) >= (-math.expm1(rc * math.log(a))) ** ps
    bound = math.prod(factors) * last
    return YoungBound(bound, factors, last, bool(cap))


def young_product_bound(W: ZeroSetSpec, r: RSequence, params: "Parameters | float", n: int) -> float:
    return young_bound_report(W, r, params, n).bound


@dataclass(frozen=True)
class SufficientReport:
    hypothesis_ok: bool
    spent: float
    allowed: float
    partial_sums: tuple
    tail_cauchy: bool
    statement: str

    def to_json(self) -> dict:
        return {
            "hypothesis_ok": self.hypothesis_ok,
            "spent": self.spent,
            "allowed": self.allowed,
            "partial_sums": list(self.partial_sums),
            "tail_cauchy": self.tail_cauchy,
            "statement": self.statement,
        }


def blaslike_sufficient(
    W: ZeroSetSpec, r: RSequence, params: "Parameters | float", n: int, cauchy_tol: float = 1e-4
) -> SufficientReport:
    """Checks ``sum (1 - 1/r_k) < 1/p'`` and the partial sums of ``(1 - |w_k|**r_k')**(r_k - 1)``.

    Only the first ``n`` terms are examined; the report never claims anything
    about the tail beyond them.
    """
    P = Parameters.coerce(params)
    if not 1 <= n <= min(len(W), len(r.r)):
        raise PreconditionError("n must not exceed the lengths of W and r")
    spent = math.fsum(1.0 - 1.0 / v for v in r.r[:n])
    allowed = 1.0 / P.p_conj
    terms = []
    for w, rk in zip(W.points[:n], r.r[:n]):
        rc = rk / (rk - 1.0)
        terms.append((-math.expm1(rc * math.log(abs(w)))) ** (rk - 1.0))
    partial = tuple(np.cumsum(terms).tolist())
    ok = spent < allowed
    cauchy = n >= 2 and terms[-1] < cauchy_tol
    if ok and cauchy:
        statement = "hypotheses verified on prefix"
    elif ok:
        statement = "budget verified on prefix; series partial sums not yet Cauchy"
    else:
        statement = "hypothesis failed: sum (1 - 1/r_k) is not below 1/p'"
    return SufficientReport(ok, spent, allowed, partial, cauchy, statement)
