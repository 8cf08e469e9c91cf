"""Explicit zero-set families built as products of sparse factors.

* ``geometric``: products of one-zero inner factors ``B_{w_k, r_k}(z)``, or
  ``B_{w_k, r_k}(z**k)`` when rotated.
* ``slow``: factors ``1 - 2**-(k-1) sum_i (z/r_k)**(N_k 2**i)`` with
  ``N_k = 2**(2**(k-1) - 1)``; the moduli approach 1 slower than any
  geometric sequence.
* ``nonblaschke`` (p > 2): factors ``1 - (1/j) sum_{n<=j} (z/r_j)**(n j!)``,
  whose targeted roots violate the Blaschke condition.

The slow and non-Blaschke products have distinct exponents for every choice
of terms, so their exact p-norm is the product of the factor norms.  The
expansion is still carried out and any collision raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gammaln, zeta

from .core import Parameters
from .errors import ExponentOverflowError, PreconditionError
from .inner import b_factor_norm, linear_inner_coefs
from .sparse import SparsePoly, eval_at_root_of_unity_circle, sparse_multiply, sparse_p_norm_power
from .zerosets import RSequence, young_product_bound
from .core import ZeroSetSpec

SLOW_K_MAX = 6
NONBLASCHKE_K_MAX = 8
MATERIALIZE_CAP = 10**6


@dataclass(frozen=True)
class RootSummary:
    """``count`` roots ``exp(log_modulus) e^{2 pi i l / count}``, ``l = 0..count-1``."""

    level: int
    log_modulus: float
    count: int

    @property
    def modulus(self) -> float:
        return math.exp(self.log_modulus)

    @property
    def gap(self) -> float:
        """``1 - modulus`` without cancellation."""
        return -math.expm1(self.log_modulus)

    @property
    def spacing(self) -> float:
        return 2.0 * math.pi / self.count

    def root(self, index: int) -> complex:
        return self.modulus * complex(math.cos(self.spacing * index), math.sin(self.spacing * index))

    def materialize(self) -> np.ndarray:
        if self.count > MATERIALIZE_CAP:
            raise PreconditionError(f"{self.count} roots exceed the materialization cap {MATERIALIZE_CAP}")
        return self.modulus * np.exp(2j * np.pi * np.arange(self.count) / self.count)

    def to_row(self) -> tuple:
        return (self.level, self.modulus, self.count, self.spacing)


@dataclass(frozen=True)
class FamilyOutput:
    """A built family.

    ``bound_product`` and the entries of ``prefix_bounds`` bound the p-th
    power of the norm, ``||F||_p**p``.
    """

    family: str
    p: float
    factors: tuple
    product: SparsePoly
    exact_norm: float
    exact_norm_power: float
    bound_product: float
    targeted_roots: tuple
    log_r_values: tuple
    blaschke_partials: tuple
    prefix_norm_powers: tuple
    prefix_bounds: tuple
    term_counts: tuple

    @property
    def r_values(self) -> tuple:
        return tuple(math.exp(v) for v in self.log_r_values)

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "p": self.p,
            "r_values": list(self.r_values),
            "one_minus_r": [-math.expm1(v) for v in self.log_r_values],
            "norms": [v ** (1.0 / self.p) for v in self.prefix_norm_powers],
            "norm_powers": list(self.prefix_norm_powers),
            "bounds": list(self.prefix_bounds),
            "blaschke_partials": list(self.blaschke_partials),
            "term_counts": list(self.term_counts),
            "exact_norm": self.exact_norm,
            "bound_product": self.bound_product,
            "degree": self.product.degree,
        }

    def root_rows(self) -> list:
        return [r.to_row() for r in self.targeted_roots]


def _expand(factors, p, distinct):
    product = SparsePoly.one()
    powers, counts = [], []
    for f in factors:
        product = sparse_multiply(product, f, distinct=distinct)
        powers.append(sparse_p_norm_power(product, p))
        counts.append(len(product))
    return product, powers, counts


def _output(family, p, factors, product, powers, counts, bounds, roots, log_r, partials):
    return FamilyOutput(
        family=family,
        p=p,
        factors=tuple(factors),
        product=product,
        exact_norm=powers[-1] ** (1.0 / p),
        exact_norm_power=powers[-1],
        bound_product=bounds[-1],
        targeted_roots=tuple(roots),
        log_r_values=tuple(log_r),
        blaschke_partials=tuple(partials),
        prefix_norm_powers=tuple(powers),
        prefix_bounds=tuple(bounds),
        term_counts=tuple(counts),
    )


def _partials(roots) -> list:
    out, acc = [], []
    for r in roots:
        acc.append(r.count * r.gap)
        out.append(math.fsum(acc))
    return out


def evaluate_at_targeted_root(fam: FamilyOutput, level: int, index: int) -> complex:
    """``F(root)`` with the phase of ``root**e`` reduced exactly in integers."""
    r = fam.targeted_roots[level - 1]
    return eval_at_root_of_unity_circle(fam.product, r.log_modulus, index, r.count)


# Geometric family ----------------------------------------------------------------


def _factor_truncation(w: float, r: float, tol: float = 1e-17, cap: int = 100_000) -> int:
    rc = r / (r - 1.0)
    rate = (rc - 1.0) * math.log(abs(w))
    return int(min(cap, max(1, math.ceil(math.log(tol) / rate) + 1)))


def geometric_family(
    w_moduli,
    r: RSequence,
    params: "Parameters | float",
    n: Optional[int] = None,
    *,
    rotate: bool = False,
) -> FamilyOutput:
    """Product of ``B_{w_k, r_k}(z)`` (or ``B_{w_k, r_k}(z**k)`` with ``rotate``), ``k = 1..n``.

    Each factor is the r_k-inner function of ``1 - z/w_k`` truncated where its
    coefficients fall below 1e-17.  The bound is the Young-inequality chain,
    raised to the p-th power.
    """
    p = Parameters.coerce(params).p
    w = [float(v) for v in w_moduli]
    n = len(w) if n is None else n
    if not 1 <= n <= min(len(w), len(r.r)):
        raise PreconditionError("n must not exceed the number of moduli and exponents")
    if any(not 0.0 < v < 1.0 for v in w):
        raise PreconditionError("moduli must lie in (0, 1)")
    factors, roots = [], []
    for k in range(1, n + 1):
        wk, rk = w[k - 1], r.r[k - 1]
        c = linear_inner_coefs(wk, rk, _factor_truncation(wk, rk))
        step = k if rotate else 1
        factors.append(SparsePoly(np.arange(c.size, dtype=np.uint64) * np.uint64(step), c))
        if rotate:
            roots.append(RootSummary(k, math.log(wk) / k, k))
        else:
            roots.append(RootSummary(k, math.log(wk), 1))
    product, powers, counts = _expand(factors, p, distinct=False)
    W = ZeroSetSpec(tuple(w[:n]))
    bounds = [young_product_bound(W, r, p, m) ** p for m in range(1, n + 1)]
    log_r = [rt.log_modulus for rt in roots]
    return _output("geometric", p, factors, product, powers, counts, bounds, roots, log_r, _partials(roots))


# Slow family ---------------------------------------------------------------------


def slow_N(k: int) -> int:
    return 2 ** (2 ** (k - 1) - 1)


def slow_log_r(k: int, a: float, p: float) -> float:
    """``log r_k`` with ``r_k**(N_k**2 p) = k (log k)**a / 2**((k-1)(p-1))``, for ``k >= 2``.

    Stored as a logarithm: already ``r_5`` and ``r_6`` round to 1.0.
    """
    if k < 2:
        raise PreconditionError("the modulus formula starts at k = 2")
    num = math.log(k) + a * math.log(math.log(k)) - (k - 1) * (p - 1.0) * math.log(2.0)
    return num / (float(2 ** (2**k - 2)) * p)


def slow_factor(k: int, log_r: float) -> SparsePoly:
    N = slow_N(k)
    m = 2 ** (k - 1)
    exps = [N * 2**i for i in range(m)]
    coefs = [-(1.0 / m) * math.exp(-float(e) * log_r) for e in exps]
    return SparsePoly([0] + exps, [1.0] + coefs)


def slow_family(
    k_max: int, a: float, params: "Parameters | float", r1_override: float = 0.5
) -> FamilyOutput:
    p = Parameters.coerce(params).p
    if k_max > SLOW_K_MAX:
        raise ExponentOverflowError(
            f"k_max = {k_max} needs exponents up to 2**{2 ** k_max - 2}, beyond the 64-bit range (cap {SLOW_K_MAX})"
        )
    if k_max < 1:
        raise PreconditionError("k_max must be at least 1")
    if not a > 1.0:
        raise PreconditionError("a must exceed 1")
    if not 0.0 < r1_override < 1.0:
        raise PreconditionError("r1_override must lie in (0, 1)")
    log_r = [math.log(r1_override)] + [slow_log_r(k, a, p) for k in range(2, k_max + 1)]
    factors = [slow_factor(k, lr) for k, lr in zip(range(1, k_max + 1), log_r)]
    product, powers, counts = _expand(factors, p, distinct=True)
    terms = [1.0 + r1_override**-p] + [1.0 + 1.0 / (k * math.log(k) ** a) for k in range(2, k_max + 1)]
    bounds = list(np.cumprod(terms))
    roots = [RootSummary(k, lr, slow_N(k)) for k, lr in zip(range(1, k_max + 1), log_r)]
    return _output("slow", p, factors, product, powers, counts, bounds, roots, log_r, _partials(roots))


def slow_term_count(k_max: int) -> int:
    return math.prod(1 + 2 ** (j - 1) for j in range(1, k_max + 1))


@dataclass(frozen=True)
class RhoBracket:
    """Lower and upper estimates for the modulus of the n-th targeted root, as logarithms."""

    log_lower: float
    log_upper: float

    @property
    def lower(self) -> float:
        return math.exp(self.log_lower)

    @property
    def upper(self) -> float:
        return math.exp(self.log_upper)

    @property
    def ordered(self) -> bool:
        return self.log_lower <= self.log_upper

    def contains(self, log_modulus: float) -> bool:
        return self.log_lower <= log_modulus <= self.log_upper


def rho_bounds(n: int, a: float, params: "Parameters | float") -> RhoBracket:
    """The two closed-form estimates of ``rho_n`` in terms of ``L = log2(1 + log2 n)``.

    Evaluated as written; no ordering is enforced, see :attr:`RhoBracket.ordered`.
    """
    p = Parameters.coerce(params).p
    if n < 2:
        raise PreconditionError("n must be at least 2")
    l2n = math.log2(n)
    L = math.log2(1.0 + l2n)
    log_base_lo = (1.0 + a) * math.log(L) - (p - 1.0) * math.log(2.0 * (1.0 + l2n))
    log_base_hi = (1.0 + a) * math.log(2.0 + L) - (p - 1.0) * math.log(0.5 * (1.0 + l2n))
    log_lower = log_base_lo * math.exp(p * math.log(2.0 / n))
    log_upper = log_base_hi * math.exp(-p * math.log(4.0 * float(n) ** 4))
    return RhoBracket(log_lower, log_upper)


def slow_root_index_range(k: int) -> tuple:
    """``(first, last)`` enumeration indices of the level-k targeted roots."""
    before = sum(slow_N(j) for j in range(1, k))
    return before + 1, before + slow_N(k)


# Non-Blaschke family ------------------------------------------------------------


def nonblaschke_log_r(j: int, alpha: float, p: float) -> float:
    """``log r_j`` for ``r_j = j**(-(p-2-alpha) / (j p j!))``."""
    return -(p - 2.0 - alpha) * math.log(j) / (j * p * math.factorial(j))


def nonblaschke_factor(j: int, log_r: float) -> SparsePoly:
    f = math.factorial(j)
    exps = [n * f for n in range(1, j + 1)]
    coefs = [-(1.0 / j) * math.exp(-float(e) * log_r) for e in exps]
    return SparsePoly([0] + exps, [1.0] + coefs)


def _check_nonblaschke(p, alpha):
    if not p > 2.0:
        raise PreconditionError("the non-Blaschke family needs p > 2")
    if not 0.0 < alpha < p - 2.0:
        raise PreconditionError("alpha must lie in (0, p - 2)")


def nonblaschke_family(params: "Parameters | float", alpha: float, k_max: int) -> FamilyOutput:
    p = Parameters.coerce(params).p
    _check_nonblaschke(p, alpha)
    if k_max > NONBLASCHKE_K_MAX:
        raise PreconditionError(
            f"k_max = {k_max} would expand to {math.factorial(k_max + 1)} terms (cap {NONBLASCHKE_K_MAX})"
        )
    if k_max < 1:
        raise PreconditionError("k_max must be at least 1")
    log_r = [nonblaschke_log_r(j, alpha, p) for j in range(1, k_max + 1)]
    factors = [nonblaschke_factor(j, lr) for j, lr in zip(range(1, k_max + 1), log_r)]
    product, powers, counts = _expand(factors, p, distinct=True)
    bounds = list(np.cumprod([1.0 + j ** (-1.0 - alpha) for j in range(1, k_max + 1)]))
    roots = [RootSummary(j, lr, math.factorial(j)) for j, lr in zip(range(1, k_max + 1), log_r)]
    return _output("nonblaschke", p, factors, product, powers, counts, bounds, roots, log_r, _partials(roots))


def factorial_exponent_identity(k: int) -> bool:
    """``1 + sum_{j<=k} j j! = (k+1)!`` in exact integer arithmetic."""
    return 1 + sum(j * math.factorial(j) for j in range(1, k + 1)) == math.factorial(k + 1)


def blaschke_lower_bound(k: int, params: "Parameters | float", alpha: float) -> float:
    """``sum_{j<=k} (log j)(p-2-alpha)/(jp) - sum_{j<=k} (log j)**2 (p-2-alpha)**2 / (2 (jp)**2 j!)``.

    Rests on ``1 - exp(-x) >= x - x**2/2``, which holds for every ``x >= 0``.
    """
    p = Parameters.coerce(params).p
    _check_nonblaschke(p, alpha)
    j = np.arange(1, k + 1, dtype=np.float64)
    c = p - 2.0 - alpha
    lj = np.log(j)
    first = lj * c / (j * p)
    second = lj**2 * c**2 / (2.0 * (j * p) ** 2) * np.exp(-gammaln(j + 1.0))
    return math.fsum(first) - math.fsum(second)


def blaschke_lower_bound_premise(k: int, params: "Parameters | float", alpha: float) -> float:
    """Largest ``x_j = -log r_j`` for ``j <= k``; the inequality only needs ``x_j >= 0``."""
    p = Parameters.coerce(params).p
    return max(-nonblaschke_log_r(j, alpha, p) for j in range(1, k + 1))


def nonblaschke_bound_limit(alpha: float) -> float:
    """``prod_{j>=1} (1 + j**(-1-alpha))`` to machine precision.

    ``log prod = log 2 + sum_m (-1)**(m+1)/m (zeta(s m) - 1)`` with ``s = 1 + alpha``.
    """
    s = 1.0 + alpha
    total = [math.log(2.0)]
    m = 1
    while True:
        term = zeta(s * m, 2.0) / m
        if term < 1e-18:
            break
        total.append(term if m % 2 else -term)
        m += 1
    return math.exp(math.fsum(total))
