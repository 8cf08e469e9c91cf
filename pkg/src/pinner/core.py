"""Scalar and coefficient-sequence algebra for the spaces of analytic
functions with p-summable Taylor coefficients.

A coefficient sequence is a one-dimensional ``complex128`` numpy array whose
entry ``k`` is the coefficient of ``z**k``.  Every function here returns a
fresh read-only array, so results can be shared between threads freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import PreconditionError


@dataclass(frozen=True)
class Parameters:
    """The exponent ``p`` together with its Hölder conjugate."""

    p: float
    p_conj: float = field(init=False)

    def __post_init__(self):
        p = float(self.p)
        if not (math.isfinite(p) and p > 1.0):
            raise PreconditionError(f"p must be a finite real > 1, got {self.p!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p_conj", p / (p - 1.0))

    @classmethod
    def coerce(cls, value: "Parameters | float") -> "Parameters":
        return value if isinstance(value, cls) else cls(float(value))


def conjugate_exponent(p: float) -> float:
    return p / (p - 1.0)


def as_coefs(a) -> np.ndarray:
    """Return ``a`` as a read-only complex128 coefficient array.

    Accepts numbers, sequences of numbers, and sequences of ``[re, im]`` pairs.
    """
    arr = np.asarray(a)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.array(arr, dtype=np.complex128, ndmin=1)
    if arr.ndim != 1:
        raise PreconditionError("a coefficient sequence must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise PreconditionError("coefficient sequences must have finite entries")
    arr.flags.writeable = False
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def signed_power(z: complex, s: float) -> complex:
    """``z**<s>``: for ``z = r e^{i theta}`` this is ``r**s e^{-i theta}``.

    Zero maps to zero for every ``s > 0``.
    """
    if s <= 0:
        raise PreconditionError("signed_power needs s > 0")
    z = complex(z)
    r = abs(z)
    if r == 0.0:
        return 0j
    return (r ** (s - 1.0)) * z.conjugate()


def seq_signed_power(a, s: float) -> np.ndarray:
    """Entrywise :func:`signed_power`."""
    if s <= 0:
        raise PreconditionError("seq_signed_power needs s > 0")
    a = np.asarray(a, dtype=np.complex128)
    r = np.abs(a)
    out = np.zeros_like(a)
    nz = r > 0
    out[nz] = r[nz] ** (s - 1.0) * np.conj(a[nz])
    return _frozen(out)


def fsum_complex(values) -> complex:
    """Correctly rounded sum of complex values (real and imaginary parts separately)."""
    v = np.asarray(values, dtype=np.complex128).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def p_norm(a, params: "Parameters | float") -> float:
    """``(sum |a_k|**p)**(1/p)`` with a correctly rounded inner sum."""
    p = Parameters.coerce(params).p
    mags = np.abs(np.asarray(a, dtype=np.complex128))
    if mags.size == 0:
        return 0.0
    # Rescale by the largest entry so huge and tiny coefficients do not over/underflow.
    scale = float(mags.max())
    if scale == 0.0:
        return 0.0
    return scale * math.fsum((mags / scale) ** p) ** (1.0 / p)


def p_norm_power(a, params: "Parameters | float") -> float:
    """``sum |a_k|**p`` (the p-th power of :func:`p_norm`)."""
    p = Parameters.coerce(params).p
    mags = np.abs(np.asarray(a, dtype=np.complex128))
    return math.fsum(mags**p)


def _pad_pair(a, b):
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    n = max(a.size, b.size)
    if a.size < n:
        a = np.concatenate([a, np.zeros(n - a.size, dtype=np.complex128)])
    if b.size < n:
        b = np.concatenate([b, np.zeros(n - b.size, dtype=np.complex128)])
    return a, b


def bilinear_pairing(a, b) -> complex:
    """``sum a_k b_k`` with no conjugation; the shorter sequence is zero padded."""
    a, b = _pad_pair(a, b)
    return fsum_complex(a * b)


def bj_residual(a, b, params: "Parameters | float") -> complex:
    """Birkhoff-James pairing ``(a**<p-1>, b)``; ``a`` is p-orthogonal to ``b`` iff it vanishes."""
    p = Parameters.coerce(params).p
    return bilinear_pairing(seq_signed_power(a, p - 1.0), b)


def shift(a, n: int = 1) -> np.ndarray:
    """Multiply by ``z**n``."""
    a = np.asarray(a, dtype=np.complex128)
    return _frozen(np.concatenate([np.zeros(n, dtype=np.complex128), a]))


def difference_quotient(f, w: complex) -> np.ndarray:
    """Coefficients of ``(f(z) - f(w)) / (z - w)``.

    ``g_n = sum_k a_{k+n+1} w**k``, obtained by synthetic division.
    """
    a = np.asarray(f, dtype=np.complex128)
    if a.size == 0:
        raise PreconditionError("difference_quotient needs a nonempty sequence")
    if a.size == 1:
        return _frozen(np.zeros(1, dtype=np.complex128))
    w = complex(w)
    g = np.empty(a.size - 1, dtype=np.complex128)
    acc = 0j
    for n in range(a.size - 2, -1, -1):
        acc = a[n + 1] + w * acc
        g[n] = acc
    return _frozen(g)


def derivative_coefs(a, order: int) -> np.ndarray:
    """Coefficients of the ``order``-th derivative."""
    a = np.asarray(a, dtype=np.complex128)
    if order == 0:
        return a
    if a.size <= order:
        return np.zeros(1, dtype=np.complex128)
    k = np.arange(order, a.size, dtype=np.float64)
    fall = np.ones_like(k)
    for i in range(order):
        fall *= k - i
    return a[order:] * fall


def evaluate(f, z: complex, deriv_order: int = 0) -> complex:
    """Value at ``z`` of the ``deriv_order``-th derivative of the truncated series (Horner)."""
    if deriv_order < 0:
        raise PreconditionError("deriv_order must be nonnegative")
    c = derivative_coefs(f, deriv_order)
    return complex(np.polyval(c[::-1], complex(z)))


def taylor_at(f, z: complex, max_order: int) -> np.ndarray:
    """Normalized derivatives ``f^{(m)}(z) / m!`` for ``m = 0..max_order``.

    Uses binomial weights and correctly rounded sums, which is more accurate
    than Horner on long, slowly decaying series.
    """
    a = np.asarray(f, dtype=np.complex128)
    out = np.zeros(max_order + 1, dtype=np.complex128)
    z = complex(z)
    k = np.arange(a.size, dtype=np.float64)
    for m in range(min(max_order, a.size - 1) + 1):
        if z == 0:
            out[m] = a[m]
            continue
        km = k[m:]
        binom = np.exp(gammaln(km + 1) - gammaln(km - m + 1) - gammaln(m + 1))
        out[m] = fsum_complex(a[m:] * binom * np.exp((km - m) * np.log(z)))
    return out


def polynomial_from_roots(roots: Iterable[complex]) -> np.ndarray:
    """Coefficients of ``prod (1 - z / w)`` over the given roots (repeat for multiplicity)."""
    c = np.array([1.0 + 0j])
    for w in roots:
        w = complex(w)
        if w == 0:
            raise PreconditionError("roots must be nonzero for the f(0) = 1 normalization")
        c = np.convolve(c, np.array([1.0, -1.0 / w], dtype=np.complex128))
    return _frozen(c)


def multiply(a, b) -> np.ndarray:
    return _frozen(np.convolve(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128)))


def trim(a, tol: float = 0.0) -> np.ndarray:
    """Drop trailing coefficients with modulus ``<= tol`` (keeps at least one entry)."""
    a = np.asarray(a, dtype=np.complex128)
    nz = np.nonzero(np.abs(a) > tol)[0]
    end = int(nz[-1]) + 1 if nz.size else 1
    return _frozen(a[:end].copy())


def random_coefs(rng: np.random.Generator, size: int, scale: float = 1.0) -> np.ndarray:
    return _frozen(scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size)))


def as_pairs(a: Sequence[complex]) -> list:
    """``[[re, im], ...]`` form used by the JSON interchange format."""
    return [[float(c.real), float(c.imag)] for c in np.asarray(a, dtype=np.complex128)]


COINCIDENT_ROOT_TOL = 1e-8


@dataclass(frozen=True)
class ZeroSetSpec:
    """Prescribed zeros in the punctured disk, in certificate (prefix) order.

    ``points`` lists every zero repeated by multiplicity, in the order given.
    :attr:`distinct` aggregates them into ``(point, multiplicity)`` pairs,
    merging points closer than :data:`COINCIDENT_ROOT_TOL`.
    """

    points: tuple

    def __post_init__(self):
        pts = tuple(complex(w) for w in self.points)
        for w in pts:
            if not (math.isfinite(w.real) and math.isfinite(w.imag)):
                raise PreconditionError("zeros must be finite")
            if w == 0:
                raise PreconditionError("zeros must be nonzero")
            if abs(w) >= 1.0:
                raise PreconditionError(f"zero {w!r} is not inside the unit disk")
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "ZeroSetSpec":
        pts = []
        for w, mult in pairs:
            mult = int(mult)
            if mult < 1:
                raise PreconditionError("multiplicities must be positive integers")
            pts.extend([complex(w)] * mult)
        return cls(tuple(pts))

    def __len__(self):
        return len(self.points)

    def prefix(self, n: int) -> "ZeroSetSpec":
        if not 0 <= n <= len(self.points):
            raise PreconditionError(f"prefix length {n} outside 0..{len(self.points)}")
        return ZeroSetSpec(self.points[:n])

    @property
    def distinct(self) -> tuple:
        groups: list = []
        for w in self.points:
            for g in groups:
                if abs(g[0] - w) < COINCIDENT_ROOT_TOL:
                    g[1] += 1
                    break
            else:
                groups.append([w, 1])
        return tuple((w, m) for w, m in groups)

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(np.array(self.points, dtype=np.complex128))

    def polynomial(self) -> np.ndarray:
        """``prod (1 - z/w)`` over the distinct zeros with their multiplicities."""
        roots = [w for w, m in self.distinct for _ in range(m)]
        return polynomial_from_roots(roots)

    def is_prefix_of(self, other: "ZeroSetSpec") -> bool:
        return len(self.points) <= len(other.points) and all(
            abs(a - b) < COINCIDENT_ROOT_TOL for a, b in zip(self.points, other.points)
        )
