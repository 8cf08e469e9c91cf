"""Sparse polynomials with huge exponents.

The products built for the slow and non-Blaschke families reach degree
``2**62`` while having at most a few hundred thousand terms, so terms are kept
as parallel arrays of unsigned 64-bit exponents and complex coefficients.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from .core import Parameters, fsum_complex, p_norm
from .errors import ExponentCollisionError, ExponentOverflowError, PreconditionError

UINT64_MAX = 2**64 - 1


class SparsePoly:
    """Immutable exponent -> coefficient map.

    Exponents are unique and sorted; no stored coefficient is exactly zero.
    """

    __slots__ = ("_exps", "_coefs")

    def __init__(self, exps=(), coefs=()):
        exps = np.asarray(exps, dtype=np.uint64).ravel()
        coefs = np.asarray(coefs, dtype=np.complex128).ravel()
        if exps.shape != coefs.shape:
            raise PreconditionError("exponent and coefficient arrays differ in length")
        order = np.argsort(exps, kind="stable")
        exps, coefs = exps[order], coefs[order]
        if exps.size > 1 and np.any(exps[1:] == exps[:-1]):
            raise PreconditionError("duplicate exponents; use SparsePoly.collect")
        keep = coefs != 0
        exps, coefs = exps[keep], coefs[keep]
        exps.flags.writeable = False
        coefs.flags.writeable = False
        self._exps = exps
        self._coefs = coefs

    @classmethod
    def collect(cls, exps, coefs) -> "SparsePoly":
        """Build from possibly repeated exponents, summing like terms."""
        exps = np.asarray(exps, dtype=np.uint64).ravel()
        coefs = np.asarray(coefs, dtype=np.complex128).ravel()
        uniq, inverse = np.unique(exps, return_inverse=True)
        re = np.bincount(inverse, weights=coefs.real, minlength=uniq.size)
        im = np.bincount(inverse, weights=coefs.imag, minlength=uniq.size)
        return cls(uniq, re + 1j * im)

    @classmethod
    def from_dict(cls, terms: Mapping[int, complex]) -> "SparsePoly":
        items = sorted((int(e), complex(c)) for e, c in terms.items())
        for e, _ in items:
            if e < 0 or e > UINT64_MAX:
                raise ExponentOverflowError(f"exponent {e} outside the unsigned 64-bit range")
        return cls([e for e, _ in items], [c for _, c in items])

    @classmethod
    def from_dense(cls, coefs) -> "SparsePoly":
        coefs = np.asarray(coefs, dtype=np.complex128)
        return cls(np.arange(coefs.size, dtype=np.uint64), coefs)

    @classmethod
    def one(cls) -> "SparsePoly":
        return cls([0], [1.0])

    @property
    def exponents(self) -> np.ndarray:
        return self._exps

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefs

    def __len__(self):
        return int(self._exps.size)

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return np.array_equal(self._exps, other._exps) and np.array_equal(self._coefs, other._coefs)

    def __repr__(self):
        head = ", ".join(f"{int(e)}: {c!r}" for e, c in zip(self._exps[:4], self._coefs[:4]))
        more = ", ..." if len(self) > 4 else ""
        return f"SparsePoly({{{head}{more}}})"

    def to_dict(self) -> dict:
        return {int(e): complex(c) for e, c in zip(self._exps, self._coefs)}

    @property
    def degree(self) -> int:
        return int(self._exps[-1]) if len(self) else 0

    def to_dense(self, max_degree: int = 10**7) -> np.ndarray:
        if self.degree > max_degree:
            raise PreconditionError(f"degree {self.degree} too large to densify (cap {max_degree})")
        out = np.zeros(self.degree + 1, dtype=np.complex128)
        out[self._exps.astype(np.int64)] = self._coefs
        return out

    def __mul__(self, other):
        if isinstance(other, SparsePoly):
            return sparse_multiply(self, other)
        return NotImplemented


def _check_overflow(a: SparsePoly, b: SparsePoly):
    if len(a) and len(b):
        ea, eb = int(a.exponents[-1]), int(b.exponents[-1])
        if ea + eb > UINT64_MAX:
            raise ExponentOverflowError(
                f"exponent sum {ea} + {eb} = {ea + eb} exceeds the unsigned 64-bit range"
            )


def sparse_multiply(a: SparsePoly, b: SparsePoly, *, distinct: bool = False) -> SparsePoly:
    """Convolution product.

    With ``distinct=True`` every pair of terms must produce a different
    exponent; a collision raises :class:`ExponentCollisionError` instead of
    silently collecting like terms.
    """
    _check_overflow(a, b)
    if not len(a) or not len(b):
        return SparsePoly()
    exps = np.add.outer(a.exponents, b.exponents).ravel()
    coefs = np.multiply.outer(a.coefficients, b.coefficients).ravel()
    if distinct:
        uniq, counts = np.unique(exps, return_counts=True)
        if uniq.size != exps.size:
            clash = int(uniq[np.argmax(counts > 1)])
            raise ExponentCollisionError(
                f"exponent {clash} arises from more than one pair of terms "
                f"({exps.size - uniq.size} collisions)"
            )
        return SparsePoly(exps, coefs)
    return SparsePoly.collect(exps, coefs)


def sparse_product(factors, *, distinct: bool = False) -> SparsePoly:
    out = SparsePoly.one()
    for f in factors:
        out = sparse_multiply(out, f, distinct=distinct)
    return out


def sparse_p_norm_power(a: SparsePoly, params: "Parameters | float") -> float:
    p = Parameters.coerce(params).p
    return math.fsum(np.abs(a.coefficients) ** p)


def sparse_p_norm(a: SparsePoly, params: "Parameters | float") -> float:
    """``(sum |c|**p)**(1/p)`` over stored terms; exact because exponents are unique."""
    return p_norm(a.coefficients, params)


def eval_at_root_of_unity_circle(a: SparsePoly, log_modulus: float, index: int, count: int) -> complex:
    """Evaluate at ``z = exp(log_modulus) * exp(2 pi i index / count)``.

    The phase of ``z**e`` is reduced exactly as ``(e * index) mod count`` in
    integer arithmetic, which keeps the evaluation accurate for exponents
    around ``2**62`` where a floating phase would be meaningless.
    """
    if count <= 0:
        raise PreconditionError("count must be positive")
    exps = [int(e) for e in a.exponents]
    phase_num = np.array([(e * index) % count for e in exps], dtype=np.float64)
    mags = np.exp(np.array(exps, dtype=np.float64) * log_modulus)
    terms = a.coefficients * mags * np.exp(2j * np.pi * phase_num / count)
    return fsum_complex(terms)


def to_json(a: SparsePoly) -> dict:
    return {str(int(e)): [float(c.real), float(c.imag)] for e, c in zip(a.exponents, a.coefficients)}


def from_json(obj: Mapping) -> SparsePoly:
    terms = {}
    for key, val in obj.items():
        e = int(key)
        terms[e] = complex(val[0], val[1])
    return SparsePoly.from_dict(terms)
