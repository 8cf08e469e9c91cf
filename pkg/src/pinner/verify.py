"""Seeded randomized invariant suites used by ``pinner verify`` and the tests."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Parameters,
    ZeroSetSpec,
    bilinear_pairing,
    difference_quotient,
    p_norm,
    seq_signed_power,
    signed_power,
)
from .inner import inner_by_projection, linear_inner_coefs, solve_inner_newton
from .io import coefs_to_json
from .projection import SolverOptions

PYTHAGOREAN_PS = (1.3, 1.7, 2.0, 2.5, 4.0)
GRID_PS = (1.5, 2.0, 3.0, 4.0)
GRID_MODULI = (0.3, 0.6, 0.9)
GRID_ARGS = (0.0, math.pi / 4, math.pi)


@dataclass
class VerificationReport:
    suite: str
    cases_run: int
    max_violation: float
    tolerance: float
    offending_case: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def to_json(self) -> dict:
        out = {
            "suite": self.suite,
            "cases_run": self.cases_run,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.offending_case is not None:
            out["offending_case"] = self.offending_case
        return out


class _Worst:
    def __init__(self):
        self.value = 0.0
        self.case = None

    def update(self, v, case):
        if v > self.value or self.case is None:
            self.value, self.case = float(v), case


def _rand_vec(rng, n):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def orthogonal_pair(rng: np.random.Generator, p: float, n: int):
    """Random ``x`` and a random ``y`` with ``(x**<p-1>, y) = 0``."""
    x = _rand_vec(rng, n)
    x = x / p_norm(x, p)
    y0 = _rand_vec(rng, n) * rng.uniform(0.1, 2.0)
    xs = seq_signed_power(x, p - 1.0)
    # (x**<p-1>, x) = ||x||_p**p, so subtracting a multiple of x kills the pairing.
    y = y0 - bilinear_pairing(xs, y0) / bilinear_pairing(xs, x) * x
    return x, y


def pythagorean_violations(x, y, p: float) -> tuple:
    """The four inequalities as ``lhs - rhs`` (a positive value is a violation)."""
    nx, ny, nxy = p_norm(x, p), p_norm(y, p), p_norm(x + y, p)
    c = 1.0 / (2.0 ** (p - 1.0) - 1.0)
    a = nxy**p - (nx**p + c * ny**p)
    b = (nx**2 + (p - 1.0) * ny**2) - nxy**2
    if p <= 2.0:
        return a, b
    return -a, -b


def pythagorean_suite(seed: int, cases: int = 1000, ps=PYTHAGOREAN_PS, tol: float = 1e-10) -> VerificationReport:
    rng = np.random.default_rng(seed)
    worst = _Worst()
    run = 0
    for p in ps:
        for _ in range(cases):
            n = int(rng.integers(2, 24))
            x, y = orthogonal_pair(rng, p, n)
            v = pythagorean_violations(x, y, p)
            # At p = 2 both sides must agree, so any deviation counts.
            viol = max(abs(t) for t in v) if p == 2.0 else max(0.0, *v)
            worst.update(viol, {"p": p, "x": coefs_to_json(x), "y": coefs_to_json(y)})
            run += 1
    return VerificationReport("pythagorean", run, worst.value, tol, None if worst.value <= tol else worst.case)


def involution_suite(seed: int, cases: int = 1000, tol: float = 1e-12) -> VerificationReport:
    """Multiplicativity, ``|z|**p = z**<p-1> z``, powers, and ``(z**<p-1>)**<p'-1> = z``."""
    rng = np.random.default_rng(seed)
    worst = _Worst()
    for _ in range(cases):
        p = float(rng.uniform(1.1, 6.0))
        pc = p / (p - 1.0)
        z, w = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        s = float(rng.uniform(0.1, 4.0))
        n = int(rng.integers(0, 6))
        checks = [
            (signed_power(z * w, p - 1.0), signed_power(z, p - 1.0) * signed_power(w, p - 1.0)),
            (abs(z) ** p, signed_power(z, p - 1.0) * z),
            (signed_power(z, s) ** n, signed_power(z**n, s) if n else 1.0),
            (signed_power(signed_power(z, p - 1.0), pc - 1.0), z),
        ]
        for lhs, rhs in checks:
            rel = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)
            worst.update(rel, {"p": p, "z": [z.real, z.imag], "w": [w.real, w.imag], "s": s, "n": n})
    return VerificationReport("involution", cases, worst.value, tol, None if worst.value <= tol else worst.case)


def diffquot_suite(seed: int, cases: int = 500, ps=PYTHAGOREAN_PS, tol: float = 0.0) -> VerificationReport:
    """``||Q_w f||_p <= ||f||_p / (1 - |w|)``; the reported violation is the relative excess."""
    rng = np.random.default_rng(seed)
    worst = _Worst()
    for _ in range(cases):
        p = float(rng.choice(ps))
        n = int(rng.integers(2, 40))
        f = _rand_vec(rng, n) * rng.uniform(0.01, 10.0)
        w = complex(rng.uniform(0.0, 0.98) * cmath.exp(2j * math.pi * rng.uniform()))
        lhs = p_norm(difference_quotient(f, w), p)
        rhs = p_norm(f, p) / (1.0 - abs(w))
        worst.update(max(0.0, (lhs - rhs) / rhs), {"p": p, "f": coefs_to_json(f), "w": [w.real, w.imag]})
    return VerificationReport("diffquot", cases, worst.value, tol, None if worst.value <= tol else worst.case)


def cross_method_suite(opts: SolverOptions = SolverOptions(), tol: float = 1e-6) -> VerificationReport:
    """Closed form, Newton system and co-projection on the single-zero grid."""
    worst = _Worst()
    run = 0
    for p in GRID_PS:
        for r in GRID_MODULI:
            for th in GRID_ARGS:
                w = r * cmath.exp(1j * th)
                W = ZeroSetSpec((w,))
                a = solve_inner_newton(W, p, opts).J
                b = inner_by_projection(W, p, opts).J
                m = max(a.size, b.size)
                c = linear_inner_coefs(w, p, m - 1)
                d = max(np.max(np.abs(c[: a.size] - a)), np.max(np.abs(c[: b.size] - b)))
                worst.update(float(d), {"p": p, "w": [w.real, w.imag]})
                run += 1
    return VerificationReport("cross-method", run, worst.value, tol, None if worst.value <= tol else worst.case)


SUITES = {
    "pythagorean": lambda seed, cases, opts: pythagorean_suite(seed, cases or 1000),
    "involution": lambda seed, cases, opts: involution_suite(seed, cases or 1000),
    "diffquot": lambda seed, cases, opts: diffquot_suite(seed, cases or 500),
    "cross-method": lambda seed, cases, opts: cross_method_suite(opts),
}


def run_suite(name: str, seed: int = 42, cases: Optional[int] = None, opts: SolverOptions = SolverOptions()):
    return SUITES[name](seed, cases, opts)
