"""Exact arithmetic in cyclotomic fields Q(zeta_n) with integer coefficients.

An element is stored as its coefficient vector in the power basis
1, z, ..., z^(phi(n)-1) of Z[zeta_n], i.e. reduced modulo the n-th
cyclotomic polynomial.  Equality of reduced vectors is equality in the field.
"""

from __future__ import annotations

import cmath
from functools import lru_cache
from math import gcd

import numpy as np
from sympy import Poly, cyclotomic_poly, symbols

_X = symbols("x")


@lru_cache(maxsize=None)
def cyclotomic_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first (monic)."""
    return tuple(int(c) for c in reversed(Poly(cyclotomic_poly(n, _X), _X).all_coeffs()))


def _reduce(poly: list[int], n: int) -> tuple[int, ...]:
    phi = cyclotomic_coeffs(n)
    d = len(phi) - 1
    a = list(poly) + [0] * max(0, d - len(poly))
    for i in range(len(a) - 1, d - 1, -1):
        c = a[i]
        if c:
            base = i - d
            for j in range(d):
                if phi[j]:
                    a[base + j] -= c * phi[j]
            a[i] = 0
    return tuple(a[:d])


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class Cyclotomic:
    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs):
        self.n = n
        self.coeffs = tuple(int(c) for c in coeffs)

    @classmethod
    def from_exponents(cls, n: int, counts) -> "Cyclotomic":
        """sum_t counts[t] * zeta_n^t for t in Z/n."""
        counts = [int(c) for c in counts]
        assert len(counts) == n
        return cls(n, _reduce(counts, n))

    @classmethod
    def integer(cls, v: int, n: int = 1) -> "Cyclotomic":
        return cls.from_exponents(n, [int(v)] + [0] * (n - 1))

    def _power_vector(self, m: int) -> list[int]:
        """Coefficients with respect to powers of zeta_m, for n | m."""
        step = m // self.n
        out = [0] * m
        for j, c in enumerate(self.coeffs):
            if c:
                out[j * step] += c
        return out

    def embed(self, m: int) -> "Cyclotomic":
        if m % self.n:
            raise ValueError(f"Q(zeta_{self.n}) does not embed in Q(zeta_{m})")
        if m == self.n:
            return self
        return Cyclotomic(m, _reduce(self._power_vector(m), m))

    def __mul__(self, other: "Cyclotomic") -> "Cyclotomic":
        m = _lcm(self.n, other.n)
        a = self._power_vector(m)
        b = other._power_vector(m)
        out = [0] * m
        nz_b = [(j, c) for j, c in enumerate(b) if c]
        for i, ca in enumerate(a):
            if ca:
                for j, cb in nz_b:
                    out[(i + j) % m] += ca * cb
        return Cyclotomic(m, _reduce(out, m))

    def __add__(self, other: "Cyclotomic") -> "Cyclotomic":
        m = _lcm(self.n, other.n)
        a = self._power_vector(m)
        b = other._power_vector(m)
        return Cyclotomic(m, _reduce([x + y for x, y in zip(a, b)], m))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cyclotomic):
            return NotImplemented
        m = _lcm(self.n, other.n)
        return self.embed(m).coeffs == other.embed(m).coeffs

    def __hash__(self):
        raise TypeError("Cyclotomic is unhashable")

    def conj(self) -> "Cyclotomic":
        v = self._power_vector(self.n)
        w = [0] * self.n
        for t, c in enumerate(v):
            w[(-t) % self.n] += c
        return Cyclotomic(self.n, _reduce(w, self.n))

    def is_integer(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def __complex__(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.n)
        return complex(sum(c * z ** j for j, c in enumerate(self.coeffs) if c))

    def __repr__(self):
        return f"Cyclotomic(n={self.n}, coeffs={self.coeffs})"


def floating_from_exponents(n: int, counts: np.ndarray) -> complex:
    t = np.arange(n)
    return complex(np.sum(counts * np.exp(2j * np.pi * t / n)))
