"""Integral quaternary quadratic forms, residue classes and p-adic points.

A form is stored by its ten integer coefficients c_ij (i <= j) of
Q(x) = sum c_ij x_i x_j, in the order 11,12,13,14,22,23,24,33,34,44.
Coordinates of a 2x2 matrix [[a, b], [c, d]] are (a, b, c, d).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np
from sympy import factorint, legendre_symbol

PAIRS = [(i, j) for i in range(4) for j in range(i, 4)]


class FormError(ValueError):
    pass


def _det(m: list[list[Fraction]]) -> Fraction:
    n = len(m)
    a = [row[:] for row in m]
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if a[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det *= a[i][i]
        for r in range(i + 1, n):
            f = a[r][i] / a[i][i]
            if f:
                for col in range(i, n):
                    a[r][col] -= f * a[i][col]
    return det


def _solve(m: list[list[Fraction]], rhs: Sequence[Fraction]) -> list[Fraction]:
    n = len(m)
    a = [list(row) + [Fraction(b)] for row, b in zip(m, rhs)]
    for i in range(n):
        piv = next(r for r in range(i, n) if a[r][i] != 0)
        a[i], a[piv] = a[piv], a[i]
        inv = 1 / a[i][i]
        a[i] = [v * inv for v in a[i]]
        for r in range(n):
            if r != i and a[r][i]:
                f = a[r][i]
                a[r] = [x - f * y for x, y in zip(a[r], a[i])]
    return [row[n] for row in a]


def diagonalize(gram: list[list[Fraction]]) -> list[Fraction]:
    """Diagonal entries of a rational form equivalent to ``gram`` over Q."""
    a = [row[:] for row in gram]
    n = len(a)
    diag = []
    for i in range(n):
        if a[i][i] == 0:
            j = next((j for j in range(i + 1, n) if a[j][j] != 0), None)
            if j is not None:
                a[i], a[j] = a[j], a[i]
                for row in a:
                    row[i], row[j] = row[j], row[i]
            else:
                j = next((j for j in range(i + 1, n) if a[i][j] != 0), None)
                if j is None:
                    raise FormError("degenerate form")
                # e_i <- e_i + e_j
                for col in range(n):
                    a[i][col] += a[j][col]
                for row in range(n):
                    a[row][i] += a[row][j]
        piv = a[i][i]
        diag.append(piv)
        for r in range(i + 1, n):
            f = a[r][i] / piv
            if f:
                for col in range(n):
                    a[r][col] -= f * a[i][col]
                for row in range(n):
                    a[row][r] -= f * a[row][i]
    return diag


def _squarefree_part(x: Fraction) -> int:
    num = x.numerator * x.denominator
    sign = -1 if num < 0 else 1
    out = 1
    for q, e in factorint(abs(num)).items():
        if e % 2:
            out *= q
    return sign * out


def hilbert_symbol(a: int, b: int, p: int) -> int:
    """(a, b)_p for nonzero integers a, b and a prime p."""
    def split(x):
        v = 0
        while x % p == 0:
            x //= p
            v += 1
        return v, x

    alpha, u = split(a)
    beta, v = split(b)
    if p == 2:
        eps = lambda t: ((t - 1) // 2) % 2
        omega = lambda t: ((t * t - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    return sign * legendre_symbol(u % p, p) ** beta * legendre_symbol(v % p, p) ** alpha


def _is_padic_square(d: int, p: int) -> bool:
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    if v % 2:
        return False
    if p == 2:
        return d % 8 == 1
    return legendre_symbol(d % p, p) == 1


@dataclass(frozen=True)
class QuaternaryForm:
    coeffs: tuple[int, ...]
    name: str = "custom"
    order: str = "Z^4 (standard lattice)"

    def __post_init__(self):
        if len(self.coeffs) != 10:
            raise FormError("a quaternary form needs 10 coefficients")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if self.disc == 0:
            raise FormError("degenerate form (det A = 0)")

    @cached_property
    def gram(self) -> list[list[Fraction]]:
        a = [[Fraction(0)] * 4 for _ in range(4)]
        for (i, j), c in zip(PAIRS, self.coeffs):
            if i == j:
                a[i][i] = Fraction(c)
            else:
                a[i][j] = a[j][i] = Fraction(c, 2)
        return a

    @cached_property
    def disc(self) -> Fraction:
        return _det(self.gram)

    @cached_property
    def disc_int(self) -> int:
        """det(2A), an integer."""
        return int(self.disc * 16)

    @cached_property
    def gram2(self) -> np.ndarray:
        """Integer matrix 2A; the gradient of Q at x is 2A x."""
        return np.array([[int(2 * v) for v in row] for row in self.gram], dtype=np.int64)

    @cached_property
    def iso_real(self) -> bool:
        ev = np.linalg.eigvalsh(np.array(self.gram, dtype=float))
        return bool(ev.min() < 0 < ev.max())

    @cached_property
    def iso_rational(self) -> bool:
        if not self.iso_real:
            return False
        diag = [_squarefree_part(d) for d in diagonalize(self.gram)]
        d = 1
        for a in diag:
            d *= a
        primes = {2}
        for a in diag:
            primes.update(factorint(abs(a)))
        for p in sorted(primes):
            eps = 1
            for a, b in combinations(diag, 2):
                eps *= hilbert_symbol(a, b, p)
            if _is_padic_square(d, p) and eps == -hilbert_symbol(-1, -1, p):
                return False
        return True

    @cached_property
    def split(self) -> tuple[tuple[int, int], tuple[int, int]] | None:
        """Two coordinate pairs with no cross terms between them, if any."""
        for pair in ((0, 1), (0, 2), (0, 3)):
            other = tuple(i for i in range(4) if i not in pair)
            if all(c == 0 for (i, j), c in zip(PAIRS, self.coeffs)
                   if (i in pair) != (j in pair)):
                return pair, other
        return None

    def min_coeff_valuation(self, q: int) -> int:
        v = None
        for c in self.coeffs:
            if c:
                k = 0
                while c % q == 0:
                    c //= q
                    k += 1
                v = k if v is None else min(v, k)
        return v

    def __call__(self, x: Sequence[int]) -> int:
        return evaluate_form(self, x)

    def values(self, x: np.ndarray) -> np.ndarray:
        """Vectorised Q on an (..., 4) integer array."""
        out = np.zeros(x.shape[:-1], dtype=x.dtype)
        for (i, j), c in zip(PAIRS, self.coeffs):
            if c:
                out = out + c * x[..., i] * x[..., j]
        return out

    def pair_values(self, pair: tuple[int, int], a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Q restricted to the coordinate pair, for coordinate arrays a, b."""
        i, j = pair
        cf = dict(zip(PAIRS, self.coeffs))
        return cf[(i, i)] * a * a + cf[(i, j)] * a * b + cf[(j, j)] * b * b

    def describe(self) -> dict:
        return {
            "form": self.name,
            "coeffs": list(self.coeffs),
            "order": self.order,
            "disc": f"{self.disc.numerator}/{self.disc.denominator}",
        }


def _from_terms(terms: dict[tuple[int, int], int], **kw) -> QuaternaryForm:
    return QuaternaryForm(tuple(terms.get(p, 0) for p in PAIRS), **kw)


CATALOG = {
    # N(x) = x1 x4 - x2 x3 on M_2(Z), the split algebra
    "det4": _from_terms({(0, 3): 1, (1, 2): -1}, name="det4",
                        order="M_2(Z) (maximal order of M_2(Q))"),
    # Hamilton norm on the Lipschitz order
    "sq4": _from_terms({(0, 0): 1, (1, 1): 1, (2, 2): 1, (3, 3): 1}, name="sq4",
                       order="Lipschitz order Z<1,i,j,k> of (-1,-1)_Q"),
    # reduced norm of (2,3)_Q on Z<1,i,j,ij>; division algebra ramified at 3 and infinity-split
    "indef-2-3": _from_terms({(0, 0): 1, (1, 1): -2, (2, 2): -3, (3, 3): 6}, name="indef-2-3",
                             order="Z<1,i,j,ij> in (2,3)_Q"),
}


def get_form(key: str | Sequence[int]) -> QuaternaryForm:
    """Catalog key or an explicit list of ten integer coefficients."""
    if isinstance(key, str):
        if key in CATALOG:
            return CATALOG[key]
        try:
            coeffs = [int(t) for t in key.split(",")]
        except ValueError:
            raise FormError(f"unknown form {key!r}") from None
        return QuaternaryForm(tuple(coeffs))
    return QuaternaryForm(tuple(key))


@dataclass(frozen=True)
class CongruenceClass:
    modulus: int = 1
    residue: tuple[int, ...] = (0, 0, 0, 0)

    def __post_init__(self):
        if self.modulus < 1:
            raise FormError("modulus must be positive")
        if len(self.residue) != 4:
            raise FormError("residue must have 4 entries")
        object.__setattr__(self, "residue", tuple(int(r) % self.modulus for r in self.residue))

    def reduce(self, m: int) -> "CongruenceClass":
        """The induced class modulo a divisor m of the modulus."""
        assert self.modulus % m == 0
        return CongruenceClass(m, tuple(r % m for r in self.residue))

    def contains(self, x: Sequence[int]) -> bool:
        return all((xi - r) % self.modulus == 0 for xi, r in zip(x, self.residue))


def evaluate_form(F: QuaternaryForm, x: Sequence[int]) -> int:
    return sum(c * int(x[i]) * int(x[j]) for (i, j), c in zip(PAIRS, F.coeffs) if c)


def f_h(F: QuaternaryForm, x: Sequence[int], h: int) -> int:
    return evaluate_form(F, x) - h * h


def gram_inverse_times(F: QuaternaryForm, c: Sequence[int]) -> tuple[Fraction, ...]:
    """Exact solution y of A y = c."""
    return tuple(_solve(F.gram, [Fraction(int(v)) for v in c]))


def bilinear(F: QuaternaryForm, x: Sequence[int], y: Sequence[int]) -> Fraction:
    """x^T A y."""
    return sum(Fraction(int(x[i])) * F.gram[i][j] * int(y[j]) for i in range(4) for j in range(4))


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True)
class PAdicPoint:
    """The vector p^(-s) * num in Z[1/p]^4 (s may be negative)."""
    p: int
    num: tuple[int, ...]
    s: int = 0

    def __post_init__(self):
        object.__setattr__(self, "num", tuple(int(v) for v in self.num))

    @property
    def canonical(self) -> bool:
        return any(v % self.p for v in self.num)

    @classmethod
    def make(cls, p: int, num: Sequence[int], s: int = 0) -> "PAdicPoint":
        """Canonicalise by cancelling common powers of p."""
        num = [int(v) for v in num]
        if not any(num):
            raise ValueError("zero vector has no p-adic height")
        while all(v % p == 0 for v in num):
            num = [v // p for v in num]
            s -= 1
        return cls(p, tuple(num), s)

    def matmul(self, other: "PAdicPoint") -> "PAdicPoint":
        """Product of 2x2-shaped points."""
        assert self.p == other.p
        a, b, c, d = self.num
        e, f, g, h = other.num
        prod = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return PAdicPoint.make(self.p, prod, self.s + other.s)


def padic_height(x: PAdicPoint) -> int:
    """Exponent e with max_i |x_i|_p = p^e."""
    if not any(x.num):
        raise ValueError("zero vector has no p-adic height")
    if not x.canonical:
        raise ValueError(f"non-canonical representation {x}")
    return x.s - min(valuation(v, x.p) for v in x.num if v)
