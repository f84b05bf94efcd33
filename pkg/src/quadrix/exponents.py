"""Volume growth exponents of height balls from root data.

A split torus element is written through coordinates t_i >= 0 dual to the
simple roots.  A weight chi of the defining representation takes the value
q^{n(chi).t} and the modular function is q^{m.t}, with m the coefficients
of 2 rho.  The ball of height h meets the positive chamber in
D_h = {t >= 0 : n(chi).t <= log_q h for all chi}, and its volume grows like
h^alpha with alpha = max{m.t : t in D_1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations

import numpy as np

from ._config import check_work
from .forms import _solve


class UnboundedPolytope(ValueError):
    pass


@dataclass(frozen=True)
class RootDatum:
    name: str
    rank: int
    weights: tuple[tuple[int, ...], ...]
    modular: tuple[int, ...]

    def __post_init__(self):
        for w in self.weights:
            if len(w) != self.rank:
                raise ValueError("weight length must equal the rank")
        if len(self.modular) != self.rank:
            raise ValueError("modular vector length must equal the rank")


def _e(i: int, d: int) -> list[Fraction]:
    v = [Fraction(0)] * d
    v[i] = Fraction(1)
    return v


def _classical(series: str, r: int):
    """Simple roots, positive roots and defining weights in epsilon coordinates."""
    if series == "A":
        d = r + 1
        simple = [[a - b for a, b in zip(_e(i, d), _e(i + 1, d))] for i in range(r)]
        pos = [[a - b for a, b in zip(_e(i, d), _e(j, d))] for i in range(d) for j in range(i + 1, d)]
        weights = [_e(i, d) for i in range(d)]
        return simple, pos, weights
    d = r
    diff = lambda i, j: [a - b for a, b in zip(_e(i, d), _e(j, d))]
    plus = lambda i, j: [a + b for a, b in zip(_e(i, d), _e(j, d))]
    pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
    simple = [diff(i, i + 1) for i in range(d - 1)]
    pos = [diff(i, j) for i, j in pairs] + [plus(i, j) for i, j in pairs]
    weights = [_e(i, d) for i in range(d)] + [[-x for x in _e(i, d)] for i in range(d)]
    if series == "B":
        simple.append(_e(d - 1, d))
        pos += [_e(i, d) for i in range(d)]
        weights.append([Fraction(0)] * d)
    elif series == "C":
        simple.append([2 * x for x in _e(d - 1, d)])
        pos += [[2 * x for x in _e(i, d)] for i in range(d)]
    elif series == "D":
        if d == 1:
            raise ValueError("D_1 is a torus")
        simple.append(plus(d - 2, d - 1) if d > 1 else None)
    else:
        raise ValueError(f"unknown series {series}")
    return simple, pos, weights


def _dot(a, b) -> Fraction:
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def _root_coordinates(simple, vec) -> list[Fraction]:
    """Coordinates of the orthogonal projection of vec onto span(simple)."""
    G = [[_dot(a, b) for b in simple] for a in simple]
    return _solve(G, [_dot(a, vec) for a in simple])


def classical(series: str, r: int) -> RootDatum:
    """Root datum of A_r, B_r, C_r or D_r with integer data (common denominators cleared)."""
    if r == 0:
        return RootDatum(f"{series}0", 0, (), ())
    simple, pos, weights = _classical(series, r)
    two_rho = [sum(col) for col in zip(*pos)]
    n = [_root_coordinates(simple, w) for w in weights]
    m = _root_coordinates(simple, two_rho)
    den = reduce(math.lcm, [x.denominator for row in n for x in row] + [x.denominator for x in m], 1)
    wts = tuple(tuple(int(x * den) for x in row) for row in n)
    return RootDatum(f"{series}{r}", r, wts, tuple(int(x * den) for x in m))


def special_orthogonal(n: int) -> RootDatum:
    """SO_n: B_{(n-1)/2} for odd n, D_{n/2} for even n >= 4."""
    if n % 2:
        return classical("B", (n - 1) // 2)
    return classical("D", n // 2)


def family(name: str, n: int) -> tuple[RootDatum, RootDatum]:
    """(G, L) pairs behind the norm exponents: SL_n > SL_{n-1}, Sp_2n > Sp_2n-2, SO_n > SO_n-1."""
    if name == "sl":
        return classical("A", n - 1), classical("A", n - 2)
    if name == "sp":
        return classical("C", n), classical("C", n - 1)
    if name == "so":
        return special_orthogonal(n), special_orthogonal(n - 1)
    raise ValueError(f"unknown family {name!r}")


# ---------------------------------------------------------------- linear programming

def _simplex_max(c: list[Fraction], A: list[list[Fraction]], b: list[Fraction]) -> Fraction:
    """max c.t subject to A t <= b, t >= 0, with b >= 0 (Bland's rule, exact)."""
    rows, cols = len(A), len(c)
    T = [list(map(Fraction, A[i])) + [Fraction(int(i == k)) for k in range(rows)] + [Fraction(b[i])]
         for i in range(rows)]
    obj = [-Fraction(x) for x in c] + [Fraction(0)] * (rows + 1)
    basis = [cols + i for i in range(rows)]
    while True:
        enter = next((j for j in range(cols + rows) if obj[j] < 0), None)
        if enter is None:
            return obj[-1]
        ratios = [(T[i][-1] / T[i][enter], basis[i], i) for i in range(rows) if T[i][enter] > 0]
        if not ratios:
            raise UnboundedPolytope("objective unbounded on D_1")
        _, _, piv = min(ratios)
        pv = T[piv][enter]
        T[piv] = [x / pv for x in T[piv]]
        for i in range(rows):
            if i != piv and T[i][enter]:
                f = T[i][enter]
                T[i] = [x - f * y for x, y in zip(T[i], T[piv])]
        f = obj[enter]
        obj = [x - f * y for x, y in zip(obj, T[piv])]
        basis[piv] = enter


def volume_exponent(rd: RootDatum) -> Fraction:
    """alpha = max m.t over D_1, by exact simplex."""
    if rd.rank == 0:
        return Fraction(0)
    A = [[Fraction(x) for x in w] for w in rd.weights]
    return _simplex_max([Fraction(x) for x in rd.modular], A, [Fraction(1)] * len(A))


def volume_exponent_vertices(rd: RootDatum) -> Fraction:
    """alpha by enumerating all vertices of D_1 (reference implementation)."""
    r = rd.rank
    if r == 0:
        return Fraction(0)
    cons = [([Fraction(x) for x in w], Fraction(1)) for w in rd.weights]
    cons += [([-x for x in _e(i, r)], Fraction(0)) for i in range(r)]
    best = None
    for sub in combinations(cons, r):
        M = [row for row, _ in sub]
        rhs = [v for _, v in sub]
        try:
            t = _solve(M, rhs)
        except StopIteration:
            continue
        if all(_dot(row, t) <= v for row, v in cons):
            val = _dot([Fraction(x) for x in rd.modular], t)
            best = val if best is None else max(best, val)
    # a vertex maximum equals the LP optimum only for bounded D_1
    _box_bounds(rd)
    return best


@dataclass(frozen=True)
class ExponentReport:
    alpha_G: Fraction
    alpha_L: Fraction

    @property
    def exponent(self) -> Fraction:
        return self.alpha_L / self.alpha_G - 1


def norm_lower_exponent(G: RootDatum, L: RootDatum) -> ExponentReport:
    return ExponentReport(volume_exponent(G), volume_exponent(L))


# ---------------------------------------------------------------- lattice sums

def _box_bounds(rd: RootDatum) -> list[Fraction]:
    """max t_i over D_1 for each coordinate."""
    A = [[Fraction(x) for x in w] for w in rd.weights]
    return [_simplex_max(_e(i, rd.rank), A, [Fraction(1)] * len(A)) for i in range(rd.rank)]


def volume_lattice_sum(rd: RootDatum, q: int, k: int, work_bound: int | None = None) -> int:
    """V(q^k) = sum of q^{m.t} over integer t in D_{q^k}."""
    if rd.rank == 0:
        return 1
    bounds = [math.floor(b * k) for b in _box_bounds(rd)]
    check_work(math.prod(b + 1 for b in bounds), work_bound, "volume_lattice_sum")
    grid = np.stack(np.meshgrid(*[np.arange(b + 1) for b in bounds], indexing="ij"),
                    axis=-1).reshape(-1, rd.rank)
    W = np.array(rd.weights, dtype=np.int64)
    ok = np.all(grid @ W.T <= k, axis=1)
    exps = grid[ok] @ np.array(rd.modular, dtype=np.int64)
    vals, counts = np.unique(exps, return_counts=True)
    return sum(int(c) * q ** int(v) for v, c in zip(vals, counts))


def doubling_check(rd: RootDatum, q: int, s_max: int) -> Fraction:
    """max over s < s_max of V(q^{s+1}) / V(q^s)."""
    V = [volume_lattice_sum(rd, q, s) for s in range(s_max + 1)]
    return max((Fraction(V[s + 1], V[s]) for s in range(s_max)), default=Fraction(1))
