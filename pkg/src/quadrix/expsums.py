"""Complete exponential sums S_k(c; xi) attached to N(x) - h^2.

    S_k(c; xi) = sum_{a mod k, (a,k)=1} sum_{z mod kl, z = xi (l)} e_{kl}(a l F_h(z) + c.z)

Summing over a first turns the inner phase into the Ramanujan sum
c_k(F_h(z)), so S_k(c; xi) = sum_z c_k(F_h(z)) zeta_{kl}^{c.z}.  The direct
evaluator tabulates (N(z) mod k, c.z mod kl) on two coordinate halves and
contracts them with the Hankel matrix of the Ramanujan sum.  Values are
exact elements of Z[zeta_{kl}].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from sympy import divisors, factorint, mobius

from ._config import check_work
from .cyclotomic import Cyclotomic
from .forms import CongruenceClass, QuaternaryForm


@lru_cache(maxsize=4096)
def ramanujan_table(k: int) -> tuple[int, ...]:
    """c_k(m) for m = 0..k-1 via c_k(m) = sum_{d | (k, m)} mu(k/d) d."""
    out = np.zeros(k, dtype=np.int64)
    for d in divisors(k):
        mu = int(mobius(k // d))
        if mu:
            out[::d] += mu * d
    return tuple(int(v) for v in out)


def ramanujan_sum(k: int, m: int) -> int:
    return ramanujan_table(k)[m % k]


@dataclass
class ExpSumValue:
    k: int
    ell: int
    xi: tuple[int, ...]
    c: tuple[int, ...]
    h: int
    exact: Cyclotomic

    @property
    def value(self) -> complex:
        return complex(self.exact)

    def __abs__(self) -> float:
        return abs(self.value)

    @property
    def real_integer(self) -> int | None:
        """The value as an integer when it is one (always the case for c = 0)."""
        return self.exact.coeffs[0] if self.exact.is_integer() else None


def _half_table(F: QuaternaryForm, pair, xi, ell, k, c, M):
    """Histogram over (u_i, u_j) mod k of (N_pair(z) mod k, c.z mod M)."""
    i, j = pair
    u = np.arange(k, dtype=np.int64)
    zi = (xi[i] + ell * u) % (k * ell)
    zj = (xi[j] + ell * u) % (k * ell)
    a, b = (g.reshape(-1) for g in np.meshgrid(zi, zj, indexing="ij"))
    n = F.pair_values(pair, a, b) % k
    t = (c[i] * a + c[j] * b) % M
    return np.bincount(n * M + t, minlength=k * M).reshape(k, M)


def _hankel(k: int, h: int) -> np.ndarray:
    g = np.asarray(ramanujan_table(k), dtype=np.int64)
    idx = (np.arange(k)[:, None] + np.arange(k)[None, :] - h * h) % k
    return g[idx]


def s_k_direct(F: QuaternaryForm, k: int, cc: CongruenceClass, c: Sequence[int], h: int,
               work_bound: int | None = None) -> ExpSumValue:
    """S_k(c; xi) by complete summation over z mod kl (and a mod k)."""
    if k < 1:
        raise ValueError("k must be positive")
    ell, xi = cc.modulus, cc.residue
    M = k * ell
    c = tuple(int(v) % M for v in c)
    split = F.split
    if split is None:
        check_work(float(k) ** 4, work_bound, "s_k_direct")
        u = np.arange(k, dtype=np.int64)
        grid = np.stack(np.meshgrid(*[(xi[i] + ell * u) % M for i in range(4)], indexing="ij"),
                        axis=-1).reshape(-1, 4)
        n = F.values(grid) % k
        t = (grid @ np.asarray(c, dtype=np.int64)) % M
        g = np.asarray(ramanujan_table(k), dtype=np.int64)[(n - h * h) % k]
        vec = np.zeros(M, dtype=np.int64)
        np.add.at(vec, t, g)
    elif not any(c):
        check_work(2.0 * k * k, work_bound, "s_k_direct")
        H1 = _half_table(F, split[0], xi, ell, k, c, 1)[:, 0]
        H2 = _half_table(F, split[1], xi, ell, k, c, 1)[:, 0]
        vec = np.zeros(M, dtype=object)
        vec[0] = int(H1 @ _hankel(k, h) @ H2)
    else:
        check_work(float(k) ** 3 * ell * ell + float(k) * M * M, work_bound, "s_k_direct")
        H1 = _half_table(F, split[0], xi, ell, k, c, M)
        H2 = _half_table(F, split[1], xi, ell, k, c, M)
        P = H1.T @ _hankel(k, h) @ H2
        # fold P[t1, t2] onto t1 + t2 mod M
        tt = (np.arange(M)[:, None] + np.arange(M)[None, :]) % M
        vec = np.zeros(M, dtype=np.int64)
        np.add.at(vec, tt.reshape(-1), P.reshape(-1))
    return ExpSumValue(k, ell, xi, c, h, Cyclotomic.from_exponents(M, [int(v) for v in vec]))


def _prime_power_part(n: int, q: int) -> int:
    out = 1
    while n % q == 0:
        n //= q
        out *= q
    return out


def s_k_multiplicative(F: QuaternaryForm, k: int, cc: CongruenceClass, c: Sequence[int], h: int,
                       work_bound: int | None = None) -> ExpSumValue:
    """S_k(c; xi) assembled from prime-power blocks with twisted arguments.

    Write kl as a product of coprime blocks k_q l_q over the primes q | kl.
    The block at q contributes S_{k_q}(m_q c; xi mod l_q), where m_q is the
    inverse modulo k_q l_q of the product of the other blocks.
    """
    ell = cc.modulus
    M = k * ell
    primes = sorted(factorint(M)) if M > 1 else []
    value = Cyclotomic.integer(1)
    for q in primes:
        kq, lq = _prime_power_part(k, q), _prime_power_part(ell, q)
        Mq = kq * lq
        inv = pow(M // Mq, -1, Mq)
        cq = tuple((inv * int(v)) % Mq for v in c)
        part = s_k_direct(F, kq, cc.reduce(lq), cq, h, work_bound)
        value = value * part.exact
    return ExpSumValue(k, ell, cc.residue, tuple(int(v) % M for v in c), h, value.embed(M))


@dataclass
class SingularSeriesPartial:
    K: int
    exact: Fraction
    tail: float

    @property
    def value(self) -> float:
        return float(self.exact)


def singular_series_partial(F: QuaternaryForm, cc: CongruenceClass, h: int, K: int,
                            work_bound: int | None = None) -> SingularSeriesPartial:
    """sum_{k <= K} k^-4 S_k(0; xi) (exact) with a fitted K^-1/2 tail estimate.

    The tail constant is the largest value of |P_K - P_k| sqrt(k) over
    K/4 <= k < K, where P_k is the k-th partial sum.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    partial = []
    total = Fraction(0)
    zero = (0, 0, 0, 0)
    for k in range(1, K + 1):
        s = s_k_direct(F, k, cc, zero, h, work_bound).real_integer
        total += Fraction(s, k ** 4)
        partial.append(total)
    const = 0.0
    for k in range(max(1, K // 4), K):
        const = max(const, abs(float(total - partial[k - 1])) * math.sqrt(k))
    return SingularSeriesPartial(K, total, const / math.sqrt(K))
