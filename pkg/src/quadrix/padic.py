"""Height balls and spherical functions of SL_2(Q_p) on the Bruhat-Tits tree.

The ball B_{p^s} of elements with max p-adic entry norm at most p^s is the
union of the Cartan cells K a_j K, j <= s, where a_j = diag(p^-j, p^j).  With
m_p(K) = 1 the cell K a_j K has volume equal to the number of vertices at
distance 2j from the origin of the (p+1)-regular tree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class TreeBallProfile:
    p: int
    s: int
    shells: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.shells)


def shell_volume(p: int, j: int) -> int:
    return 1 if j == 0 else (p + 1) * p ** (2 * j - 1)


def ball_volume(p: int, s: int) -> TreeBallProfile:
    """Shell volumes vol_0..vol_s of B_{p^s}; the total is 1 + p (p^{2s} - 1) / (p - 1)."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    return TreeBallProfile(p, s, tuple(shell_volume(p, j) for j in range(s + 1)))


def hecke_eigenvalue(p: int, s):
    """lambda(s) = (p^{1-s} + p^{1+s} + p - 1) / (p^2 + p); exact if s is given as p^s."""
    return (p ** (1 - s) + p ** (1 + s) + p - 1) / (p * p + p)


def _eigenvalue_from_t(p: int, t: Fraction) -> Fraction:
    return (Fraction(p) / t + p * t + p - 1) / (p * p + p)


def spherical_values(p: int, s: float, J: int, exact_t: Fraction | None = None) -> list:
    """f(0), f(2), ..., f(2J) from the radial recursion on the tree.

    With ``exact_t`` = p^s given as a rational the values are exact Fractions.
    """
    if exact_t is None:
        if not 0 <= s <= 1:
            raise ValueError("s must lie in [0, 1]")
        lam = hecke_eigenvalue(p, s)
        one = 1.0
    else:
        lam = _eigenvalue_from_t(p, Fraction(exact_t))
        one = Fraction(1)
    f = [one, lam]
    for j in range(1, J):
        f.append(((p * p + p) * lam * f[j] - (p - 1) * f[j] - f[j - 1]) / (p * p))
    return f[: J + 1]


def spherical_value(p: int, s: float, j: int):
    if not 0 <= s < 1:
        raise ValueError("s must lie in [0, 1)")
    return spherical_values(p, s, j)[j]


def averaging_residual(p: int, f: list, lam) -> float:
    """Largest |A f - lambda f| over interior indices, A the distance-2 average."""
    worst = 0.0
    for j in range(1, len(f) - 1):
        avg = (f[j - 1] + (p - 1) * f[j] + p * p * f[j + 1]) / (p * p + p)
        worst = max(worst, abs(float(avg - lam * f[j])))
    return worst


def operator_norm_complementary(p: int, s: float, s_height: int, exact_t: Fraction | None = None):
    """|sum_j vol_j f(2j)| / m_p(B_h) for h = p^s_height."""
    prof = ball_volume(p, s_height)
    f = spherical_values(p, s, s_height, exact_t)
    num = sum(v * fj for v, fj in zip(prof.shells, f))
    if exact_t is not None:
        return abs(Fraction(num)) / prof.total
    return abs(num) / prof.total


def weak_lower_average(p: int, s_height: int) -> Fraction:
    """m(B_h)^-1 sum_j vol_j p^-j, the average of delta^{1/2} over B_h."""
    prof = ball_volume(p, s_height)
    return sum((Fraction(v, p ** j) for j, v in enumerate(prof.shells)), Fraction(0)) / prof.total


def tempered_reference(mB: float, eps: float) -> float:
    if mB < 1:
        raise ValueError("mB must be at least 1")
    return mB ** (-0.5 + eps)


def hermite_cell_count(p: int, j: int) -> int:
    """Primitive integer matrices [[a, b], [0, d]] with ad = p^{2j}, 0 <= b < d.

    These index the K-cosets in K a_j K, giving an independent count of
    the shell volume.
    """
    count = 0
    for e in range(2 * j + 1):
        a, d = p ** e, p ** (2 * j - e)
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                count += 1
    return count
