"""Local densities of N(x) = h^2 and the main term of the weighted count.

For a prime q with q^s exactly dividing l, the q-adic density is the limit
over e of #{u mod q^e : N(xi + q^s u) = h^2 mod q^e} / q^(3e).  It is
computed by walking residue classes u0 + q^m Z_q^4: a class is closed off
as soon as the linear term of the Taylor expansion decides every lift
(Hensel) or the constant term rules out all solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from sympy import factorint, primerange

from ._config import NonConvergence, check_work
from .enumeration import Window, weighted_count
from .forms import CongruenceClass, FormError, QuaternaryForm, valuation

_INF = 10**6
_GOOD_RECURSION_LIMIT = 13


def _vq(arr: np.ndarray, q: int) -> np.ndarray:
    """q-adic valuation of each entry (object or int array); zero maps to _INF."""
    out = np.zeros(arr.shape, dtype=np.int64)
    work = arr.copy()
    zero = work == 0
    out[zero] = _INF
    live = ~zero
    while live.any():
        div = live & (work % q == 0)
        if not div.any():
            break
        out[div] += 1
        work[div] = work[div] // q
        live = div
    return out


@dataclass
class LocalDensity:
    q: int
    h: int
    s: int
    ladder: list[Fraction]
    limit: Fraction
    threshold: int
    stabilized: bool
    method: str = "hensel"

    @property
    def value(self) -> float:
        return float(self.limit)


def _tree(F: QuaternaryForm, q: int, xi: Sequence[int], s: int, h: int, work_bound=None):
    """Closed leaves and internal-node data of the class recursion.

    Returns (resolved, dead, internal) where resolved holds pairs (m, w),
    dead holds pairs (m, v(a)) and internal holds pairs (m, v(a)).
    """
    nu = F.min_coeff_valuation(q)
    qs = q ** s
    xi = np.array([int(v) % qs for v in xi], dtype=object)
    steps = np.array(np.meshgrid(*[np.arange(q)] * 4, indexing="ij"), dtype=object).reshape(4, -1).T
    resolved, dead, internal = [], [], []
    level = np.zeros((1, 4), dtype=object)
    m = 0
    while len(level):
        dtype = np.int64 if q ** (m + s + 1) < 2**30 else object
        A2 = np.array(F.gram2, dtype=dtype)
        x0 = (xi[None, :] + qs * level).astype(dtype)
        a = F.values(x0) - h * h
        grad = x0 @ A2.T
        vgrad = _vq(grad, q).min(axis=1)
        w = np.where(vgrad >= _INF, _INF, vgrad + m + s)
        va = _vq(a, q)
        vquad = 2 * m + 2 * s + nu
        is_res = (w < vquad) & (w <= va)
        is_dead = ~is_res & (va < np.minimum(w, vquad))
        resolved.extend((m, int(v)) for v in w[is_res])
        dead.extend((m, int(v)) for v in va[is_dead])
        rest = ~is_res & ~is_dead
        internal.extend((m, int(v)) for v in va[rest])
        parents = level[rest]
        if not len(parents):
            break
        check_work(len(parents) * len(steps), work_bound, f"density recursion at q={q}")
        level = (parents.astype(object)[:, None, :] + (q ** m) * steps[None, :, :]).reshape(-1, 4)
        m += 1
    return resolved, dead, internal


def _ladder_value(q: int, E: int, resolved, dead, internal) -> Fraction:
    total = Fraction(0)
    for m, w in resolved:
        if m <= E:
            total += Fraction(q) ** (min(w, E) - 4 * m)
    for m, va in dead:
        if m <= E and E <= va:
            total += Fraction(q) ** (E - 4 * m)
    for m, va in internal:
        if m == E and va >= E:
            total += Fraction(q) ** (-3 * E)
    return total


def _count_mod_q(F: QuaternaryForm, q: int, h: int) -> int:
    """#{x mod q : N(x) = h^2 mod q}, by joining half tables."""
    split = F.split
    r = np.arange(q, dtype=np.int64)
    if split is None:
        grid = np.stack(np.meshgrid(r, r, r, r, indexing="ij"), axis=-1).reshape(-1, 4)
        return int(np.count_nonzero((F.values(grid) - h * h) % q == 0))
    tables = []
    for pair in split:
        a, b = (g.reshape(-1) for g in np.meshgrid(r, r, indexing="ij"))
        tables.append(np.bincount(F.pair_values(pair, a, b) % q, minlength=q))
    h1, h2 = tables
    return int(sum(int(h1[n]) * int(h2[(h * h - n) % q]) for n in range(q)))


def stabilization_threshold(F: QuaternaryForm, q: int, h: int) -> int:
    return 2 * valuation(2 * h * F.disc_int, q) + 1


def sigma_q(F: QuaternaryForm, q: int, cc: CongruenceClass, h: int, e_max: int | None = None,
            work_bound=None, method: str = "auto") -> LocalDensity:
    """The q-adic density of N(x) = h^2 on x = xi (mod q^s), with its ladder.

    ``method`` is "hensel" (class recursion), "count" (one residue count
    mod q, valid only at primes of good reduction) or "auto".
    """
    ell = cc.modulus
    s = valuation(ell, q) if ell % q == 0 else 0
    threshold = stabilization_threshold(F, q, h)
    if e_max is None:
        e_max = threshold + 1
    if e_max < 2:
        raise ValueError("e_max must be at least 2")
    good = (2 * ell * h * F.disc_int) % q != 0
    if method == "count" and not good:
        raise FormError(f"q={q} is not a prime of good reduction")
    if method == "count" or (method == "auto" and good and q > _GOOD_RECURSION_LIMIT):
        lim = Fraction(_count_mod_q(F, q, h), q ** 3)
        ladder = [lim] * e_max
        return LocalDensity(q, h, s, ladder, lim, threshold, e_max >= max(2, threshold), "good-reduction")
    xi = cc.reduce(q ** s).residue if s else (0, 0, 0, 0)
    resolved, dead, internal = _tree(F, q, xi, s, h, work_bound)
    limit = sum((Fraction(q) ** (w - 4 * m) for m, w in resolved), Fraction(0))
    ladder = [_ladder_value(q, E, resolved, dead, internal) for E in range(1, e_max + 1)]
    stable = any(ladder[e - 1] == ladder[e - 2] for e in range(max(2, threshold), e_max + 1))
    stable = stable and ladder[-1] == limit
    return LocalDensity(q, h, s, ladder, limit, threshold, stable)


def tamagawa_local(F: QuaternaryForm, q: int, e_max: int | None = None) -> Fraction:
    """lim_e q^(-3e) #{x mod q^e : N(x) = 1}; for det4 this is |SL_2(Z/q^e)| / q^(3e)."""
    return sigma_q(F, q, CongruenceClass(), 1, e_max).limit


@dataclass
class SigmaFinite:
    value: float
    exact: Fraction
    factors: dict[int, LocalDensity]
    tail_interval: tuple[float, float]
    tail_kind: str = "heuristic: prod_{q > q_max} (1 - q^-2) envelope"


def required_q_max(F: QuaternaryForm, cc: CongruenceClass, h: int) -> int:
    n = abs(2 * cc.modulus * F.disc_int * h)
    return max(factorint(n))


def sigma_finite(F: QuaternaryForm, cc: CongruenceClass, h: int, q_max: int,
                 e_max: int | None = None) -> SigmaFinite:
    """prod_{q <= q_max} sigma_q with a heuristic interval for the remaining primes."""
    need = required_q_max(F, cc, h)
    if q_max < need:
        raise FormError(f"q_max={q_max} below the largest bad prime {need}")
    factors = {}
    exact = Fraction(1)
    for q in primerange(2, q_max + 1):
        d = sigma_q(F, int(q), cc, h, e_max)
        if not d.stabilized:
            raise NonConvergence(f"sigma_q did not stabilise at q={q}")
        factors[int(q)] = d
        exact *= d.limit
    v = float(exact)
    # sum_{q > Q} q^-2 < 1/Q bounds the relative size of the missing good factors
    return SigmaFinite(v, exact, factors, (v * (1 - 1 / q_max), v * (1 + 1 / q_max)))


# ---------------------------------------------------------------- sigma_infinity

@dataclass
class ArchDensity:
    value: float
    error: float
    ladder: list[tuple[float, float]] = field(default_factory=list)


def _sphere_nodes(n_psi: int, n_phi: int, n_phi2: int):
    gp, wp = np.polynomial.legendre.leggauss(n_psi)
    psi = (gp + 1) * np.pi / 2
    wpsi = wp * np.pi / 2 * np.sin(psi) ** 2
    g1, w1 = np.polynomial.legendre.leggauss(n_phi)
    phi = (g1 + 1) * np.pi / 2
    wphi = w1 * np.pi / 2 * np.sin(phi)
    phi2 = np.arange(n_phi2) * 2 * np.pi / n_phi2
    wphi2 = np.full(n_phi2, 2 * np.pi / n_phi2)
    P, F1, F2 = np.meshgrid(psi, phi, phi2, indexing="ij")
    W = (wpsi[:, None, None] * wphi[None, :, None] * wphi2[None, None, :]).reshape(-1)
    sp, s1 = np.sin(P), np.sin(F1)
    theta = np.stack([np.cos(P), sp * np.cos(F1), sp * s1 * np.cos(F2), sp * s1 * np.sin(F2)],
                     axis=-1).reshape(-1, 4)
    return theta, W


def _shell_integral(F, w, theta, W, Ntheta, eps, n_r=8, chunk=200_000) -> float:
    gr, wr = np.polynomial.legendre.leggauss(n_r)
    total = 0.0
    for start in range(0, len(theta), chunk):
        th, ww, nt = theta[start:start + chunk], W[start:start + chunk], Ntheta[start:start + chunk]
        r0 = np.sqrt((1 - eps) / nt)
        r1 = np.sqrt((1 + eps) / nt)
        half = (r1 - r0) / 2
        mid = (r1 + r0) / 2
        acc = np.zeros(len(th))
        for g, wt in zip(gr, wr):
            r = mid + half * g
            acc += wt * half * r ** 3 * w(th * r[:, None], F)
        total += float(np.dot(ww, acc))
    return total / (2 * eps)


def sigma_infinity_shell(F: QuaternaryForm, w: Window, eps_ladder: Sequence[float] | None = None,
                         nodes: tuple[int, int, int] = (96, 96, 96), tol: float = 1e-4) -> ArchDensity:
    """(2 eps)^-1 times the integral of w over |N - 1| <= eps, extrapolated to eps -> 0.

    Polar coordinates x = r theta on R^4; Gauss-Legendre in r across the shell
    and in the two polar angles, trapezoid in the azimuth.  The shell average
    has an even expansion in eps, so each Richardson step removes eps^2.
    """
    if eps_ladder is None:
        eps_ladder = [2.0 ** -k for k in range(3, 11)]
    if w.amplitude == 0:
        return ArchDensity(0.0, 0.0, [(e, 0.0) for e in eps_ladder])
    theta, W = _sphere_nodes(*nodes)
    Nt = F.values(theta)
    pos = Nt > 0
    theta, W, Nt = theta[pos], W[pos], Nt[pos]
    # drop directions whose whole shell misses the support
    lo, hi = np.array(w.bounding_box()).T
    reach = np.sqrt(np.sum(np.maximum(np.abs(lo), np.abs(hi)) ** 2))
    keep = np.sqrt((1 - max(eps_ladder)) / Nt) <= reach
    theta, W, Nt = theta[keep], W[keep], Nt[keep]
    vals = [_shell_integral(F, w, theta, W, Nt, e) for e in eps_ladder]
    rich = [(4 * vals[i + 1] - vals[i]) / 3 for i in range(len(vals) - 1)]
    err = abs(rich[-1] - rich[-2]) if len(rich) > 1 else abs(vals[-1] - vals[-2])
    if err > tol * max(1.0, abs(rich[-1])):
        raise NonConvergence(f"sigma_infinity shell ladder not converged (err={err:.2e})")
    return ArchDensity(rich[-1], err, list(zip(eps_ladder, vals)))


def sigma_infinity_limit(F: QuaternaryForm, w: Window, nodes=(96, 96, 96)) -> float:
    """The eps -> 0 limit in closed form: (1/2) integral of w(theta/sqrt N) N^-2 over N(theta) > 0."""
    theta, W = _sphere_nodes(*nodes)
    Nt = F.values(theta)
    pos = Nt > 0
    theta, W, Nt = theta[pos], W[pos], Nt[pos]
    return 0.5 * float(np.dot(W, w(theta / np.sqrt(Nt)[:, None], F) / Nt ** 2))


def sigma_infinity_parametric(w: Window, nodes: tuple[int, int, int] = (200, 200, 64)) -> float:
    """Integral of w over SL_2(R) in the coordinates g = k_theta [[s, y], [0, 1/s]].

    In these coordinates the measure dx / dN on the quadric det = 1 is
    exactly d theta ds dy, so no further normalisation is needed.
    """
    from .forms import CATALOG

    F = CATALOG["det4"]
    if w.amplitude == 0:
        return 0.0
    lo, hi = np.array(w.bounding_box()).T
    rho2 = float(np.sum(np.maximum(np.abs(lo), np.abs(hi)) ** 2))
    if rho2 <= 2:
        return 0.0
    disc = math.sqrt(rho2 * rho2 - 4)
    s_lo, s_hi = math.sqrt((rho2 - disc) / 2), math.sqrt((rho2 + disc) / 2)
    n_u, n_y, n_t = nodes
    gu, wu = np.polynomial.legendre.leggauss(n_u)
    u0, u1 = math.log(s_lo), math.log(s_hi)
    u = (u1 - u0) / 2 * gu + (u1 + u0) / 2
    wu = wu * (u1 - u0) / 2
    s = np.exp(u)
    gy, wy = np.polynomial.legendre.leggauss(n_y)
    th = np.arange(n_t) * 2 * np.pi / n_t
    wt = 2 * np.pi / n_t
    total = 0.0
    for si, wi in zip(s, wu):
        Y = math.sqrt(max(rho2 - si * si - 1 / (si * si), 0.0))
        if Y == 0:
            continue
        y = Y * gy
        # g = k_theta U with U = [[s, y], [0, 1/s]]
        c, sn = np.cos(th)[:, None], np.sin(th)[:, None]
        g = np.stack([np.broadcast_to(c * si, (n_t, n_y)), c * y - sn / si,
                      np.broadcast_to(sn * si, (n_t, n_y)), sn * y + c / si], axis=-1).reshape(-1, 4)
        vals = w(g, F).reshape(n_t, n_y)
        total += wi * si * Y * wt * float(np.sum(vals @ wy))
    return total


# ---------------------------------------------------------------- main term

@dataclass
class MainTermRow:
    h: int
    count: float
    main: float
    error: float
    sigma_f: float

    @property
    def ratio(self) -> float:
        return self.count / self.main if self.main else float("nan")


@dataclass
class MainTermReport:
    form: str
    window: str
    modulus: int
    residue: tuple[int, ...]
    sigma_inf: float
    rows: list[MainTermRow]
    error_slope: float | None


def fit_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log ys against log xs (nonpositive ys skipped)."""
    pts = [(math.log(x), math.log(y)) for x, y in zip(xs, ys) if y > 0]
    if len(pts) < 2:
        return float("nan")
    X, Y = np.array(pts).T
    return float(np.polyfit(X, Y, 1)[0])


def main_term_and_error(F: QuaternaryForm, cc: CongruenceClass, w: Window, h_ladder: Sequence[int],
                        q_max: int = 1000, sigma_inf: float | None = None,
                        work_bound=None) -> MainTermReport:
    """Count versus l^-4 sigma_inf sigma_f h^2 along a ladder of heights."""
    ps = {q for h in h_ladder for q in factorint(h)}
    if len(ps) > 1 or any(cc.modulus % p == 0 for p in ps):
        raise FormError("heights must be powers of one prime coprime to the modulus")
    if sigma_inf is None:
        sigma_inf = sigma_infinity_shell(F, w).value if w.amplitude else 0.0
    rows = []
    for h in h_ladder:
        count = weighted_count(F, h, cc, w, work_bound=work_bound)
        sf = sigma_finite(F, cc, h, max(q_max, required_q_max(F, cc, h))).value
        main = sigma_inf * sf * h * h / cc.modulus ** 4
        rows.append(MainTermRow(h, count, main, count - main, sf))
    slope = fit_slope([r.h for r in rows], [abs(r.error) for r in rows]) if w.amplitude else None
    return MainTermReport(F.name, w.describe(), cc.modulus, cc.residue, sigma_inf, rows, slope)
