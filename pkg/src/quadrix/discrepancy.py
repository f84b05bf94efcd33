"""Discrepancy of congruence lattice points of SL_2(Z[1/p]) in small balls.

The archimedean ball B(x, r) is the left translate x exp{X in sl_2 : |X|_F <= r}.
A point of Gamma_{p,l} in B(x, r) x B_h is h^-1 y with y an integer matrix,
det y = h^2, y = hI (mod l).  Haar measure on SL_2(R) is the Leray measure
dx / d(det) on the quadric det = 1, divided by the covolume zeta(2) of SL_2(Z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from sympy import factorint

from . import sl2
from .densities import fit_slope, sigma_infinity_parametric
from .enumeration import Window, enumerate_solutions, weighted_count
from .forms import CATALOG, CongruenceClass, FormError
from .padic import ball_volume

ZETA2 = math.pi ** 2 / 6
TOLERANCE = 1e-12


def _leray_density(a: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Haar density of exp at X = [[a/sqrt2, v], [w, -a/sqrt2]], per d(a) dv dw."""
    lam2 = a * a / 2 + v * w
    out = np.ones_like(lam2)
    pos = lam2 > 1e-12
    neg = lam2 < -1e-12
    lp = np.sqrt(lam2[pos])
    out[pos] = (np.sinh(lp) / lp) ** 2
    ln = np.sqrt(-lam2[neg])
    out[neg] = (np.sin(ln) / ln) ** 2
    small = ~pos & ~neg
    out[small] = 1 + lam2[small] / 3
    # d(a/sqrt2) dv dw is the Leray measure at the identity
    return out / math.sqrt(2)


def haar_ball_volume(r: float, nodes: int = 48) -> float:
    """m_infinity(B(e, r)) with the Tamagawa normalisation (covolume of SL_2(Z) is one)."""
    if not 0 < r <= 1:
        raise FormError("radius must satisfy 0 < r <= 1")
    g, wg = np.polynomial.legendre.leggauss(nodes)
    rho = (g + 1) * r / 2
    wr = wg * r / 2 * rho ** 2
    th = (g + 1) * np.pi / 2
    wt = wg * np.pi / 2 * np.sin(th)
    ph = np.arange(2 * nodes) * np.pi / nodes
    wp = np.pi / nodes
    R, T, P = np.meshgrid(rho, th, ph, indexing="ij")
    a = R * np.cos(T)
    v = R * np.sin(T) * np.cos(P)
    w = R * np.sin(T) * np.sin(P)
    W = wr[:, None, None] * wt[None, :, None] * wp
    return float(np.sum(W * _leray_density(a, v, w))) / ZETA2


@lru_cache(maxsize=None)
def congruence_index(ell: int) -> int:
    """|SL_2(Z/l)| = l^3 prod_{q | l} (1 - q^-2)."""
    if ell < 1:
        raise FormError("modulus must be positive")
    out = Fraction(ell ** 3)
    for q in factorint(ell):
        out *= 1 - Fraction(1, q * q)
    return int(out)


def congruence_index_brute(ell: int) -> int:
    r = np.arange(ell)
    g = np.stack(np.meshgrid(r, r, r, r, indexing="ij"), axis=-1).reshape(-1, 4)
    return int(np.count_nonzero((g[:, 0] * g[:, 3] - g[:, 1] * g[:, 2] - 1) % ell == 0))


@dataclass(frozen=True)
class ArchBall:
    center: tuple[float, float, float, float]
    r: float

    @property
    def volume(self) -> float:
        return haar_ball_volume(self.r)

    def box(self, h: int) -> list[tuple[float, float]]:
        """A box containing h B(x, r): |entry of x (e^X - I)| <= |row of x| (e^r - 1)."""
        x = sl2.as_matrix(self.center)
        grow = math.expm1(self.r)
        out = []
        for i in range(4):
            half = np.linalg.norm(x[i // 2]) * grow
            out.append((h * (self.center[i] - half), h * (self.center[i] + half)))
        return out

    def classify(self, points: np.ndarray, h: int) -> tuple[np.ndarray, np.ndarray]:
        """(inside, ambiguous) flags for h^-1 y; ambiguous means within TOLERANCE of the boundary."""
        rel = sl2.matmul(sl2.inverse(self.center), np.asarray(points, dtype=float) / h)
        d = sl2.log_norm(rel)
        return d <= self.r, np.abs(d - self.r) <= TOLERANCE


@dataclass
class WindowCount:
    count: int
    ambiguous: int

    @property
    def band(self) -> tuple[int, int]:
        return self.count - self.ambiguous, self.count + self.ambiguous


def _check_coprime(p: int, ell: int) -> None:
    if math.gcd(p, ell) != 1:
        raise FormError("p must be coprime to the modulus")


def count_in_window(p: int, s: int, ell: int, x, r: float, detail: bool = False):
    """#{y integral : det y = h^2, y = hI (mod l), h^-1 y in B(x, r)}, h = p^s."""
    _check_coprime(p, ell)
    h = p ** s
    ball = ArchBall(tuple(float(v) for v in np.asarray(x, dtype=float).reshape(4)), r)
    cc = CongruenceClass(ell, (h, 0, 0, h))
    sols = enumerate_solutions(CATALOG["det4"], h, cc, ball.box(h))
    inside, amb = ball.classify(sols.points, h)
    res = WindowCount(int(np.count_nonzero(inside)), int(np.count_nonzero(amb)))
    return res if detail else res.count


def discrepancy_from_count(count: float, p: int, s: int, ell: int, m_inf: float) -> float:
    mp = ball_volume(p, s).total
    return abs(count / mp - m_inf / congruence_index(ell))


def discrepancy_at(p: int, s: int, ell: int, x, r: float, m_inf: float | None = None) -> float:
    """|count / m_p(B_h) - m_infinity(B(e, r)) / |SL_2(Z/l)||."""
    if m_inf is None:
        m_inf = haar_ball_volume(r)
    return discrepancy_from_count(count_in_window(p, s, ell, x, r), p, s, ell, m_inf)


# ---------------------------------------------------------------- sampling

@lru_cache(maxsize=None)
def coset_lifts(ell: int) -> tuple[tuple[int, int, int, int], ...]:
    """One matrix of SL_2(Z) over each element of SL_2(Z/l), found by breadth-first search."""
    gens = [(1, 1, 0, 1), (1, -1, 0, 1), (0, -1, 1, 0), (0, 1, -1, 0)]
    target = congruence_index(ell)
    seen = {(1 % ell, 0, 0, 1 % ell): (1, 0, 0, 1)}
    frontier = [(1, 0, 0, 1)]
    while len(seen) < target:
        nxt = []
        for a, b, c, d in frontier:
            for e, f, g, hh in gens:
                m = (a * e + b * g, a * f + b * hh, c * e + d * g, c * f + d * hh)
                key = tuple(v % ell for v in m)
                if key not in seen:
                    seen[key] = m
                    nxt.append(m)
        frontier = nxt
    return tuple(seen[k] for k in sorted(seen))


def sample_quotient(ell: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n points of SL_2(R), distributed by the invariant probability on Gamma(l) \\ SL_2(R).

    g = n_x a_y k_theta with x + iy uniform for dx dy / y^2 on the standard
    fundamental domain of SL_2(Z), theta uniform on [0, pi), then a uniformly
    chosen coset representative acts on the left.
    """
    out = np.empty((n, 4))
    lifts = np.array(coset_lifts(ell), dtype=float)
    filled = 0
    c0 = math.sqrt(3) / 2
    while filled < n:
        m = 2 * (n - filled) + 16
        xs = rng.uniform(-0.5, 0.5, m)
        ys = c0 / (1 - rng.uniform(0, 1, m))
        keep = xs * xs + ys * ys >= 1
        xs, ys = xs[keep], ys[keep]
        k = min(len(xs), n - filled)
        xs, ys = xs[:k], ys[:k]
        th = rng.uniform(0, np.pi, k)
        sy = np.sqrt(ys)
        c, sn = np.cos(th), np.sin(th)
        # [[sy, x/sy], [0, 1/sy]] [[c, -sn], [sn, c]]
        g = np.stack([sy * c + xs / sy * sn, -sy * sn + xs / sy * c, sn / sy, c / sy], axis=1)
        idx = rng.integers(0, len(lifts), k)
        for j in range(k):
            out[filled + j] = sl2.matmul(lifts[idx[j]], g[j])
        filled += k
    return out


def fundamental_domain_fraction(samples: np.ndarray, T: float) -> float:
    """Fraction of samples whose point g i in the upper half plane has Im >= T.

    Only valid for l = 1, where g i already lies in the standard domain.
    """
    a, b, c, d = samples.T
    # g i = (a i + b) / (c i + d)
    im = 1 / (c * c + d * d)
    return float(np.mean(im >= T))


def cusp_fraction_exact(T: float) -> float:
    """Hyperbolic measure of {Im z >= T} in the standard domain over its total pi/3 (T >= 1)."""
    if T < 1:
        raise ValueError("T must be at least 1")
    return 3 / (math.pi * T)


# ---------------------------------------------------------------- mean square

@dataclass
class DiscrepancyRow:
    s: int
    h: int
    E: float
    ci: tuple[float, float]
    bound: float
    kappa_fit: float | None


@dataclass
class DiscrepancyReport:
    p: int
    ell: int
    r: float
    n_samples: int
    seed: int
    m_inf: float
    rows: list[DiscrepancyRow] = field(default_factory=list)
    counts: dict[int, list[int]] = field(default_factory=dict)

    @property
    def kappa(self) -> float | None:
        return self.rows[-1].kappa_fit if self.rows else None


def _bootstrap_rms(d2: np.ndarray, rng: np.random.Generator, n_boot: int = 400,
                   level: float = 0.95) -> tuple[float, float]:
    idx = rng.integers(0, len(d2), (n_boot, len(d2)))
    means = np.sqrt(d2[idx].mean(axis=1))
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def mean_square_from_counts(counts, p: int, s: int, ell: int, m_inf: float,
                            rng: np.random.Generator) -> tuple[float, tuple[float, float]]:
    d = np.array([discrepancy_from_count(c, p, s, ell, m_inf) for c in counts])
    d2 = d * d
    return float(math.sqrt(d2.mean())), _bootstrap_rms(d2, rng)


def mean_square_discrepancy(p: int, s_values, ell: int, r: float, n_samples: int,
                            seed: int) -> DiscrepancyReport:
    """E(s) = sqrt(mean D^2) over invariant samples of the center, for each s.

    The same centers are reused along the ladder of heights.
    """
    _check_coprime(p, ell)
    if isinstance(s_values, int):
        s_values = [s_values]
    rng = np.random.default_rng(seed)
    xs = sample_quotient(ell, n_samples, rng)
    m_inf = haar_ball_volume(r)
    rep = DiscrepancyReport(p, ell, r, n_samples, seed, m_inf)
    boot = np.random.default_rng([seed, 1])
    mps, Es = [], []
    for s in s_values:
        counts = [count_in_window(p, s, ell, x, r) for x in xs]
        E, ci = mean_square_from_counts(counts, p, s, ell, m_inf, boot)
        mps.append(ball_volume(p, s).total)
        Es.append(E)
        kappa = -fit_slope(mps, Es) if len(Es) > 1 else None
        rep.counts[s] = counts
        rep.rows.append(DiscrepancyRow(s, p ** s, E, ci, spectral_gap_bound(ell, m_inf, E), kappa))
    return rep


def spectral_gap_bound(ell: int, m_inf: float, E: float) -> float:
    """2 |SL_2(Z/l)| m_infinity(B(e, r))^-1 E.

    This is a conditional bound: it bounds the norm only for representations
    discretely embedded in the relevant L^2 space, which cannot be checked here.
    """
    if E < 0:
        raise FormError("E must be nonnegative")
    return 2 * congruence_index(ell) * E / m_inf


# ---------------------------------------------------------------- smooth proxy

@dataclass
class ProxyReport:
    p: int
    ell: int
    window: str
    sigma_inf: float
    main: float
    rows: list[tuple[int, float, float]]
    sigma_fit: float | None
    reference_exponents: dict = field(default_factory=lambda: {"isotropic": 1 / 16, "anisotropic": 1 / 4})


def smooth_proxy_decay(p: int, ell: int, w: Window, s_ladder, n_samples: int, seed: int) -> ProxyReport:
    """RMS over centers x of N_h(w_x; hI mod l) / m_p(B_h) minus its limit, per height.

    The limit is sigma_infinity(w) / (zeta(2) |SL_2(Z/l)|); sigma is the slope of
    -log RMS against log m_p(B_h).
    """
    _check_coprime(p, ell)
    if not w.smooth:
        raise FormError("the smooth proxy needs a smooth window")
    F = CATALOG["det4"]
    sig = sigma_infinity_parametric(w)
    main = sig / ZETA2 / congruence_index(ell)
    rng = np.random.default_rng(seed)
    xs = sample_quotient(ell, n_samples, rng)
    rows, mps, rms = [], [], []
    for s in s_ladder:
        h = p ** s
        cc = CongruenceClass(ell, (h, 0, 0, h))
        mp = ball_volume(p, s).total
        dev = np.array([weighted_count(F, h, cc, w.left_translated(x)) / mp - main for x in xs])
        val = float(np.sqrt(np.mean(dev * dev)))
        rows.append((s, mp, val))
        mps.append(mp)
        rms.append(val)
    fit = -fit_slope(mps, rms) if w.amplitude and len(rows) > 1 else None
    return ProxyReport(p, ell, w.describe(), sig, main, rows, fit)
