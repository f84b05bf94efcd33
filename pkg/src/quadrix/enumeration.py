"""Lattice points on N(x) = h^2 in a residue class, and weighted counts.

The enumerator splits the coordinates into two pairs with no cross terms,
tabulates the form on each half and joins the halves through a sorted
search, so a box of side B costs O(B^2 log B) instead of O(B^4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._config import check_work
from .forms import CongruenceClass, FormError, QuaternaryForm
from . import sl2

KINDS = ("radial-bump", "annular-bump", "indicator-box", "indicator-ball")
_ALIASES = {"radial": "radial-bump", "bump": "radial-bump", "annular": "annular-bump",
            "box": "indicator-box", "ball": "indicator-ball"}


def bump(t: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1 - t^2)) on |t| < 1 and 0 elsewhere; equals 1 at t = 0."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    ti = t[inside]
    out[inside] = np.exp(1 - 1 / (1 - ti * ti))
    return out


@dataclass(frozen=True)
class Window:
    """A compactly supported weight on R^4, optionally translated.

    ``R`` is the radius (half-width for boxes, metric radius for balls).
    For ``indicator-ball`` the center is a 2x2 matrix of determinant one,
    flattened, and the support is the left translate center*exp(ball).
    ``translate`` is a flattened 4x4 matrix g acting as w_g(x) = w(g^-1 x).
    """

    kind: str = "annular-bump"
    R: float = 2.0
    center: tuple[float, ...] | None = None
    amplitude: float = 1.0
    delta: float = 0.5
    translate: tuple[float, ...] | None = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise FormError(f"unknown window kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if self.center is None:
            default = (1.0, 0.0, 0.0, 1.0) if kind in ("radial-bump", "indicator-ball") else (0.0,) * 4
            object.__setattr__(self, "center", default)
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.R <= 0:
            raise FormError("window radius must be positive")
        if kind == "indicator-ball" and self.R > 1:
            raise FormError("metric balls need r <= 1 for the exponential chart")
        if self.translate is not None:
            g = np.asarray(self.translate, dtype=float).reshape(4, 4)
            object.__setattr__(self, "translate", tuple(g.reshape(16)))

    @property
    def smooth(self) -> bool:
        return self.kind in ("radial-bump", "annular-bump")

    @classmethod
    def parse(cls, text: str) -> "Window":
        """Parse descriptors such as ``annular:R=2`` or ``bump:R=0.3,amp=2``."""
        kind, _, rest = text.partition(":")
        kw: dict = {}
        for item in filter(None, rest.split(",")):
            key, _, val = item.partition("=")
            key = key.strip().lower()
            if key in ("r",):
                kw["R"] = float(val)
            elif key == "delta":
                kw["delta"] = float(val)
            elif key in ("amp", "amplitude"):
                kw["amplitude"] = float(val)
            elif key == "center":
                kw["center"] = tuple(float(v) for v in val.split(";"))
            else:
                raise FormError(f"unknown window parameter {key!r}")
        return cls(kind.strip(), **kw)

    def describe(self) -> str:
        parts = [f"R={self.R:g}", "center=" + ";".join(f"{c:g}" for c in self.center)]
        if self.kind == "annular-bump":
            parts.append(f"delta={self.delta:g}")
        if self.amplitude != 1.0:
            parts.append(f"amp={self.amplitude:g}")
        if self.translate is not None:
            parts.append("translated")
        return f"{self.kind}:" + ",".join(parts)

    def scaled(self, c: float) -> "Window":
        return replace(self, amplitude=self.amplitude * c)

    def translated(self, g) -> "Window":
        """w_g with g a 4x4 matrix, composed with any existing translate."""
        g = np.asarray(g, dtype=float).reshape(4, 4)
        if self.translate is not None:
            g = g @ np.asarray(self.translate).reshape(4, 4)
        return replace(self, translate=tuple(g.reshape(16)))

    def left_translated(self, gamma) -> "Window":
        """w_g for left multiplication by a 2x2 matrix gamma."""
        return self.translated(sl2.left_mult_matrix(gamma))

    def _base(self, x: np.ndarray, form: QuaternaryForm | None) -> np.ndarray:
        c = np.asarray(self.center)
        if self.amplitude == 0:
            return np.zeros(x.shape[0])
        if self.kind == "radial-bump":
            val = bump(np.linalg.norm(x - c, axis=1) / self.R)
        elif self.kind == "annular-bump":
            if form is None:
                raise FormError("the annular window needs the form N")
            val = bump(np.linalg.norm(x - c, axis=1) / self.R)
            val = val * bump(np.abs(form.values(x) - 1.0) / self.delta)
        elif self.kind == "indicator-box":
            val = np.all(np.abs(x - c) <= self.R, axis=1).astype(float)
        else:
            rel = sl2.matmul(sl2.inverse(c), x)
            val = (sl2.log_norm(rel) <= self.R).astype(float)
        return self.amplitude * val

    def _pullback(self, x: np.ndarray) -> np.ndarray:
        if self.translate is None:
            return x
        ginv = np.linalg.inv(np.asarray(self.translate).reshape(4, 4))
        rounded = np.rint(ginv)
        if np.all(np.abs(ginv - rounded) < 1e-9):
            ginv = rounded
        return x @ ginv.T

    def __call__(self, x, form: QuaternaryForm | None = None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self._base(self._pullback(x), form)

    def weights(self, points: np.ndarray, h: int, form: QuaternaryForm | None = None) -> np.ndarray:
        """w(h^-1 x) for integer points x; the translate acts before scaling."""
        if len(points) == 0:
            return np.zeros(0)
        y = self._pullback(np.asarray(points, dtype=float)) / h
        return self._base(y, form)

    def bounding_box(self) -> list[tuple[float, float]]:
        c = np.asarray(self.center)
        if self.kind == "indicator-ball":
            rows = sl2.as_matrix(c)
            grow = math.expm1(self.R)
            half = np.array([np.linalg.norm(rows[i // 2]) * grow for i in range(4)])
        else:
            half = np.full(4, float(self.R))
        if self.translate is not None:
            g = np.asarray(self.translate).reshape(4, 4)
            c, half = g @ c, np.abs(g) @ half
        return [(float(a - b), float(a + b)) for a, b in zip(c, half)]


@dataclass
class SolutionSet:
    form: QuaternaryForm
    h: int | None
    cc: CongruenceClass
    box: list[tuple[float, float]]
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.points)

    def as_set(self) -> set[tuple[int, ...]]:
        return set(self)


def _axis(lo: float, hi: float, modulus: int, residue: int) -> np.ndarray:
    a = math.ceil(lo - 1e-9)
    b = math.floor(hi + 1e-9)
    first = a + (residue - a) % modulus
    return np.arange(first, b + 1, modulus, dtype=np.int64)


def _axes(box, cc: CongruenceClass) -> list[np.ndarray]:
    if len(box) != 4:
        raise FormError("box needs four intervals")
    for lo, hi in box:
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise FormError("box must be bounded")
    return [_axis(lo, hi, cc.modulus, r) for (lo, hi), r in zip(box, cc.residue)]


def _guard_overflow(F: QuaternaryForm, axes, h: int) -> None:
    m = max((max(abs(int(a[0])), abs(int(a[-1]))) for a in axes if len(a)), default=0)
    if 10 * max(abs(c) for c in F.coeffs) * m * m + h * h >= 2**62:
        raise FormError("box too large for 64-bit enumeration")


def _lexsort(points: np.ndarray) -> np.ndarray:
    if len(points) == 0:
        return points.reshape(0, 4)
    order = np.lexsort(points.T[::-1])
    return points[order]


def enumerate_solutions(F: QuaternaryForm, h: int, cc: CongruenceClass, box,
                        work_bound: int | None = None) -> SolutionSet:
    """All integer x in the box with N(x) = h^2 and x = xi (mod l), sorted."""
    sols = represent(F, h * h, cc, box, work_bound)
    sols.h = h
    return sols


def represent(F: QuaternaryForm, target: int, cc: CongruenceClass, box,
              work_bound: int | None = None) -> SolutionSet:
    """All integer x in the box with N(x) = target and x = xi (mod l), sorted."""
    axes = _axes(box, cc)
    _guard_overflow(F, axes, math.isqrt(abs(target)) + 1)
    split = F.split
    if split is None:
        return _enumerate_fallback(F, target, cc, box, axes, work_bound)
    (i, j), (k, l) = split
    n1 = len(axes[i]) * len(axes[j])
    n2 = len(axes[k]) * len(axes[l])
    check_work(n1 + n2, work_bound, "enumerate_solutions")
    ai, aj = (g.reshape(-1) for g in np.meshgrid(axes[i], axes[j], indexing="ij"))
    ak, al = (g.reshape(-1) for g in np.meshgrid(axes[k], axes[l], indexing="ij"))
    v1 = F.pair_values((i, j), ai, aj)
    v2 = F.pair_values((k, l), ak, al)
    order = np.argsort(v2, kind="stable")
    v2s = v2[order]
    need = target - v1
    lo = np.searchsorted(v2s, need, side="left")
    hi = np.searchsorted(v2s, need, side="right")
    cnt = hi - lo
    total = int(cnt.sum())
    idx1 = np.repeat(np.arange(len(v1)), cnt)
    starts = np.repeat(lo - (np.cumsum(cnt) - cnt), cnt)
    idx2 = order[starts + np.arange(total)]
    pts = np.empty((total, 4), dtype=np.int64)
    pts[:, i], pts[:, j] = ai[idx1], aj[idx1]
    pts[:, k], pts[:, l] = ak[idx2], al[idx2]
    return SolutionSet(F, None, cc, list(box), _lexsort(pts))


def _enumerate_fallback(F, target, cc, box, axes, work_bound) -> SolutionSet:
    """Loop over three coordinates and solve the quadratic in the fourth."""
    check_work(len(axes[0]) * len(axes[1]) * len(axes[2]), work_bound, "enumerate_solutions")
    cf = dict(zip(((a, b) for a in range(4) for b in range(a, 4)), F.coeffs))
    x1, x2, x3 = (g.reshape(-1) for g in np.meshgrid(axes[0], axes[1], axes[2], indexing="ij"))
    a = cf[(3, 3)]
    b = cf[(0, 3)] * x1 + cf[(1, 3)] * x2 + cf[(2, 3)] * x3
    trip = np.stack([x1, x2, x3, np.zeros_like(x1)], axis=1)
    c = F.values(trip) - target
    cands = []
    if a != 0:
        disc = b.astype(float) ** 2 - 4.0 * a * c.astype(float)
        ok = disc >= 0
        root = np.sqrt(np.where(ok, disc, 0))
        for sign in (1, -1):
            for shift in (-1, 0, 1):
                cands.append((np.rint((-b + sign * root) / (2 * a)).astype(np.int64) + shift, ok))
    else:
        nz = b != 0
        q = np.where(nz, -c // np.where(nz, b, 1), 0)
        cands.append((q, nz))
        deg = (b == 0) & (c == 0)
        for v in axes[3]:
            cands.append((np.full_like(x1, v), deg))
    found = []
    lo4, hi4 = axes[3][0] if len(axes[3]) else 0, axes[3][-1] if len(axes[3]) else -1
    for x4, mask in cands:
        good = mask & (a * x4 * x4 + b * x4 + c == 0) & (x4 >= lo4) & (x4 <= hi4)
        good &= (x4 - cc.residue[3]) % cc.modulus == 0
        if good.any():
            found.append(np.stack([x1[good], x2[good], x3[good], x4[good]], axis=1))
    pts = np.unique(np.concatenate(found), axis=0) if found else np.zeros((0, 4), dtype=np.int64)
    return SolutionSet(F, None, cc, list(box), _lexsort(pts.astype(np.int64)))


def enumerate_naive(F: QuaternaryForm, h: int | None, cc: CongruenceClass, box,
                    target: int | None = None) -> SolutionSet:
    """Reference enumeration over the full grid (small boxes only)."""
    axes = _axes(box, cc)
    grid = np.stack([g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    pts = grid[F.values(grid) == (h * h if target is None else target)]
    return SolutionSet(F, h, cc, list(box), _lexsort(pts))


def scaled_box(w: Window, h: int) -> list[tuple[float, float]]:
    return [(h * lo, h * hi) for lo, hi in w.bounding_box()]


def weighted_count(F: QuaternaryForm, h: int, cc: CongruenceClass, w: Window,
                   exact: bool = False, work_bound: int | None = None):
    """Sum of w(h^-1 x) over solutions of N(x) = h^2 in the class.

    Returns a float (correctly rounded sum) or, with ``exact``, the exact
    rational sum of the floating weights.
    """
    if w.amplitude == 0:
        return Fraction(0) if exact else 0.0
    sols = enumerate_solutions(F, h, cc, scaled_box(w, h), work_bound)
    vals = w.weights(sols.points, h, F)
    if exact:
        return sum((Fraction(float(v)) for v in vals), Fraction(0))
    return math.fsum(vals)


def partition_additivity_check(F: QuaternaryForm, h: int, ell: int, w: Window) -> bool:
    """Counts over all residue classes mod l add up to the unconstrained count."""
    total = Fraction(0)
    grid = np.stack(np.meshgrid(*[np.arange(ell)] * 4, indexing="ij"), axis=-1).reshape(-1, 4)
    for xi in grid:
        total += weighted_count(F, h, CongruenceClass(ell, tuple(int(v) for v in xi)), w, exact=True)
    return total == weighted_count(F, h, CongruenceClass(), w, exact=True)


def parse_box(items: Sequence[float]) -> list[tuple[float, float]]:
    if len(items) == 2:
        return [(float(items[0]), float(items[1]))] * 4
    if len(items) == 8:
        return [(float(items[2 * i]), float(items[2 * i + 1])) for i in range(4)]
    raise FormError("box needs 2 or 8 numbers")
