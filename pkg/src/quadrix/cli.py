"""Command-line front end.  Each subcommand validates its parameters, calls
one library entry point and serialises the result (CSV for ladders, JSON for
single reports) behind a metadata header.

Exit codes: 1 invalid configuration, 2 work bound exceeded, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from ._config import NonConvergence, WorkBoundExceeded, work_bound
from .forms import CongruenceClass, FormError, get_form

EXIT_CONFIG, EXIT_WORK, EXIT_CONVERGENCE = 1, 2, 3


class ConfigError(ValueError):
    pass


def fmt_rational(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def fmt_float(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------- configuration

_COMMON = {"threads", "work_bound", "seed", "out"}
SCHEMA = {
    "count": {"form", "h", "modulus", "residue", "window"},
    "sks": {"form", "k_max", "h", "modulus", "residue", "c"},
    "densities": {"form", "modulus", "residue", "h", "q_max", "e_max"},
    "maintermscan": {"form", "p", "s_max", "window", "modulus", "q_max"},
    "spectral": {"p", "s", "height_max", "eps"},
    "exponents": {"family", "n_max"},
    "discrepancy": {"p", "s_max", "modulus", "r", "samples"},
    "proxy": {"p", "window", "s_max", "samples", "modulus"},
    "selftest": set(),
}


@dataclass
class ExperimentConfig:
    command: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in SCHEMA:
            raise ConfigError(f"unknown command {self.command!r}")
        allowed = SCHEMA[self.command] | _COMMON
        unknown = set(self.params) - allowed
        if unknown:
            raise ConfigError(f"unknown keys for {self.command}: {sorted(unknown)}")
        self.validate()

    def get(self, key, default=None):
        v = self.params.get(key)
        return default if v is None else v

    def _positive(self, *keys, allow_zero=False):
        for k in keys:
            v = self.params.get(k)
            if v is not None and (v < 0 or (v == 0 and not allow_zero)):
                raise ConfigError(f"{k} must be {'nonnegative' if allow_zero else 'positive'}")

    def validate(self):
        p = self.params
        self._positive("h", "modulus", "k_max", "q_max", "p", "s_max", "height_max", "samples",
                       "n_max", "e_max", "work_bound", "threads")
        if p.get("form") is not None:
            try:
                get_form(p["form"])
            except FormError as exc:
                raise ConfigError(str(exc)) from None
        if p.get("window") is not None:
            from .enumeration import Window
            try:
                Window.parse(p["window"])
            except (FormError, ValueError) as exc:
                raise ConfigError(str(exc)) from None
        for key in ("residue", "c"):
            if p.get(key) is not None and len(p[key]) != 4:
                raise ConfigError(f"{key} needs four integers")
        if p.get("s") is not None and not 0 <= p["s"] < 1:
            raise ConfigError("s must lie in [0, 1)")
        if p.get("r") is not None and not 0 < p["r"] <= 1:
            raise ConfigError("r must lie in (0, 1]")
        if p.get("family") is not None and p["family"] not in ("sl", "sp", "so"):
            raise ConfigError("family must be sl, sp or so")
        if p.get("p") is not None:
            from sympy import isprime
            if not isprime(p["p"]):
                raise ConfigError("p must be prime")
            if p.get("modulus") and math.gcd(p["p"], p["modulus"]) != 1:
                raise ConfigError("p must be coprime to the modulus")


# ---------------------------------------------------------------- output

def metadata(cfg: ExperimentConfig, **extra) -> dict:
    meta = {"command": cfg.command, "version": __version__,
            "seed": cfg.get("seed", 0), "threads": cfg.get("threads", 1),
            "work_bound": work_bound(cfg.get("work_bound"))}
    if cfg.get("form") is not None:
        F = get_form(cfg.params["form"])
        meta.update(form=F.name, order=F.order, coeffs=",".join(map(str, F.coeffs)))
    meta.update(extra)
    return meta


def render_csv(meta: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def render_json(meta: dict, body: dict) -> str:
    return json.dumps({"metadata": meta, **body}, indent=2, sort_keys=False) + "\n"


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands

def _class(cfg, h=None) -> CongruenceClass:
    ell = cfg.get("modulus", 1)
    res = cfg.get("residue")
    if res is None:
        res = (h or 0, 0, 0, h or 0)
    return CongruenceClass(ell, tuple(res))


def cmd_count(cfg):
    from .enumeration import Window, weighted_count
    F = get_form(cfg.get("form", "det4"))
    h = cfg.get("h", 1)
    cc = _class(cfg, h)
    w = Window.parse(cfg.get("window", "annular:R=2"))
    t0 = time.perf_counter()
    value = weighted_count(F, h, cc, w, work_bound=cfg.get("work_bound"))
    ms = (time.perf_counter() - t0) * 1000
    body = {"form": F.name, "h": h, "modulus": cc.modulus, "residue": list(cc.residue),
            "window": w.describe(), "count": fmt_float(value), "wall_time_ms": round(ms, 3)}
    return render_json(metadata(cfg, normalization="sum of w(x/h) over solutions"), body)


def cmd_sks(cfg):
    from .expsums import s_k_direct
    F = get_form(cfg.get("form", "det4"))
    h = cfg.get("h", 1)
    cc = _class(cfg, h)
    c = tuple(cfg.get("c", (0, 0, 0, 0)))
    rows = []
    for k in range(1, cfg.get("k_max", 1) + 1):
        v = s_k_direct(F, k, cc, c, h, cfg.get("work_bound")).value
        rows.append([k, fmt_float(v.real), fmt_float(v.imag), fmt_float(abs(v)), fmt_float(abs(v) / k ** 3)])
    meta = metadata(cfg, h=h, modulus=cc.modulus, residue=",".join(map(str, cc.residue)),
                    c=",".join(map(str, c)))
    return render_csv(meta, ["k", "re", "im", "abs", "bound_ratio"], rows)


def cmd_densities(cfg):
    from .densities import sigma_finite
    F = get_form(cfg.get("form", "det4"))
    h = cfg.get("h", 1)
    cc = _class(cfg, h)
    sf = sigma_finite(F, cc, h, cfg.get("q_max", 50), cfg.get("e_max"))
    factors = {str(q): {"sigma_q": fmt_rational(d.limit), "ladder": [fmt_rational(x) for x in d.ladder],
                        "stabilized": d.stabilized, "method": d.method}
               for q, d in sf.factors.items()}
    body = {"h": h, "modulus": cc.modulus, "residue": list(cc.residue),
            "sigma_f": fmt_float(sf.value), "sigma_f_exact": fmt_rational(sf.exact),
            "tail_interval": [fmt_float(x) for x in sf.tail_interval], "tail_kind": sf.tail_kind,
            "factors": factors}
    return render_json(metadata(cfg, normalization="sigma_q = lim q^-3e #solutions mod q^(e+s)"), body)


def cmd_maintermscan(cfg):
    from .densities import fit_slope, main_term_and_error
    from .enumeration import Window
    F = get_form(cfg.get("form", "det4"))
    p = cfg.get("p", 2)
    w = Window.parse(cfg.get("window", "annular:R=2"))
    ell = cfg.get("modulus", 1)
    hs = [p ** s for s in range(1, cfg.get("s_max", 5) + 1)]
    rows = []
    sig = None
    for h in hs:
        rep = main_term_and_error(F, CongruenceClass(ell, (h, 0, 0, h)), w, [h], cfg.get("q_max", 1000),
                                  sigma_inf=sig, work_bound=cfg.get("work_bound"))
        sig = rep.sigma_inf
        r = rep.rows[0]
        rows.append([h, fmt_float(r.count), fmt_float(r.main), fmt_float(r.error), fmt_float(r.ratio)])
    slope_rep = fit_slope(hs, [abs(float(r[3])) for r in rows])
    meta = metadata(cfg, window=w.describe(), modulus=ell, residue="h,0,0,h", sigma_inf=fmt_float(sig),
                    error_slope=fmt_float(slope_rep),
                    normalization="main = l^-4 sigma_inf sigma_f h^2; sigma_f uses sigma_f(N, xi, h)")
    return render_csv(meta, ["h", "count", "main", "error", "ratio"], rows)


def cmd_spectral(cfg):
    from .padic import ball_volume, operator_norm_complementary, tempered_reference, weak_lower_average
    p, s = cfg.get("p", 2), cfg.get("s", 0.5)
    eps = cfg.get("eps", 0.0)
    rows = []
    for k in range(cfg.get("height_max", 10) + 1):
        mB = ball_volume(p, k).total
        norm = operator_norm_complementary(p, s, k)
        rows.append([k, mB, fmt_float(norm), fmt_float(norm * mB ** ((1 - s) / 2)),
                     fmt_float(tempered_reference(mB, eps)), fmt_rational(weak_lower_average(p, k))])
    meta = metadata(cfg, p=p, s=s, eps=eps, normalization="m_p(K) = 1; delta^(1/2)(a_j) = p^-j")
    return render_csv(meta, ["s_height", "m_B", "norm", "norm_scaled", "tempered_ref", "weak_avg"], rows)


_FAMILY_START = {"sl": 3, "sp": 2, "so": 4}


def cmd_exponents(cfg):
    from .exponents import family, norm_lower_exponent
    fam = cfg.get("family", "sl")
    rows = []
    for n in range(_FAMILY_START[fam], cfg.get("n_max", 6) + 1):
        rep = norm_lower_exponent(*family(fam, n))
        rows.append([fam, n, fmt_rational(rep.alpha_G), fmt_rational(rep.alpha_L), fmt_rational(rep.exponent)])
    return render_csv(metadata(cfg), ["family", "n", "alpha_G", "alpha_L", "exponent"], rows)


def cmd_discrepancy(cfg):
    from .discrepancy import mean_square_discrepancy
    p, ell, r = cfg.get("p", 2), cfg.get("modulus", 1), cfg.get("r", 0.4)
    rep = mean_square_discrepancy(p, list(range(1, cfg.get("s_max", 5) + 1)), ell, r,
                                  cfg.get("samples", 2000), cfg.get("seed", 0))
    rows = [[row.s, row.h, fmt_float(row.E), fmt_float(row.ci[0]), fmt_float(row.ci[1]),
             fmt_float(row.bound), "" if row.kappa_fit is None else fmt_float(row.kappa_fit)]
            for row in rep.rows]
    meta = metadata(cfg, p=p, modulus=ell, r=r, m_inf=fmt_float(rep.m_inf),
                    bound_label="conditional bound",
                    normalization="Haar = Leray measure / zeta(2); m_p(K) = 1")
    return render_csv(meta, ["s", "h", "E", "CI_lo", "CI_hi", "bound", "kappa_fit_so_far"], rows)


def cmd_proxy(cfg):
    from .discrepancy import smooth_proxy_decay
    from .enumeration import Window
    p, ell = cfg.get("p", 2), cfg.get("modulus", 1)
    w = Window.parse(cfg.get("window", "bump:R=0.3"))
    rep = smooth_proxy_decay(p, ell, w, range(1, cfg.get("s_max", 6) + 1), cfg.get("samples", 500),
                             cfg.get("seed", 0))
    rows = [[s, mB, fmt_float(v)] for s, mB, v in rep.rows]
    meta = metadata(cfg, p=p, modulus=ell, window=rep.window, sigma_inf=fmt_float(rep.sigma_inf),
                    sigma_fit=fmt_float(rep.sigma_fit) if rep.sigma_fit is not None else "",
                    reference_isotropic="1/16", reference_anisotropic="1/4")
    return render_csv(meta, ["s", "m_B", "rms"], rows)


def cmd_selftest(cfg):
    from .densities import sigma_q
    from .exponents import family, norm_lower_exponent
    from .expsums import s_k_direct, s_k_multiplicative
    from .forms import CATALOG
    det4 = CATALOG["det4"]
    checks = {
        "S_2(det4) = -4": s_k_direct(det4, 2, CongruenceClass(), (0,) * 4, 1).real_integer == -4,
        "S_12 multiplicative": s_k_direct(det4, 12, CongruenceClass(), (1, 0, 0, 0), 1).exact
        == s_k_multiplicative(det4, 12, CongruenceClass(), (1, 0, 0, 0), 1).exact,
        "sigma_2(h=2) = 21/16": sigma_q(det4, 2, CongruenceClass(), 2).limit == Fraction(21, 16),
        "SL_3 exponent -2/3": norm_lower_exponent(*family("sl", 3)).exponent == Fraction(-2, 3),
    }
    lines = [f"{'PASS' if ok else 'FAIL'} {name}\n" for name, ok in checks.items()]
    if not all(checks.values()):
        raise SelfTestFailed("".join(lines))
    return "".join(lines)


class SelfTestFailed(RuntimeError):
    pass


COMMANDS = {"count": cmd_count, "sks": cmd_sks, "densities": cmd_densities,
            "maintermscan": cmd_maintermscan, "spectral": cmd_spectral, "exponents": cmd_exponents,
            "discrepancy": cmd_discrepancy, "proxy": cmd_proxy, "selftest": cmd_selftest}


def run(cfg: ExperimentConfig) -> str:
    return COMMANDS[cfg.command](cfg)


# ---------------------------------------------------------------- argument parsing

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    keep = argparse.SUPPRESS
    common.add_argument("--threads", type=int, default=keep)
    common.add_argument("--work-bound", type=int, default=keep)
    common.add_argument("--seed", type=int, default=keep)
    common.add_argument("--out", default=keep)
    parser = _Parser(prog="quadrix", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, **args):
        sp = sub.add_parser(name, parents=[common])
        for flag, kw in args.items():
            sp.add_argument("--" + flag.replace("_", "-"), dest=flag, **kw)
        return sp

    form = dict(type=str)
    add("count", form=form, h=dict(type=int), modulus=dict(type=int), residue=dict(type=_ints),
        window=dict(type=str))
    add("sks", form=form, k_max=dict(type=int), h=dict(type=int), modulus=dict(type=int),
        residue=dict(type=_ints), c=dict(type=_ints))
    add("densities", form=form, modulus=dict(type=int), residue=dict(type=_ints), h=dict(type=int),
        q_max=dict(type=int), e_max=dict(type=int))
    add("maintermscan", form=form, p=dict(type=int), s_max=dict(type=int), window=dict(type=str),
        modulus=dict(type=int), q_max=dict(type=int))
    add("spectral", p=dict(type=int), s=dict(type=float), height_max=dict(type=int), eps=dict(type=float))
    add("exponents", family=dict(type=str), n_max=dict(type=int))
    add("discrepancy", p=dict(type=int), s_max=dict(type=int), modulus=dict(type=int), r=dict(type=float),
        samples=dict(type=int))
    add("proxy", p=dict(type=int), window=dict(type=str), s_max=dict(type=int), samples=dict(type=int),
        modulus=dict(type=int))
    add("selftest")
    return parser


def config_from_args(argv) -> ExperimentConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    params = {k: v for k, v in ns.items() if v is not None}
    if command in ("sks",) and "k_max" not in params:
        params["k_max"] = 20
    return ExperimentConfig(command, params)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    saved = os.environ.get("QUADRIX_WORK_BOUND")
    try:
        cfg = config_from_args(argv)
        if cfg.get("work_bound") is not None:
            os.environ["QUADRIX_WORK_BOUND"] = str(cfg.params["work_bound"])
        text = run(cfg)
        emit(text, cfg.get("out"))
    except (ConfigError, FormError) as exc:
        print(f"quadrix: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WorkBoundExceeded as exc:
        print(f"quadrix: {exc}", file=sys.stderr)
        return EXIT_WORK
    except NonConvergence as exc:
        print(f"quadrix: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except SelfTestFailed as exc:
        print(str(exc), file=sys.stderr, end="")
        return EXIT_CONFIG
    finally:
        if saved is None:
            os.environ.pop("QUADRIX_WORK_BOUND", None)
        else:
            os.environ["QUADRIX_WORK_BOUND"] = saved
    return 0


if __name__ == "__main__":
    sys.exit(main())
