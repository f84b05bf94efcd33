import csv
import io
import json
from fractions import Fraction

import pytest

from quadrix.cli import ConfigError, ExperimentConfig, main
from quadrix.densities import sigma_finite
from quadrix.enumeration import Window, weighted_count
from quadrix.exponents import family, norm_lower_exponent
from quadrix.expsums import s_k_direct
from quadrix.forms import CATALOG, CongruenceClass
from quadrix.padic import operator_norm_complementary


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def body(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


def header(text):
    return dict(l[2:].split(": ", 1) for l in text.splitlines() if l.startswith("# "))


def test_exit_codes(capsys):
    assert run(capsys, "sks", "--k-max", "0")[0] == 1
    assert run(capsys, "count", "--bogus", "1")[0] == 1
    assert run(capsys, "count", "--form", "nope")[0] == 1
    assert run(capsys, "spectral", "--s", "1.5")[0] == 1
    assert run(capsys, "discrepancy", "--p", "2", "--modulus", "2")[0] == 1
    assert run(capsys, "count", "--h", "64", "--work-bound", "10")[0] == 2
    assert run(capsys, "densities", "--e-max", "2", "--q-max", "5")[0] == 3


def test_work_bound_flag_does_not_leak(capsys):
    run(capsys, "count", "--h", "64", "--work-bound", "10")
    assert run(capsys, "count", "--h", "4")[0] == 0


def test_exponents_table(capsys):
    code, out, _ = run(capsys, "exponents", "--family", "sl", "--n-max", "4")
    assert code == 0
    rows = body(out)
    assert [r["exponent"] for r in rows] == ["-2/3", "-1/2"]
    for r in rows:
        rep = norm_lower_exponent(*family("sl", int(r["n"])))
        assert Fraction(r["alpha_G"]) == rep.alpha_G and Fraction(r["alpha_L"]) == rep.alpha_L


def test_sks_matches_library(capsys):
    code, out, _ = run(capsys, "sks", "--form", "det4", "--k-max", "12", "--h", "4", "--c", "1,0,0,0")
    assert code == 0
    meta = header(out)
    assert meta["form"] == "det4" and "version" in meta and "seed" in meta
    for r in body(out):
        k = int(r["k"])
        v = s_k_direct(CATALOG["det4"], k, CongruenceClass(1, (0, 0, 0, 0)), (1, 0, 0, 0), 4).value
        assert float(r["re"]) == v.real and float(r["im"]) == v.imag


def test_count_json(capsys, tmp_path):
    out = tmp_path / "counts.json"
    code, _, _ = run(capsys, "count", "--form", "det4", "--h", "16", "--modulus", "2",
                     "--residue", "0,0,0,0", "--window", "annular:R=2", "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    for key in ("form", "h", "modulus", "residue", "window", "count", "wall_time_ms", "metadata"):
        assert key in data
    expected = weighted_count(CATALOG["det4"], 16, CongruenceClass(2, (0, 0, 0, 0)), Window.parse("annular:R=2"))
    assert float(data["count"]) == expected


def test_densities_matches_library(capsys):
    code, out, _ = run(capsys, "densities", "--form", "det4", "--modulus", "2", "--residue", "1,0,0,1",
                       "--h", "5", "--q-max", "20")
    assert code == 0
    data = json.loads(out)
    sf = sigma_finite(CATALOG["det4"], CongruenceClass(2, (1, 0, 0, 1)), 5, 20)
    assert Fraction(data["sigma_f_exact"]) == sf.exact
    assert data["factors"]["2"]["sigma_q"] == "2"
    assert "heuristic" in data["tail_kind"]


def test_spectral_matches_library(capsys):
    code, out, _ = run(capsys, "spectral", "--p", "3", "--s", "0.25", "--height-max", "5")
    assert code == 0
    for r in body(out):
        assert float(r["norm"]) == operator_norm_complementary(3, 0.25, int(r["s_height"]))


def test_repeat_runs_are_byte_identical(capsys, tmp_path):
    args = ["discrepancy", "--p", "3", "--s-max", "2", "--modulus", "2", "--r", "0.4", "--samples", "50",
            "--seed", "7"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    meta = header(a.read_text())
    assert meta["seed"] == "7" and meta["bound_label"] == "conditional bound"


def test_proxy_and_maintermscan(capsys):
    code, out, _ = run(capsys, "proxy", "--p", "2", "--window", "bump:R=0.3", "--s-max", "3", "--samples", "10",
                       "--seed", "1")
    assert code == 0 and len(body(out)) == 3 and header(out)["reference_isotropic"] == "1/16"
    code, out, _ = run(capsys, "maintermscan", "--form", "det4", "--p", "2", "--s-max", "3",
                       "--window", "annular:R=2")
    assert code == 0
    rows = body(out)
    assert [int(r["h"]) for r in rows] == [2, 4, 8]
    assert all(float(r["main"]) > 0 for r in rows)


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and out.count("PASS") == 4


def test_experiment_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig("count", {"colour": "red"})
    with pytest.raises(ConfigError):
        ExperimentConfig("launch", {})
    with pytest.raises(ConfigError):
        ExperimentConfig("count", {"h": -1})
    with pytest.raises(ConfigError):
        ExperimentConfig("count", {"window": "hexagon:R=1"})
    with pytest.raises(ConfigError):
        ExperimentConfig("spectral", {"p": 4})
    assert ExperimentConfig("count", {"h": 2, "seed": 3}).get("h") == 2
