import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quadrix.exponents import (RootDatum, UnboundedPolytope, classical, doubling_check, family,
                               norm_lower_exponent, special_orthogonal, volume_exponent,
                               volume_exponent_vertices, volume_lattice_sum)

BUILTIN = ([classical("A", r) for r in range(1, 7)] + [classical("B", r) for r in range(2, 5)]
           + [classical("C", r) for r in range(2, 6)] + [classical("D", r) for r in range(2, 5)])


def test_volume_exponent_examples():
    assert volume_exponent(classical("A", 1)) == 2
    assert volume_exponent(classical("A", 2)) == 6
    assert volume_exponent(classical("C", 2)) == 6


def test_hand_entered_a2_data():
    # defining weights of SL_3 in simple-root coordinates, scaled by 3
    a2 = classical("A", 2)
    assert sorted(a2.weights) == sorted([(2, 1), (-1, 1), (-1, -2)])
    assert a2.modular == (6, 6)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_sl_exponents(n):
    assert norm_lower_exponent(*family("sl", n)).exponent == Fraction(-2, n)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sp_exponents(n):
    assert norm_lower_exponent(*family("sp", n)).exponent == Fraction(-2, n + 1)


@pytest.mark.parametrize("n", [4, 5, 6, 7, 8, 9])
def test_so_exponents(n):
    expected = Fraction(-2, n) if n % 2 == 0 else Fraction(-2, n - 1)
    assert norm_lower_exponent(*family("so", n)).exponent == expected


def test_report_invariants():
    for fam, ns in (("sl", range(3, 7)), ("sp", range(2, 6)), ("so", range(5, 10))):
        for n in ns:
            rep = norm_lower_exponent(*family(fam, n))
            assert rep.alpha_G > rep.alpha_L > 0
            assert -1 < rep.exponent < 0


@pytest.mark.parametrize("rd", BUILTIN, ids=lambda rd: rd.name)
def test_simplex_matches_vertex_enumeration(rd):
    assert all(m > 0 for m in rd.modular)
    assert all(any(w[i] > 0 for w in rd.weights) for i in range(rd.rank))
    assert volume_exponent(rd) == volume_exponent_vertices(rd)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(BUILTIN[:10]), st.randoms(use_true_random=False),
       st.lists(st.integers(0, 2), min_size=8, max_size=8), st.integers(0, 100))
def test_permutation_and_dominated_weights(rd, rnd, drop, pick):
    weights = list(rd.weights)
    rnd.shuffle(weights)
    base = weights[pick % len(weights)]
    dominated = tuple(v - d for v, d in zip(base, drop))
    shuffled = RootDatum(rd.name, rd.rank, tuple(weights), rd.modular)
    extended = RootDatum(rd.name, rd.rank, tuple(weights) + (dominated,), rd.modular)
    alpha = volume_exponent(rd)
    assert volume_exponent(shuffled) == alpha
    assert volume_exponent(extended) == alpha


def test_unbounded_polytope_rejected():
    rd = RootDatum("open", 2, ((1, 0), (-1, 0)), (1, 1))
    with pytest.raises(UnboundedPolytope):
        volume_exponent(rd)


def test_rank_zero():
    rd = classical("A", 0)
    assert volume_exponent(rd) == 0
    assert volume_lattice_sum(rd, 2, 5) == 1
    assert doubling_check(rd, 2, 4) == 1


def test_lattice_sum_examples():
    a1, a2 = classical("A", 1), classical("A", 2)
    assert volume_lattice_sum(a1, 2, 2) == 21
    # direct rank-2 walk: only t = (0, 0) and (0, 1) lie in D_2, giving 1 + 2^6
    assert volume_lattice_sum(a2, 2, 1) == 65
    for rd in BUILTIN:
        assert volume_lattice_sum(rd, 3, 0) == 1


@pytest.mark.parametrize("rd", [classical("A", 1), classical("A", 2), classical("A", 3), classical("B", 2),
                                classical("C", 2), classical("C", 3), classical("D", 3)], ids=lambda rd: rd.name)
def test_lattice_sum_growth(rd):
    alpha = float(volume_exponent(rd))
    for q in (2, 3, 5):
        for s in (4, 8, 12):
            # a maximising face of positive dimension adds a polynomial factor in s
            slack = rd.rank * (1 + math.log(s + 1, q)) / s
            assert abs(math.log(volume_lattice_sum(rd, q, s), q) / s - alpha) <= slack


def test_doubling():
    a1 = classical("A", 1)
    V = [volume_lattice_sum(a1, 2, s) for s in range(12)]
    assert V[11] / V[10] == pytest.approx(4, rel=1e-3)
    assert doubling_check(a1, 2, 6) == 5
    a2 = classical("A", 2)
    V = [volume_lattice_sum(a2, 2, s) for s in range(12)]
    assert doubling_check(a2, 2, 8) <= 1 + 2 ** 6
    assert V[11] / V[10] == pytest.approx(2 ** 6, rel=1e-6)


def test_family_shapes():
    assert special_orthogonal(5).name == "B2" and special_orthogonal(8).name == "D4"
    with pytest.raises(ValueError):
        family("gl", 3)
