from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quadrix.forms import (CATALOG, CongruenceClass, FormError, PAdicPoint, QuaternaryForm,
                           bilinear, evaluate_form, f_h, get_form, gram_inverse_times, padic_height)

det4, sq4, indef = CATALOG["det4"], CATALOG["sq4"], CATALOG["indef-2-3"]
vec = st.lists(st.integers(-10**6, 10**6), min_size=4, max_size=4)
forms = st.sampled_from(list(CATALOG.values()))


def test_evaluate_examples():
    assert evaluate_form(det4, (1, 0, 0, 1)) == 1
    assert evaluate_form(det4, (2, 3, 1, 2)) == 1
    assert evaluate_form(sq4, (1, 2, 3, 4)) == 30


def test_f_h_examples():
    assert f_h(det4, (1, 0, 0, 1), 1) == 0
    assert f_h(det4, (2, 0, 0, 2), 2) == 0
    assert f_h(sq4, (1, 1, 1, 1), 1) == 3


def test_gram_inverse_examples():
    assert gram_inverse_times(sq4, (2, 0, 0, 0)) == (2, 0, 0, 0)
    # A has (A y)_4 = y_1 / 2 for det4, so y_1 = 4
    assert gram_inverse_times(det4, (0, 0, 0, 2)) == (4, 0, 0, 0)
    for F in CATALOG.values():
        assert gram_inverse_times(F, (0, 0, 0, 0)) == (0, 0, 0, 0)


def test_isotropy_flags():
    assert det4.iso_real and det4.iso_rational
    assert not sq4.iso_real and not sq4.iso_rational
    assert indef.iso_real and not indef.iso_rational


def test_catalog_and_custom_forms():
    assert get_form("det4") is det4
    assert get_form([0, 0, 0, 1, 0, -1, 0, 0, 0, 0]).coeffs == det4.coeffs
    with pytest.raises(FormError):
        get_form("nonsense")
    with pytest.raises(FormError):
        QuaternaryForm((1, 0, 0, 0, 0, 0, 0, 0, 0, 0))
    for F in CATALOG.values():
        assert F.disc != 0
        assert all((2 * v).denominator == 1 for row in F.gram for v in row)


def test_congruence_class():
    cc = CongruenceClass(3, (4, -1, 0, 7))
    assert cc.residue == (1, 2, 0, 1)
    assert cc.contains((1, 5, 3, -2)) and not cc.contains((0, 5, 3, -2))
    assert CongruenceClass().contains((17, -3, 2, 9))
    assert CongruenceClass(6, (1, 2, 3, 4)).reduce(2).residue == (1, 0, 1, 0)


def test_padic_height_examples():
    assert padic_height(PAdicPoint(2, (1, 0, 0, 1), 0)) == 0
    assert padic_height(PAdicPoint(2, (1, 0, 0, 4), 1)) == 1
    with pytest.raises(ValueError):
        padic_height(PAdicPoint(3, (3, 3, 3, 3), 0))
    with pytest.raises(ValueError):
        PAdicPoint.make(2, (0, 0, 0, 0))


@given(forms, vec)
def test_gram_matches_coefficients(F, x):
    assert bilinear(F, x, x) == evaluate_form(F, x)


@given(forms, vec, vec)
def test_bilinearity(F, x, y):
    s = [a + b for a, b in zip(x, y)]
    assert evaluate_form(F, s) - evaluate_form(F, x) - evaluate_form(F, y) == 2 * bilinear(F, x, y)


@given(forms, vec)
def test_evenness(F, x):
    assert evaluate_form(F, [-v for v in x]) == evaluate_form(F, x)


@given(forms, vec)
def test_gram_inverse_solves(F, c):
    y = gram_inverse_times(F, c)
    assert [sum(F.gram[i][j] * y[j] for j in range(4)) for i in range(4)] == [Fraction(v) for v in c]


nonzero = vec.filter(any)


@settings(max_examples=200)
@given(st.sampled_from([2, 3, 5]), nonzero, st.integers(-3, 3), nonzero, st.integers(-3, 3))
def test_padic_submultiplicative(p, a, s, b, t):
    x, y = PAdicPoint.make(p, a, s), PAdicPoint.make(p, b, t)
    prod = [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
    if not any(prod):
        return
    assert padic_height(x.matmul(y)) <= padic_height(x) + padic_height(y)
