import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quadrix.padic import (averaging_residual, ball_volume, hecke_eigenvalue, hermite_cell_count,
                           operator_norm_complementary, shell_volume, spherical_value,
                           spherical_values, tempered_reference, weak_lower_average)

primes = st.sampled_from([2, 3, 5, 7])


def test_ball_volume_examples():
    for p in (2, 3, 5):
        assert ball_volume(p, 0).total == 1
    assert ball_volume(2, 1).total == 7
    assert ball_volume(3, 2).total == 121
    assert ball_volume(3, 2).shells == (1, 12, 108)


def test_shell_volumes_match_coset_count():
    for p in (2, 3, 5):
        for j in range(5):
            assert hermite_cell_count(p, j) == shell_volume(p, j)


@given(primes, st.integers(0, 12))
def test_ball_volume_invariants(p, s):
    prof = ball_volume(p, s)
    assert prof.shells[0] == 1 and all(v > 0 for v in prof.shells)
    assert prof.total == sum(prof.shells) == 1 + p * (p ** (2 * s) - 1) // (p - 1)
    assert ball_volume(p, s + 1).total > prof.total
    # h^2 <= total <= p/(p-1) h^2
    h2 = p ** (2 * s)
    assert h2 <= prof.total <= Fraction(p, p - 1) * h2
    if s >= 1:
        assert ball_volume(p, s + 1).total <= (p * p + p) * prof.total


def test_spherical_examples():
    for p in (2, 3):
        for s in (0.0, 0.3, 0.7):
            assert spherical_value(p, s, 0) == 1
            assert spherical_value(p, s, 1) == pytest.approx(hecke_eigenvalue(p, s))
        assert all(v == pytest.approx(1.0) for v in spherical_values(p, 1.0, 12))
    with pytest.raises(ValueError):
        spherical_value(2, 1.0, 3)
    with pytest.raises(ValueError):
        spherical_value(2, -0.1, 3)


@given(primes, st.floats(0.0, 0.99))
def test_recursion_consistency(p, s):
    f = spherical_values(p, s, 30)
    assert averaging_residual(p, f, hecke_eigenvalue(p, s)) < 1e-12


@given(primes, st.floats(0.01, 0.95))
def test_spherical_bounds_and_shape(p, s):
    f = spherical_values(p, s, 40)
    assert all(0 < v <= 1 + 1e-15 for v in f)
    scaled = [v * p ** (j * (1 - s)) for j, v in enumerate(f)]
    assert min(scaled) > 0.2
    assert max(sc / (1 + j) for j, sc in enumerate(scaled)) < 2 / (1 - p ** (-2 * s)) + 1


def test_tempered_endpoint_shape():
    for p in (2, 3):
        f = spherical_values(p, 0.0, 40)
        scaled = [v * p ** j for j, v in enumerate(f)]
        assert min(scaled) >= 1 - 1e-12
        assert max(sc / (1 + j) for j, sc in enumerate(scaled)) <= 1 + 1e-12


def test_exact_mode_matches_floats():
    for p in (2, 3):
        for t, s in ((Fraction(1), 0.0), (Fraction(p), 1.0), (Fraction(3, 2), math.log(1.5, p))):
            exact = spherical_values(p, None, 15, exact_t=t)
            assert all(isinstance(v, Fraction) for v in exact)
            assert [float(v) for v in exact] == pytest.approx(spherical_values(p, s, 15), rel=1e-10)
            assert float(operator_norm_complementary(p, None, 6, exact_t=t)) == pytest.approx(
                operator_norm_complementary(p, s, 6), rel=1e-10)


def test_operator_norm_examples():
    for p in (2, 3):
        assert operator_norm_complementary(p, 0.4, 0) == 1
        assert all(operator_norm_complementary(p, 1.0, k) == pytest.approx(1.0) for k in range(8))
    scaled = [operator_norm_complementary(2, 0.5, k) * ball_volume(2, k).total ** 0.25 for k in range(1, 11)]
    # regression band recorded from direct evaluation: [1.4506, 2.0287]
    assert 1.4 <= min(scaled) and max(scaled) <= 2.1


def test_operator_norm_uniform_band():
    for p in (2, 3):
        for s in (0.1, 0.3, 0.5, 0.7, 0.9):
            vals = [operator_norm_complementary(p, s, k) * ball_volume(p, k).total ** ((1 - s) / 2)
                    for k in range(1, 13)]
            assert 0.1 < min(vals) and max(vals) < 10 / s


def test_weak_lower_average():
    assert weak_lower_average(2, 0) == 1
    assert weak_lower_average(2, 5) == Fraction(94, 2047)
    assert float(weak_lower_average(2, 5)) * math.sqrt(ball_volume(2, 5).total) == pytest.approx(2.0776334664, rel=1e-9)
    for p in (2, 3, 5):
        vals = [weak_lower_average(p, k) for k in range(12)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        for k, v in enumerate(vals):
            scaled = float(v) * math.sqrt(ball_volume(p, k).total)
            assert 0.5 <= scaled <= 2 * (1 + k * math.log(p))


def test_tempered_reference():
    assert tempered_reference(1, 0.3) == 1
    assert tempered_reference(4, 0) == 0.5
    assert tempered_reference(100, 0.1) == pytest.approx(100 ** -0.4)
    with pytest.raises(ValueError):
        tempered_reference(0.5, 0)
