import time

import numpy as np
import pytest

from sorkinsim.recipes import Born, SorkinDeformed
from sorkinsim.slits import SlitField, field_from_dft, subset_amplitudes
from sorkinsim.sorkin import (
    interference_naive,
    interference_spectrum_fast,
    mobius_transform,
    popcounts,
    sum_rule_report,
)


def born_table(field, k):
    return np.abs(subset_amplitudes(field)[:, k]) ** 2


def test_popcounts():
    assert popcounts(3).tolist() == [0, 1, 1, 2, 1, 2, 2, 3]


def test_naive_two_slits_cross_term():
    a, b = 0.3 + 0.2j, -0.1 + 0.4j
    P = [0, abs(a) ** 2, abs(b) ** 2, abs(a + b) ** 2]
    assert interference_naive(P, 0b11) == pytest.approx(2 * np.real(a * np.conj(b)), abs=1e-15)


def test_naive_matches_written_out_three_term():
    rng = np.random.default_rng(3)
    P = np.concatenate([[0], rng.random(7)])
    A, B, C = 1, 2, 4
    expected = P[A | B | C] - P[A | B] - P[A | C] - P[B | C] + P[A] + P[B] + P[C]
    assert interference_naive(P, 7) == pytest.approx(expected, abs=1e-15)
    assert interference_naive(P, A | B) == pytest.approx(P[A | B] - P[A] - P[B], abs=1e-15)


def test_naive_born_three_slits_vanishes(rng):
    f = SlitField(rng.normal(size=(3, 1)) + 1j * rng.normal(size=(3, 1)))
    assert abs(interference_naive(born_table(f, 0), 7)) < 1e-10


def test_naive_dead_path():
    P = [0, 0.3, 0.0, 0.3]
    assert interference_naive(P, 0b11) == 0.0


def test_naive_errors():
    with pytest.raises(ValueError):
        interference_naive([0, 1], 0)
    with pytest.raises(ValueError):
        interference_naive([0, 1], 0b10, n=1)


def test_fast_two_slits():
    P = [0, 0.2, 0.3, 0.9]
    rep = interference_spectrum_fast(P)
    assert rep.term(0b11) == pytest.approx(0.9 - 0.2 - 0.3)
    assert rep.term(0b01) == 0.2


def test_fast_born_three_slits(rng):
    f = field_from_dft(rng.normal(size=3) + 1j * rng.normal(size=3), 3)
    for k in range(3):
        rep = interference_spectrum_fast(born_table(f, k))
        assert abs(rep.term(7)) < 1e-10


@pytest.mark.parametrize("n", range(1, 11))
def test_fast_matches_naive(n, rng):
    P = rng.random(1 << n)
    P[0] = 0
    fast = mobius_transform(P)
    for T in range(1, 1 << n):
        assert fast[T] == pytest.approx(interference_naive(P, T), abs=1e-10)


def test_fast_singletons_exact(rng):
    P = rng.random(1 << 6)
    P[0] = 0
    rep = interference_spectrum_fast(P)
    for j in range(6):
        assert rep.term(1 << j) == P[1 << j]


def test_fast_errors():
    with pytest.raises(ValueError, match="power-of-two"):
        interference_spectrum_fast([0, 1, 2])
    with pytest.raises(ValueError):
        interference_spectrum_fast([1.0, 0.0])


def test_mobius_multi_column(rng):
    P = rng.random((16, 3))
    P[0] = 0
    out = mobius_transform(P)
    for c in range(3):
        np.testing.assert_allclose(out[:, c], mobius_transform(P[:, c]))


def test_fast_n20_timing():
    P = np.random.default_rng(0).random(1 << 20)
    P[0] = 0
    t0 = time.perf_counter()
    interference_spectrum_fast(P)
    assert time.perf_counter() - t0 < 2.0


def test_sum_rule_born_four_slits(rng):
    f = field_from_dft(rng.normal(size=4) + 1j * rng.normal(size=4))
    rep = sum_rule_report(f, Born())
    assert 3 in rep.vanishing_orders() and 4 in rep.vanishing_orders()
    assert 2 in rep.violated_orders()


def test_sum_rule_epsilon_zero_matches_born(rng):
    f = field_from_dft(rng.normal(size=4) + 1j * rng.normal(size=4))
    np.testing.assert_array_equal(sum_rule_report(f, SorkinDeformed(0.0)).terms, sum_rule_report(f, Born()).terms)


def test_sum_rule_deformed_violates_third_order(rng):
    src = rng.normal(size=3) + 1j * rng.normal(size=3)
    f = field_from_dft(src / np.linalg.norm(src), 3)
    rep = sum_rule_report(f, SorkinDeformed(0.05))
    assert 3 in rep.violated_orders()


def test_sum_rule_single_detector(rng):
    f = field_from_dft(rng.normal(size=3) + 1j * rng.normal(size=3))
    full = sum_rule_report(f)
    one = sum_rule_report(f, k=1)
    np.testing.assert_allclose(one.terms[0], full.terms[1])
    with pytest.raises(IndexError):
        sum_rule_report(f, k=9)
