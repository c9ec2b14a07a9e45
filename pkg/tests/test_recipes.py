from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sorkinsim.recipes import (
    Born,
    RecipeOutOfRange,
    SorkinDeformed,
    apply_recipe,
    canonical_test_field,
    recipe_from_spec,
    sector_deformation,
    third_order_invariant,
    validate_recipe,
)
from sorkinsim.slits import SlitField, field_from_dft
from sorkinsim.sorkin import interference_naive, subset_probability_table, sum_rule_report


def brute_T(a):
    """Reference triple sum with explicit loops."""
    n_paths, n_det = a.shape
    out = np.zeros(n_det)
    for k in range(n_det):
        for p, q, r in combinations(range(n_paths), 3):
            x = (a[p, k] * np.conj(a[q, k])).imag
            y = (a[q, k] * np.conj(a[r, k])).imag
            z = (a[r, k] * np.conj(a[p, k])).imag
            out[k] += x * y * z
    return out


def brute_delta(a):
    t = brute_T(a)
    born = np.abs(a.sum(axis=0)) ** 2
    return t - born / born.sum() * t.sum()


def rand_sectors(rng, s, j, k):
    return rng.normal(size=(s, j, k)) + 1j * rng.normal(size=(s, j, k))


def test_recipe_from_spec():
    assert isinstance(recipe_from_spec("born"), Born)
    assert recipe_from_spec("sorkin3", 0.2) == SorkinDeformed(0.2)
    with pytest.raises(ValueError):
        recipe_from_spec("quartic")


def test_third_order_invariant_matches_loops(rng):
    for n_paths in range(1, 7):
        a = rand_sectors(rng, 1, n_paths, 5)[0]
        np.testing.assert_allclose(third_order_invariant(a), brute_T(a), atol=1e-12)


def test_deformation_matches_loops_and_sums_to_zero(rng):
    s = rand_sectors(rng, 3, 4, 6)
    d = sector_deformation(s)
    for i in range(3):
        np.testing.assert_allclose(d[i], brute_delta(s[i]), atol=1e-12)
        assert abs(d[i].sum()) < 1e-12


def test_born_single_three_path_sector(rng):
    s = rand_sectors(rng, 1, 3, 4)
    out = apply_recipe(s, Born())
    np.testing.assert_allclose(out.probs, np.abs(s[0, 0] + s[0, 1] + s[0, 2]) ** 2)


def test_zero_epsilon_is_born(rng):
    s = rand_sectors(rng, 2, 3, 4)
    np.testing.assert_array_equal(apply_recipe(s, SorkinDeformed(0.0)).probs, apply_recipe(s, Born()).probs)


def test_two_path_sectors_are_exactly_born(rng):
    for _ in range(100):
        s = rand_sectors(rng, 3, 2, 5)
        diff = apply_recipe(s, SorkinDeformed(0.3)).probs - apply_recipe(s, Born()).probs
        assert np.max(np.abs(diff)) < 1e-15


def test_normalization_preserved(rng):
    for _ in range(200):
        field = field_from_dft(rng.normal(size=4) + 1j * rng.normal(size=4))
        c = field.contrib / np.sqrt(np.sum(np.abs(field.contrib.sum(0)) ** 2))
        born = apply_recipe(c[None], Born()).probs.sum()
        out = apply_recipe(c[None], SorkinDeformed(0.01)).probs.sum()
        assert abs(out - born) < 1e-12


def test_per_sector_weights_preserved(rng):
    s = rand_sectors(rng, 2, 4, 5) * 0.2
    out = apply_recipe(s, SorkinDeformed(0.01))
    born = apply_recipe(s, Born())
    np.testing.assert_allclose(out.sector_probs.sum(axis=1), born.sector_probs.sum(axis=1), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), theta=st.floats(-np.pi, np.pi))
def test_global_phase_per_sector(seed, theta):
    r = np.random.default_rng(seed)
    s = rand_sectors(r, 2, 3, 4) * 0.3
    rotated = s.copy()
    rotated[0] *= np.exp(1j * theta)
    try:
        a = apply_recipe(s, SorkinDeformed(0.01)).probs
    except RecipeOutOfRange:
        return
    b = apply_recipe(rotated, SorkinDeformed(0.01)).probs
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_canonical_field_third_order():
    eps = 0.05
    f = canonical_test_field()
    table = subset_probability_table(f, SorkinDeformed(eps))
    # naive inclusion-exclusion at each detector as the reference
    i3 = [interference_naive(table[:, k], 0b111) for k in range(3)]
    assert max(abs(x) for x in i3) > eps * 1e-3
    rep = sum_rule_report(f, SorkinDeformed(eps))
    np.testing.assert_allclose(np.abs(rep.terms[:, 7]), np.abs(i3), atol=1e-12)


def test_canonical_field_born_third_order_vanishes():
    assert sum_rule_report(canonical_test_field(), Born()).max_abs_by_order[3] < 1e-10


def test_out_of_range_is_an_error():
    # uniform three slits: detectors 1 and 2 are dark under Born but T != 0
    jk = np.outer(np.arange(3), np.arange(3))
    dark = np.exp(2j * np.pi * jk / 3)[None]
    with pytest.raises(RecipeOutOfRange) as info:
        apply_recipe(dark, SorkinDeformed(10.0))
    assert info.value.detector in (1, 2) and info.value.value < 0


def test_validate_born():
    rep = validate_recipe(Born(), trials=1000, seed=1)
    assert rep.passed and rep.max_normalization_error <= 1e-12 and rep.max_third_order < 1e-10


def test_validate_small_deformation():
    rep = validate_recipe(SorkinDeformed(0.01), trials=200, seed=2)
    assert rep.passed
    assert rep.max_normalization_error <= 1e-12
    assert rep.max_third_order > 0


def test_validate_reports_out_of_range():
    jk = np.outer(np.arange(3), np.arange(3))
    near_dark = [SlitField(np.exp(2j * np.pi * jk / 3) * np.array([1, 1, 1 + 1e-3 * i])[:, None] / 3)
                 for i in range(5)]
    rep = validate_recipe(SorkinDeformed(10.0), fields=near_dark)
    assert rep.out_of_range > 0 and not rep.passed and rep.min_probability < 0


def test_empty_sector_gives_zero():
    out = apply_recipe(np.zeros((1, 3, 4)), SorkinDeformed(1.0))
    np.testing.assert_array_equal(out.probs, 0.0)
