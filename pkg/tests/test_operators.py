"""Operator families: translations, compositions, sums, rotations."""

import numpy as np
import pytest

from recurlab import (CompositionFamily, DiagonalFamily, InvalidRotationError,
                      PairFunction, TranslationFamily, coordinate_space,
                      dilation_flow, direct_sum, rotate_family,
                      time_discretize, translation_flow)


def test_time_zero_is_identity_bitwise(halfline_family, rng):
    f = halfline_family.space.function(rng.normal(size=halfline_family.space.n))
    g = halfline_family.apply(0.0, f)
    assert g is f or np.array_equal(g.values, f.values)


def test_integer_shift_is_exact_roll(halfline_family):
    """h = 0.025 divides 1, so T(1) moves the indicator of [2, 3] onto the
    indicator of [1, 2] without touching any sample value."""
    space = halfline_family.space
    f = space.indicator(2.0, 3.0)
    g = halfline_family.apply(1.0, f)
    expected = space.indicator(1.0, 2.0)
    assert np.array_equal(g.values, expected.values)
    assert not g.truncated


def test_forward_family_rejects_negative_time(halfline_family):
    f = halfline_family.space.indicator(0.0, 1.0)
    with pytest.raises(ValueError):
        halfline_family.apply(-1.0, f)


def test_group_family_accepts_negative_time(line_family):
    f = line_family.space.indicator(-0.5, 0.5)
    g = line_family.apply(-3.0, f)
    assert np.array_equal(g.values, line_family.space.indicator(2.5, 3.5).values)


def test_line_shift_past_window_flags_truncation(line_family):
    f = line_family.space.indicator(40.0, 41.0)
    g = line_family.apply(-20.0, f)
    assert g.truncated


def test_fractional_shift_interpolates(halfline_family):
    space = halfline_family.space
    f = space.from_callable(lambda x: np.exp(-((x - 5.0) ** 2)))
    g = halfline_family.apply(0.3131, f)
    exact = space.from_callable(lambda x: np.exp(-((x + 0.3131 - 5.0) ** 2)))
    assert space.distance(g, exact) < 5e-4


def test_composition_with_translation_flow_matches_translation(line_space):
    trans = TranslationFamily(line_space)
    comp = CompositionFamily(line_space, translation_flow())
    f = line_space.tent(-2.0, 2.0)
    for t in (0.5, 1.0, 3.25):
        a = trans.apply(t, f)
        b = comp.apply(t, f)
        assert np.array_equal(a.values, b.values)


def test_composition_dilation_reads_scaled_points():
    from recurlab import DomainKind, DomainSpec, WeightedGridSpace, WeightFunction
    w = WeightFunction(lambda x: np.abs(x) / (1.0 + x * x), 1.0, 1.0, label="bell")
    dom = DomainSpec(DomainKind.OPEN_BOX, ((0.01, 50.0),))
    space = WeightedGridSpace(dom, 4000, w, mode="c0sup")
    fam = CompositionFamily(space, dilation_flow())
    f = space.from_callable(lambda x: np.exp(-((np.log(x)) ** 2)))
    g = fam.apply(1.0, f)
    exact = space.from_callable(lambda x: np.exp(-((np.log(x) + 1.0) ** 2)))
    # dilation by e moves log-coordinates by exactly 1
    assert space.distance(g, exact) < 2e-3


def test_diagonal_family_phases():
    fam = DiagonalFamily((np.pi, 2.0 * np.pi))
    f = fam.space.function(np.ones(2, dtype=complex))
    g = fam.apply(1.0, f)
    assert g.values[0] == pytest.approx(-1.0)
    assert g.values[1] == pytest.approx(1.0)
    assert fam.lipschitz_bound(123.0) == 1.0


def test_diagonal_rejects_mismatched_space():
    from recurlab import SpaceMismatchError
    with pytest.raises(SpaceMismatchError):
        DiagonalFamily((1.0, 2.0), space=coordinate_space(3))


class TestRotation:
    def test_residue_powers_exact(self, halfline_family):
        rot = rotate_family(halfline_family, 1, 3)
        assert rot.power(3) == (1.0 + 0.0j)
        assert rot.power(0) == (1.0 + 0.0j)
        assert rot.power(-3) == (1.0 + 0.0j)
        assert rot.power(4) == rot.power(1)
        assert abs(rot.scalar - np.exp(2j * np.pi / 3.0)) < 1e-15

    def test_fraction_is_reduced(self, halfline_family):
        rot = rotate_family(halfline_family, 2, 6)
        assert (rot.p, rot.q) == (1, 3)

    def test_rejects_bad_rotation(self, halfline_family):
        with pytest.raises(InvalidRotationError):
            rotate_family(halfline_family, 1, 0)
        with pytest.raises(InvalidRotationError):
            rotate_family(halfline_family, 1.5, 3)

    def test_apply_multiplies_once(self, halfline_family):
        rot = rotate_family(halfline_family, 1, 4)
        f = halfline_family.space.indicator(0.0, 1.0)
        got = rot.apply(2.0, f)
        plain = halfline_family.apply(2.0, f)
        assert np.array_equal(got.values, 1j * plain.values)


def test_direct_sum_is_componentwise_max(halfline_family, line_family):
    pair_fam = direct_sum(halfline_family, line_family)
    f = PairFunction(halfline_family.space.indicator(0.0, 1.0),
                     line_family.space.indicator(-1.0, 1.0))
    n_left = halfline_family.space.norm(f.left)
    n_right = line_family.space.norm(f.right)
    assert pair_fam.space.norm(f) == max(n_left, n_right)
    g = pair_fam.apply(2.0, f)
    a = halfline_family.apply(2.0, f.left)
    b = line_family.apply(2.0, f.right)
    assert np.array_equal(g.left.values, a.values)
    assert np.array_equal(g.right.values, b.values)


def test_direct_sum_of_mixed_time_domains_is_forward(halfline_family, line_family):
    pair_fam = direct_sum(line_family, halfline_family)
    f = PairFunction(line_family.space.indicator(-1.0, 1.0),
                     halfline_family.space.indicator(0.0, 1.0))
    with pytest.raises(ValueError):
        pair_fam.apply(-1.0, f)


class TestTimeDiscretization:
    def test_exact_path_matches_flow_time(self, halfline_family):
        disc = time_discretize(halfline_family, 2.0)
        assert disc.path_used == "exact"
        f = halfline_family.space.indicator(0.0, 1.0)
        for n in (1, 3, 9):
            a = disc.iterate(n, f)
            b = halfline_family.apply(2.0 * n, f)
            assert np.array_equal(a.values, b.values)

    def test_rotated_iterates_use_residue_powers(self, halfline_family):
        rot = rotate_family(halfline_family, 1, 3)
        disc = time_discretize(rot, 1.0)
        f = halfline_family.space.indicator(0.0, 1.0)
        got = disc.iterate(6, f)
        plain = halfline_family.apply(6.0, f)
        # power(6) is exactly 1, so the iterate equals the plain image bitwise
        assert np.array_equal(got.values, plain.values)

    def test_negative_iterate_of_forward_family_rejected(self, halfline_family):
        disc = time_discretize(halfline_family, 1.0)
        with pytest.raises(ValueError):
            disc.iterate(-2, halfline_family.space.indicator(0.0, 1.0))

    def test_t0_must_be_positive(self, halfline_family):
        with pytest.raises(ValueError):
            time_discretize(halfline_family, 0.0)
