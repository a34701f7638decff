"""Dense snapshots, power iteration, and norm estimation."""

import numpy as np
import pytest

from recurlab import (DiagonalFamily, DomainKind, DomainSpec, MatrixSizeError,
                      TranslationFamily, WeightedGridSpace, WeightFunction,
                      assemble_matrix, operator_norm_estimate, rotate_family,
                      spectral_radius_estimate)


def _growing_family(n=512, trunc=50.0):
    w = WeightFunction(lambda x: np.exp(x), 1.0, 1.0, label="expgrow")
    dom = DomainSpec(DomainKind.HALF_LINE, trunc=trunc)
    return TranslationFamily(WeightedGridSpace(dom, n, w, mode="lp", p=1.0))


def test_matvec_agrees_with_family(halfline_family, rng):
    small = _growing_family(n=256)
    m = assemble_matrix(small, 1.0)
    f = small.space.function(rng.normal(size=256) + 1j * rng.normal(size=256))
    via_matrix = m.entries @ f.values
    via_family = small.apply(1.0, f).values
    assert np.max(np.abs(via_matrix - via_family)) < 1e-10


def test_diagonal_radius_is_one():
    fam = DiagonalFamily((2.0 * np.pi, 2.0 * np.pi * np.sqrt(2.0)))
    m = assemble_matrix(fam, 1.0)
    radius, converged = spectral_radius_estimate(m, seed=0)
    assert converged
    assert radius == pytest.approx(1.0, abs=1e-10)


def test_truncated_shift_is_nilpotent():
    """T(1) on a 50-cell-wide truncated half-line kills every vector after
    at most 50 steps, and power iteration detects the collapse exactly."""
    fam = _growing_family()
    m = assemble_matrix(fam, 1.0)
    radius, converged = spectral_radius_estimate(m, seed=0)
    assert radius == 0.0
    assert converged


def test_operator_norm_of_unimodular_diagonal():
    fam = DiagonalFamily((1.0, 2.0, 3.0))
    m = assemble_matrix(fam, 1.0)
    assert operator_norm_estimate(m, seed=1) == pytest.approx(1.0, rel=1e-9)


def test_rotated_assembly_multiplies_scalar(halfline_family):
    small = _growing_family(n=128)
    rot = rotate_family(small, 1, 4)
    plain = assemble_matrix(small, 2.0)
    rotated = assemble_matrix(rot, 2.0)
    assert np.allclose(rotated.entries, 1j * plain.entries, atol=1e-14)


def test_assembly_cap_enforced(halfline_family):
    # the stock module test grid has 2000 cells, under the 4096 cap
    assemble_matrix(halfline_family, 1.0)
    big = _growing_family(n=5000)
    with pytest.raises(MatrixSizeError):
        assemble_matrix(big, 1.0)


def test_seeded_estimates_are_deterministic():
    fam = _growing_family(n=256)
    m = assemble_matrix(fam, 0.5)
    a = operator_norm_estimate(m, seed=7)
    b = operator_norm_estimate(m, seed=7)
    assert a == b
    r1 = spectral_radius_estimate(m, seed=7)
    r2 = spectral_radius_estimate(m, seed=7)
    assert r1 == r2
