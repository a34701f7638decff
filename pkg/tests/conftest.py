"""Shared small-grid fixtures.

The stock catalog grids (20k-40k cells) are deliberately avoided here;
module tests run on 2k-4k cells so the whole suite stays fast.  Grids are
sized so h divides 1 exactly, which makes integer translations exact
index rolls.
"""

import numpy as np
import pytest

from recurlab import (DomainKind, DomainSpec, TranslationFamily,
                      WeightedGridSpace, WeightFunction)


def make_weight(fn, m, omega, label):
    return WeightFunction(fn, float(m), float(omega), label=label)


@pytest.fixture(scope="session")
def expdecay_weight():
    return make_weight(lambda x: np.exp(-x), 1.0, 1.0, "expdecay")


@pytest.fixture(scope="session")
def flat_weight():
    return make_weight(lambda x: np.ones_like(x), 1.0, 0.0, "flat")


@pytest.fixture(scope="session")
def expabs_weight():
    return make_weight(lambda x: np.exp(-np.abs(x)), 1.0, 1.0, "expabsdecay")


@pytest.fixture(scope="session")
def halfline_space(expdecay_weight):
    dom = DomainSpec(DomainKind.HALF_LINE, trunc=50.0)
    return WeightedGridSpace(dom, 2000, expdecay_weight, mode="lp", p=1.0)


@pytest.fixture(scope="session")
def halfline_family(halfline_space):
    return TranslationFamily(halfline_space)


@pytest.fixture(scope="session")
def flat_space(flat_weight):
    dom = DomainSpec(DomainKind.HALF_LINE, trunc=50.0)
    return WeightedGridSpace(dom, 2000, flat_weight, mode="lp", p=1.0)


@pytest.fixture(scope="session")
def flat_family(flat_space):
    return TranslationFamily(flat_space)


@pytest.fixture(scope="session")
def line_space(expabs_weight):
    dom = DomainSpec(DomainKind.LINE, trunc=50.0)
    return WeightedGridSpace(dom, 4000, expabs_weight, mode="lp", p=1.0)


@pytest.fixture(scope="session")
def line_family(line_space):
    return TranslationFamily(line_space)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
