"""Mass curves, recurrence criteria, and criterion/detector consistency."""

import math

import numpy as np
import pytest

from recurlab import (CertificateKind, Criterion, CriterionReport,
                      CriterionUnavailableError, DomainKind, DomainSpec,
                      PreconditionError, RecurrenceReport, Verdict,
                      WeightFunction, c0_semiflow_criterion,
                      check_weight_admissible, cross_validate,
                      dilation_flow, discrete_spectrum_criterion,
                      dyadic_time_ladder, liminf_criterion_halfline,
                      line_joint_criterion, lp_mass_curve,
                      lp_semiflow_criterion, pointwise_decay_criterion_line,
                      translation_flow, weighted_jacobian_criterion_lp)

HALF = DomainSpec(DomainKind.HALF_LINE, trunc=200.0)


def _cert(weight, shifts=(0.5, 1.0, 2.0, 4.0)):
    return check_weight_admissible(weight, HALF, np.linspace(0.0, 60.0, 121),
                                   shifts)


def _bell():
    return WeightFunction(lambda x: np.abs(x) / (1.0 + x * x), 1.0, 1.0,
                          label="bell")


def _cubed():
    return WeightFunction(lambda x: (1.0 + np.abs(x)) ** -3.0, 1.0, 3.0,
                          label="cauchycubed")


# -- mass curves ----------------------------------------------------------

def test_translated_mass_closed_form(expdecay_weight):
    curve = lp_mass_curve(expdecay_weight, translation_flow(), (0.0, 1.0),
                          [0.0, 1.0, 2.0, 5.0])
    factor = 1.0 - math.exp(-1.0)
    for t, v in zip(curve.times, curve.values):
        assert v == pytest.approx(math.exp(-t) * factor, rel=1e-6)


def test_mass_additivity_on_matching_lattices(expdecay_weight):
    """[0, 2] at 4096 cells uses the same sample set as [0, 1] and [1, 2]
    at 2048 cells each, so additivity holds to rounding."""
    flow = translation_flow()
    whole = lp_mass_curve(expdecay_weight, flow, (0.0, 2.0), [0.7, 3.0],
                          n_quad=4096)
    left = lp_mass_curve(expdecay_weight, flow, (0.0, 1.0), [0.7, 3.0],
                         n_quad=2048)
    right = lp_mass_curve(expdecay_weight, flow, (1.0, 2.0), [0.7, 3.0],
                          n_quad=2048)
    for w, l, r in zip(whole.values, left.values, right.values):
        assert abs(w - (l + r)) < 1e-12


def test_flat_translation_preserves_mass(flat_weight):
    curve = lp_mass_curve(flat_weight, translation_flow(), (0.0, 1.0),
                          [0.0, 1.0, 7.0, 31.0])
    base = curve.values[0]
    for v in curve.values[1:]:
        assert abs(v - base) < 1e-12


def test_mass_curve_validation(expdecay_weight):
    with pytest.raises(ValueError):
        lp_mass_curve(expdecay_weight, translation_flow(), (1.0, 1.0), [1.0])


# -- translation criteria -------------------------------------------------

def test_liminf_holds_for_expdecay(expdecay_weight):
    rep = liminf_criterion_halfline(expdecay_weight, _cert(expdecay_weight))
    assert rep.holds
    assert rep.criterion is Criterion.LIMINF_HALFLINE
    assert rep.passing_times


def test_liminf_fails_for_flat(flat_weight):
    rep = liminf_criterion_halfline(flat_weight, _cert(flat_weight))
    assert not rep.holds
    assert rep.passing_times == ()


def test_liminf_improves_under_decaying_factor(flat_weight, expdecay_weight):
    """Multiplying the flat weight by e^{-x} turns the failing criterion
    into a passing one; shrinking the weight can only help the dips."""
    assert not liminf_criterion_halfline(flat_weight, _cert(flat_weight)).holds
    assert liminf_criterion_halfline(expdecay_weight,
                                     _cert(expdecay_weight)).holds


def test_liminf_needs_a_passing_certificate(expdecay_weight):
    with pytest.raises(PreconditionError):
        liminf_criterion_halfline(expdecay_weight, None)
    gauss = WeightFunction(lambda x: np.exp(-x * x), 1.0, 1.0, label="gauss")
    failing = check_weight_admissible(
        gauss, DomainSpec(DomainKind.LINE, trunc=50.0),
        np.linspace(-20.0, 20.0, 41), [1.0, 4.0])
    assert not failing.holds
    with pytest.raises(PreconditionError):
        liminf_criterion_halfline(gauss, failing)


def test_line_joint_holds_for_two_sided_decay(expabs_weight):
    rep = line_joint_criterion(expabs_weight)
    assert rep.holds
    assert rep.evidence == {"forward_holds": True, "backward_holds": True}


def test_line_joint_rejects_one_sided_decay():
    oneside = WeightFunction(lambda x: np.exp(-np.maximum(x, 0.0)), 1.0, 1.0,
                             label="onesidedecay")
    rep = line_joint_criterion(oneside)
    assert not rep.holds
    assert rep.evidence["forward_holds"] is True
    assert rep.evidence["backward_holds"] is False
    fwd = pointwise_decay_criterion_line(oneside, "forward")
    assert fwd.holds


def test_pointwise_decay_direction_validation(expabs_weight):
    with pytest.raises(ValueError):
        pointwise_decay_criterion_line(expabs_weight, "sideways")


# -- flow criteria --------------------------------------------------------

def test_lp_semiflow_criterion_for_dilation():
    rep = lp_semiflow_criterion(_cubed(), dilation_flow(), (1.0, 2.0),
                                horizon=64.0)
    assert rep.holds
    assert rep.criterion is Criterion.LP_SEMIFLOW_MASS
    full, refined = rep.curves
    assert full.values[0] > 0.0
    # pushing mass outward under (1+x)^-3 must shed it monotonically
    assert full.values[-1] < 1e-4 * full.values[0]


def test_c0_semiflow_criterion_for_dilation():
    rep = c0_semiflow_criterion(_bell(), dilation_flow(), (1.0, 2.0),
                                x_window=(0.01, 200.0), horizon=64.0)
    assert rep.holds
    assert rep.criterion is Criterion.C0_SEMIFLOW_SUP


def test_c0_semiflow_needs_weight_positive_on_compact():
    ramp = WeightFunction(lambda x: np.maximum(x, 0.0), 1.0, 1.0,
                          label="ramp")
    with pytest.raises(PreconditionError):
        c0_semiflow_criterion(ramp, translation_flow(), (-2.0, -1.0),
                              x_window=(-5.0, 5.0))


def test_weighted_jacobian_lp_for_dilation():
    rep = weighted_jacobian_criterion_lp(_cubed(), dilation_flow(), (1.0, 2.0),
                                         horizon=64.0)
    assert rep.holds
    assert rep.criterion is Criterion.WEIGHTED_JACOBIAN_LP
    assert rep.evidence["points_passing"] == rep.evidence["points_total"]


def test_weighted_jacobian_needs_escape_for_semiflows():
    from recurlab import affine_flow
    with pytest.raises(PreconditionError):
        weighted_jacobian_criterion_lp(_cubed(), affine_flow(0.5, 1.0),
                                       (1.0, 2.0), horizon=16.0)


def test_discrete_spectrum_sufficiency():
    rep = discrete_spectrum_criterion((2.0 * np.pi, 2.0 * np.pi * np.sqrt(2.0)))
    assert rep.holds
    assert rep.criterion is Criterion.DISCRETE_SPECTRUM
    assert "sufficiency" in rep.notes[0]
    with pytest.raises(ValueError):
        discrete_spectrum_criterion(())


def test_dyadic_time_ladder_shape():
    ts = dyadic_time_ladder(32.0)
    assert ts[0] == 1.0
    assert 1.5 in ts and 24.0 in ts and 32.0 in ts
    assert ts == sorted(ts)
    assert max(ts) <= 32.0


# -- cross-validation -----------------------------------------------------

def _criterion(holds):
    return CriterionReport(criterion=Criterion.LIMINF_HALFLINE, holds=holds,
                           horizon=100.0, tolerance=1e-4)


def _detector(verdict, witnesses=()):
    return RecurrenceReport(
        verdict=verdict, witness_times=tuple(witnesses),
        residuals=tuple(0.0 for _ in witnesses), method="direct_scan",
        horizon=64.0, tolerance=1e-3,
        truncation_hit=verdict is Verdict.TRUNCATION_LIMITED)


CASES = [
    (True, Verdict.WITNESS_FOUND, (1.0, 2.0, 4.0), False, "Agree"),
    (False, Verdict.NO_WITNESS_IN_RANGE, (), False, "Agree"),
    (True, Verdict.NO_WITNESS_IN_RANGE, (), False, "CriterionYesDetectorNo"),
    (False, Verdict.WITNESS_FOUND, (1.0, 2.0, 4.0), False,
     "CriterionNoDetectorYes"),
    (False, Verdict.WITNESS_FOUND, (1.0, 2.0, 4.0), True, "Agree"),
    (True, Verdict.TRUNCATION_LIMITED, (2.0, 3.0), False, "Agree"),
    (True, Verdict.TRUNCATION_LIMITED, (), False, "CriterionYesDetectorNo"),
    (False, Verdict.TRUNCATION_LIMITED, (2.0,), False, "Agree"),
    (False, Verdict.TRUNCATION_LIMITED, (), False, "Agree"),
]


@pytest.mark.parametrize("holds,verdict,wit,suff,expected", CASES)
def test_cross_validate_branches(holds, verdict, wit, suff, expected):
    rec = cross_validate("probe", _criterion(holds), _detector(verdict, wit),
                         sufficiency_only=suff)
    assert rec.tag == expected
    assert rec.instance == "probe"
    assert rec.criterion_holds is holds
    assert rec.detector_verdict is verdict


def test_cross_validate_tag_universe():
    """Whatever the inputs, the tag comes from the fixed three-element
    set; downstream exit-code logic depends on this."""
    tags = set()
    for holds, verdict, wit, suff, _ in CASES:
        rec = cross_validate("probe", _criterion(holds),
                             _detector(verdict, wit), sufficiency_only=suff)
        tags.add(rec.tag)
    assert tags == {"Agree", "CriterionYesDetectorNo", "CriterionNoDetectorYes"}


def test_truncation_limited_positive_pair_notes_the_window():
    rec = cross_validate("probe", _criterion(True),
                         _detector(Verdict.TRUNCATION_LIMITED, (2.0, 3.0)))
    assert "window-reachable scales" in rec.note
