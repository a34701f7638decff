import numpy as np
import pytest

from recurlab import (Semiflow, affine_flow, dilation_flow, semiflow_selfcheck,
                      translation_flow)

XS = np.linspace(0.5, 8.0, 33)
TS = [-2.0, -0.5, 0.0, 0.5, 2.0]


@pytest.mark.parametrize("flow", [
    translation_flow(),
    translation_flow(half_line=True),
    dilation_flow(),
    affine_flow(0.5, 1.0),
], ids=["line-shift", "halfline-shift", "dilation", "affine"])
def test_stock_flows_pass_selfcheck(flow):
    report = semiflow_selfcheck(flow, TS, XS)
    assert report.passed, report
    assert report.worst() <= 1e-9


def test_quadratic_reparameterization_is_not_a_flow():
    """phi(t, x) = x + t^2 satisfies the identity at t = 0 but breaks the
    composition law: (t+s)^2 != t^2 + s^2."""
    fake = Semiflow(
        name="quadratic-shift",
        forward=lambda t, x: x + t * t,
        jacobian=lambda t, x: np.ones_like(np.broadcast_arrays(t, x)[0], dtype=float),
        inverse=lambda t, y: y - t * t,
        in_image=lambda t, y: np.ones_like(np.broadcast_arrays(t, y)[0], dtype=bool),
        group_like=True,
    )
    report = semiflow_selfcheck(fake, TS, XS)
    assert not report.passed
    assert report.identity_residual <= 1e-12
    # the cocycle defect at t = s = 2 is (4)^2 - 2*(2)^2 = 8
    assert report.cocycle_residual == pytest.approx(8.0)


def test_dilation_roundtrip_exact():
    flow = dilation_flow()
    t = np.full_like(XS, 1.7)
    back = flow.inverse(t, flow.forward(t, XS))
    assert np.max(np.abs(back - XS)) < 1e-12


def test_halfline_translation_partial_inverse():
    flow = translation_flow(half_line=True)
    assert not flow.group_like
    t = np.full(4, 2.0)
    ys = np.array([0.5, 1.9, 2.0, 3.5])
    assert list(flow.in_image(t, ys)) == [False, False, True, True]


def test_affine_flow_requires_nonzero_rate():
    with pytest.raises(ValueError):
        affine_flow(0.0, 1.0)


def test_selfcheck_catches_noninjective_map():
    collapse = Semiflow(
        name="collapse",
        forward=lambda t, x: np.where(np.abs(t) > 0, np.floor(x), x),
        jacobian=lambda t, x: np.ones_like(np.broadcast_arrays(t, x)[0], dtype=float),
        inverse=lambda t, y: y,
        in_image=lambda t, y: np.ones_like(np.broadcast_arrays(t, y)[0], dtype=bool),
        group_like=True,
    )
    report = semiflow_selfcheck(collapse, [0.0, 1.0], np.linspace(0.1, 0.9, 9))
    assert not report.passed
    assert report.injectivity_gap == 0.0
