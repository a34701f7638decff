"""Cross-cutting invariant suites run over small purpose-built instances.

Each suite checks one structural fact that must survive discretization:
componentwise behaviour of direct sums, witness transfer under time
discretization and rotation, forward/backward symmetry of groups, the
spectral obstruction to returns, and membership depth of constructed
vectors.  Suites run on deliberately small grids so the whole battery
stays interactive.

``tamper`` names one suite whose working tolerance is deliberately
broken before the checks run.  The suite then fails through the same
reporting path as a genuine violation, which is the point: it is the
negative control for the failure machinery, not a hidden switch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import make_weight
from .errors import ConstructionStalledError
from .matrices import assemble_matrix, spectral_radius_estimate
from .operators import (DiagonalFamily, TranslationFamily, direct_sum,
                        rotate_family, time_discretize)
from .recurrence import (Verdict, direct_scan, gdelta_membership,
                         nested_ball_construct, pullback_witness_oracle,
                         residual)
from .spaces import DomainKind, DomainSpec, WeightedGridSpace

__all__ = ["SuiteResult", "SUITE_NAMES", "verify_theorems"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str


SUITE_NAMES = ("direct-sum", "time-discretization", "rotation",
               "group-reversal", "spectral", "gdelta")


def _halfline(weight_name: str, n: int = 2000, trunc: float = 50.0,
              ) -> WeightedGridSpace:
    dom = DomainSpec(DomainKind.HALF_LINE, trunc=trunc)
    return WeightedGridSpace(dom, n, make_weight(weight_name), mode="lp",
                             p=1.0)


def _line(weight_name: str, n: int = 4000, trunc: float = 50.0
          ) -> WeightedGridSpace:
    dom = DomainSpec(DomainKind.LINE, trunc=trunc)
    return WeightedGridSpace(dom, n, make_weight(weight_name), mode="lp",
                             p=1.0)


def _suite_direct_sum(tampered: bool) -> SuiteResult:
    atol = -1.0 if tampered else 1e-12
    left = TranslationFamily(_halfline("expdecay"))
    right = DiagonalFamily((2.0 * math.pi,))
    pair_family = direct_sum(left, right)
    from .operators import PairFunction
    f = PairFunction(left.space.indicator(0.0, 1.0),
                     right.space.function(np.ones(1, dtype=complex)))
    for t in (1.0, 2.0, 5.0):
        got = pair_family.space.distance(pair_family.apply(t, f), f)
        want = max(residual(left, f.left, t), residual(right, f.right, t))
        if abs(got - want) > atol:
            return SuiteResult(
                "direct-sum", False,
                f"componentwise residual agreement violated at t={t}: "
                f"|{got!r} - {want!r}| > tol {atol}")
    # a sum returns only when both components do: the left residual stays
    # at full norm, so the pair must see no witness where the right alone
    # would
    tol = 0.5
    pair_res = pair_family.space.distance(pair_family.apply(1.0, f), f)
    right_res = residual(right, f.right, 1.0)
    if not (right_res < tol < pair_res):
        return SuiteResult(
            "direct-sum", False,
            f"expected the pair residual {pair_res!r} to exceed tol {tol} "
            f"while the diagonal component {right_res!r} stays below")
    return SuiteResult("direct-sum", True,
                       "pair residuals equal the component maximum")


def _suite_time_discretization(tampered: bool) -> SuiteResult:
    atol = -1.0 if tampered else 1e-12
    family = TranslationFamily(_halfline("expdecay"))
    t0 = 2.0
    op = time_discretize(family, t0)
    f = family.space.indicator(0.0, 1.0)
    for n in (1, 2, 3, 5):
        via_op = op.iterate(n, f)
        via_family = family.apply(n * t0, f)
        gap = family.space.distance(via_op, via_family)
        if gap > atol:
            return SuiteResult(
                "time-discretization", False,
                f"iterate({n}) differs from the time-{n * t0} map by "
                f"{gap!r} > tol {atol} (path {op.path_used})")
    return SuiteResult("time-discretization", True,
                       f"iterates match the continuous family "
                       f"(path {op.path_used})")


def _suite_rotation(tampered: bool) -> SuiteResult:
    scan_tol = 1e9 if tampered else 1e-3
    base = DiagonalFamily((2.0 * math.pi,))
    rotated = rotate_family(base, 1, 3)
    op = time_discretize(rotated, 1.0)
    f = base.space.function(np.ones(1, dtype=complex))
    witnesses = []
    for n in range(1, 13):
        r = base.space.distance(op.iterate(n, f), f)
        if r < scan_tol:
            witnesses.append(n)
    expected = [n for n in range(1, 13) if n % 3 == 0]
    if witnesses != expected:
        return SuiteResult(
            "rotation", False,
            f"rotated witnesses {witnesses} at tol {scan_tol}, expected "
            f"exactly the multiples of the rotation order {expected}")
    base_res = max(residual(base, f, float(n)) for n in expected)
    if base_res >= 1e-3:
        return SuiteResult(
            "rotation", False,
            f"base family lost its integer returns: residual {base_res!r}")
    return SuiteResult("rotation", True,
                       "witnesses survive rotation exactly on multiples "
                       "of the order")


def _suite_group_reversal(tampered: bool) -> SuiteResult:
    atol = -1.0 if tampered else 1e-12
    family = TranslationFamily(_line("expabsdecay"))
    f = family.space.indicator(-0.5, 0.5)
    for t in (1.0, 2.0, 5.0):
        fwd = residual(family, f, t)
        bwd = residual(family, f, -t)
        if abs(fwd - bwd) > atol:
            return SuiteResult(
                "group-reversal", False,
                f"forward/backward residual mismatch at |t|={t}: "
                f"|{fwd!r} - {bwd!r}| > tol {atol}")
    try:
        fwd_times = [st.time for st in
                     nested_ball_construct(family, f, 0.5, 2).stages]
        bwd_times = [st.time for st in
                     nested_ball_construct(family, f, 0.5, 2,
                                           direction=-1).stages]
    except ConstructionStalledError as err:
        return SuiteResult("group-reversal", False,
                           f"construction stalled unexpectedly: {err}")
    if [abs(t) for t in fwd_times] != [abs(t) for t in bwd_times]:
        return SuiteResult(
            "group-reversal", False,
            f"stage times differ between directions: {fwd_times} vs "
            f"{bwd_times}")
    return SuiteResult("group-reversal", True,
                       f"mirror-symmetric returns at times {fwd_times}")


def _suite_spectral(tampered: bool) -> SuiteResult:
    scan_tol = 1e9 if tampered else 0.1
    tol_spec = 1e-8
    family = TranslationFamily(_halfline("expgrow", n=1024))
    m = assemble_matrix(family, 1.0)
    radius, converged = spectral_radius_estimate(m, tol=tol_spec)
    if not converged:
        return SuiteResult("spectral", False,
                           "power iteration failed to converge")
    if not radius < 1.0 - 5.0 * tol_spec:
        return SuiteResult("spectral", True,
                           f"radius {radius!r} not small, nothing to check")
    f = family.space.indicator(0.0, 1.0)
    report = direct_scan(family, f, range(1, 17), tol=scan_tol)
    if report.verdict is not Verdict.NO_WITNESS_IN_RANGE:
        return SuiteResult(
            "spectral", False,
            f"radius {radius!r} below 1 - 5*{tol_spec} yet the scan at tol "
            f"{scan_tol} returned {report.verdict.value} with witnesses "
            f"{report.witness_times[:4]}")
    for t in (2.0, 4.0):
        if pullback_witness_oracle(family, f, 0.1, t) is not None:
            return SuiteResult(
                "spectral", False,
                f"oracle planted a witness at t={t} despite radius "
                f"{radius!r}")
    return SuiteResult("spectral", True,
                       f"radius {radius!r}: no returns, as the spectrum "
                       "demands")


def _suite_gdelta(tampered: bool) -> SuiteResult:
    family = TranslationFamily(_halfline("expdecay"))
    f = family.space.indicator(0.0, 1.0)
    result = nested_ball_construct(family, f, 0.5, 3)
    if not result.certified:
        return SuiteResult("gdelta", False,
                           "construction failed its own certification")
    final_radius = result.stages[-1].radius
    depth_wanted = int(1.0 / (2.0 * result.stages[-2].radius))
    if tampered:
        depth_wanted = 10 ** 9
    report = gdelta_membership(family, result.vector, 10 ** 6, horizon=16.0)
    if report.member_up_to < depth_wanted:
        return SuiteResult(
            "gdelta", False,
            f"constructed vector reaches depth {report.member_up_to}, "
            f"wanted at least {depth_wanted} (final radius {final_radius!r})")
    return SuiteResult(
        "gdelta", True,
        f"membership depth {report.member_up_to} covers the certified "
        f"level {depth_wanted}")


_SUITES = {
    "direct-sum": _suite_direct_sum,
    "time-discretization": _suite_time_discretization,
    "rotation": _suite_rotation,
    "group-reversal": _suite_group_reversal,
    "spectral": _suite_spectral,
    "gdelta": _suite_gdelta,
}


def verify_theorems(selected=None, tamper: str | None = None
                    ) -> tuple[SuiteResult, ...]:
    """Run the named suites (all by default; empty selection is a no-op)."""
    if selected is None:
        names = SUITE_NAMES
    else:
        names = tuple(selected)
        unknown = [n for n in names if n not in _SUITES]
        if unknown:
            raise ValueError(f"unknown suites: {', '.join(unknown)}")
    if tamper is not None and tamper not in _SUITES:
        raise ValueError(f"unknown suite to tamper: {tamper!r}")
    return tuple(_SUITES[name](tampered=(name == tamper)) for name in names)
