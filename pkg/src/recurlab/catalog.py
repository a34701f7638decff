"""Stock instances pairing weighted grid spaces with operator families.

The catalog fixes nine concrete set-ups, each knowing its admissibility
checks, the criterion that predicts its behaviour, the detector that
measures actual returns, and the outcome the pairing is expected to
produce.  The runner, the CLI and the consistency tests all drive the
laboratory through this one table.

Grid choices are deliberate.  Half-line and line instances use a window
of +-200 with cells of width 0.01, so integer translation times land
exactly on the lattice and pullback teeth reproduce sample values
bitwise.  Dilation instances live on the open box (0.01, 200): the orbit
x * e^t sweeps scales multiplicatively, and a log-window of about ten
units is what a uniform desk-size grid can carry.  Inside such a window
the pullback search can certify returns at two dyadic time scales but
never three, which is why the expected detector verdict there is
truncation-limited rather than a full witness set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .admissibility import (
    AdmissibilityCertificate,
    check_c0_semiflow_admissible,
    check_condition_d,
    check_lp_semiflow_admissible,
    check_weight_admissible,
)
from .criteria import (
    ConsistencyRecord,
    CriterionReport,
    c0_semiflow_criterion,
    cross_validate,
    discrete_spectrum_criterion,
    liminf_criterion_halfline,
    line_joint_criterion,
    lp_semiflow_criterion,
    weighted_jacobian_criterion_c0,
    weighted_jacobian_criterion_lp,
)
from .errors import ConstructionStalledError
from .operators import (
    CompositionFamily,
    DiagonalFamily,
    OperatorFamily,
    TranslationFamily,
    coordinate_space,
)
from .recurrence import (
    GdeltaReport,
    NestedBallResult,
    RecurrenceReport,
    RigidityReport,
    Verdict,
    direct_scan,
    gdelta_membership,
    nested_ball_construct,
    oracle_scan,
    rigidity_scan,
    uniform_rigidity_scan,
)
from .semiflows import Semiflow, dilation_flow, translation_flow
from .spaces import DomainKind, DomainSpec, WeightedGridSpace, WeightFunction

__all__ = [
    "InstanceSpec",
    "InstanceResult",
    "INSTANCE_NAMES",
    "CATALOG",
    "weight_names",
    "make_weight",
    "flow_names",
    "make_flow",
    "build_space",
    "build_family",
    "run_admissibility",
    "run_criterion",
    "run_secondary_criteria",
    "run_detector",
    "run_construction",
    "run_consistency",
    "run_instance",
    "spectrum_plan",
    "rigidity_plan",
    "run_rigidity",
    "run_gdelta",
]


# -- weight and flow registries -------------------------------------------

def _sine_envelope(x):
    return (2.0 + np.sin(x)) * np.exp(-x)


_WEIGHTS = {
    "expdecay": (lambda x: np.exp(-x), 1.0, 1.0, "exp(-x)"),
    "flat": (lambda x: np.ones_like(np.asarray(x, dtype=float)), 1.0, 0.0,
             "flat"),
    "expgrow": (lambda x: np.exp(x), 1.0, 1.0, "exp(x)"),
    "expabsdecay": (lambda x: np.exp(-np.abs(x)), 1.0, 1.0, "exp(-|x|)"),
    "onesidedecay": (lambda x: np.exp(-np.maximum(x, 0.0)), 1.0, 1.0,
                     "exp(-max(x, 0))"),
    # claimed constants are deliberately wrong: the admissibility checker
    # must refute this one, it decays faster than any exponential
    "gauss": (lambda x: np.exp(-np.square(x)), 1.0, 1.0, "exp(-x^2)"),
    "cauchycubed": (lambda x: (1.0 + np.abs(x)) ** -3.0, 1.0, 3.0,
                    "(1+x)^-3"),
    "bell": (lambda x: np.abs(x) / (1.0 + np.square(x)), 1.0, 1.0,
             "x/(1+x^2)"),
    "sineenvelope": (_sine_envelope, 3.0, 1.0, "(2+sin x) exp(-x)"),
}


def weight_names() -> tuple[str, ...]:
    return tuple(sorted(_WEIGHTS))


def make_weight(name: str) -> WeightFunction:
    evaluator, m, omega, label = _WEIGHTS[name]
    return WeightFunction(evaluator, m, omega, label=label)


_FLOWS = {
    "translation-halfline": lambda: translation_flow(half_line=True),
    "translation-line": lambda: translation_flow(half_line=False),
    "dilation": dilation_flow,
}


def flow_names() -> tuple[str, ...]:
    return tuple(sorted(_FLOWS))


def make_flow(name: str) -> Semiflow:
    return _FLOWS[name]()


# -- the instance table ----------------------------------------------------

@dataclass(frozen=True)
class InstanceSpec:
    """One catalog row: what is built and what outcome is expected."""

    name: str
    summary: str
    weight: str
    family_kind: str
    norm_mode: str
    expected_recurrent: bool
    expected_verdict: Verdict
    provenance: str
    sufficiency_only: bool = False


CATALOG = {
    "halfline-expdecay": InstanceSpec(
        name="halfline-expdecay",
        summary="translation on [0, inf) against exp(-x), integral norm",
        weight="expdecay",
        family_kind="translation",
        norm_mode="lp",
        expected_recurrent=True,
        expected_verdict=Verdict.WITNESS_FOUND,
        provenance="chained-ball construction certifies returns at six scales",
    ),
    "halfline-flat": InstanceSpec(
        name="halfline-flat",
        summary="translation on [0, inf) against the flat weight",
        weight="flat",
        family_kind="translation",
        norm_mode="lp",
        expected_recurrent=False,
        expected_verdict=Verdict.NO_WITNESS_IN_RANGE,
        provenance="shifted bumps keep their full norm, residual is exactly 1",
    ),
    "halfline-growing": InstanceSpec(
        name="halfline-growing",
        summary="translation on [0, inf) against exp(x)",
        weight="expgrow",
        family_kind="translation",
        norm_mode="lp",
        expected_recurrent=False,
        expected_verdict=Verdict.NO_WITNESS_IN_RANGE,
        provenance="weight growth forbids dips below the starting norm",
    ),
    "line-symmetric": InstanceSpec(
        name="line-symmetric",
        summary="translation group on R against exp(-|x|)",
        weight="expabsdecay",
        family_kind="translation",
        norm_mode="lp",
        expected_recurrent=True,
        expected_verdict=Verdict.WITNESS_FOUND,
        provenance="two-sided decay admits the construction in both directions",
    ),
    "line-oneside": InstanceSpec(
        name="line-oneside",
        summary="translation group on R against exp(-max(x, 0))",
        weight="onesidedecay",
        family_kind="translation",
        norm_mode="lp",
        expected_recurrent=False,
        expected_verdict=Verdict.NO_WITNESS_IN_RANGE,
        provenance="flat left tail keeps every return residual at full norm",
    ),
    "dilation-c0": InstanceSpec(
        name="dilation-c0",
        summary="dilation x e^t on (0.01, 200) against x/(1+x^2), sup norm",
        weight="bell",
        family_kind="dilation",
        norm_mode="c0sup",
        expected_recurrent=True,
        expected_verdict=Verdict.TRUNCATION_LIMITED,
        provenance="returns certified at the window-reachable scales",
    ),
    "dilation-lp": InstanceSpec(
        name="dilation-lp",
        summary="dilation x e^t on (0.01, 200) against (1+x)^-3, integral norm",
        weight="cauchycubed",
        family_kind="dilation",
        norm_mode="lp",
        expected_recurrent=True,
        expected_verdict=Verdict.TRUNCATION_LIMITED,
        provenance="returns certified at the window-reachable scales",
    ),
    "diagonal-rational": InstanceSpec(
        name="diagonal-rational",
        summary="two unimodular phases at frequencies 2*pi and 4*pi",
        weight="flat",
        family_kind="diagonal",
        norm_mode="c0sup",
        expected_recurrent=True,
        expected_verdict=Verdict.WITNESS_FOUND,
        provenance="every integer time is a period, residual near machine zero",
        sufficiency_only=True,
    ),
    "diagonal-irrational": InstanceSpec(
        name="diagonal-irrational",
        summary="one unimodular phase at frequency 2*pi*sqrt(2)",
        weight="flat",
        family_kind="diagonal",
        norm_mode="c0sup",
        expected_recurrent=True,
        expected_verdict=Verdict.WITNESS_FOUND,
        provenance="denominators of sqrt(2) give returns at many scales",
        sufficiency_only=True,
    ),
}

INSTANCE_NAMES = (
    "halfline-expdecay",
    "halfline-flat",
    "halfline-growing",
    "line-symmetric",
    "line-oneside",
    "dilation-c0",
    "dilation-lp",
    "diagonal-rational",
    "diagonal-irrational",
)

_TRUNC = 200.0
_BOX = (0.01, 200.0)
_COMPACT = (1.0, 2.0)
_RATIONAL_FREQS = (2.0 * math.pi, 4.0 * math.pi)
_IRRATIONAL_FREQS = (2.0 * math.pi * math.sqrt(2.0),)

# horizons for the flow criteria stay well inside float range even after
# exponentiation; the translation criteria probe the ideal weight and can
# take the default long horizon
_FLOW_HORIZON = 64.0


def _check_name(name: str):
    if name not in CATALOG:
        raise KeyError(f"unknown catalog instance {name!r}")


def build_space(name: str, grid_points: int | None = None) -> WeightedGridSpace:
    _check_name(name)
    spec = CATALOG[name]
    w = make_weight(spec.weight)
    if name.startswith("halfline-"):
        dom = DomainSpec(DomainKind.HALF_LINE, trunc=_TRUNC)
        return WeightedGridSpace(dom, grid_points or 20000, w, mode="lp", p=1.0)
    if name.startswith("line-"):
        dom = DomainSpec(DomainKind.LINE, trunc=_TRUNC)
        return WeightedGridSpace(dom, grid_points or 40000, w, mode="lp", p=1.0)
    if name == "dilation-c0":
        dom = DomainSpec(DomainKind.OPEN_BOX, (_BOX,))
        return WeightedGridSpace(dom, grid_points or 20000, w, mode="c0sup")
    if name == "dilation-lp":
        dom = DomainSpec(DomainKind.OPEN_BOX, (_BOX,))
        return WeightedGridSpace(dom, grid_points or 20000, w, mode="lp", p=1.0)
    if name == "diagonal-rational":
        return coordinate_space(grid_points or 2)
    return coordinate_space(grid_points or 1)


def build_family(name: str, grid_points: int | None = None) -> OperatorFamily:
    _check_name(name)
    space = build_space(name, grid_points)
    kind = CATALOG[name].family_kind
    if kind == "translation":
        return TranslationFamily(space)
    if kind == "dilation":
        return CompositionFamily(space, make_flow("dilation"))
    freqs = (_RATIONAL_FREQS if name == "diagonal-rational"
             else _IRRATIONAL_FREQS)
    return DiagonalFamily(freqs, space)


# -- admissibility plans ---------------------------------------------------

def _weight_cert(name: str, tolerance: float) -> AdmissibilityCertificate:
    spec = CATALOG[name]
    w = make_weight(spec.weight)
    space = build_space(name)
    dom = space.domain
    lo, hi = dom.window
    ts = np.concatenate([np.linspace(max(lo, -32.0), min(hi, 32.0), 65),
                         np.array([min(hi, 48.0), min(hi, 96.0), hi])])
    if dom.kind is DomainKind.HALF_LINE:
        shifts = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
    else:
        pos = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
        shifts = np.concatenate([-pos[::-1], pos])
    return check_weight_admissible(w, dom, ts, shifts, tolerance=tolerance)


def run_admissibility(name: str, tolerance: float = 1e-9
                      ) -> tuple[AdmissibilityCertificate, ...]:
    """All admissibility certificates belonging to an instance."""
    _check_name(name)
    spec = CATALOG[name]
    if spec.family_kind == "translation":
        return (_weight_cert(name, tolerance),)
    if spec.family_kind == "dilation":
        w = make_weight(spec.weight)
        flow = make_flow("dilation")
        dom = build_space(name).domain
        ts = np.array([0.5, 1.0, 2.0, 4.0])
        ts_two_sided = np.concatenate([-ts[::-1], ts])
        # dense enough that the outermost two lattice points hug the edges;
        # preimages of the compact then stay clear of them at every sampled
        # time, as they should for a flow whose orbits leave the window
        xs = np.linspace(_BOX[0] * 1.5, _BOX[1] * 0.98, 4096)
        escape_ts = np.array([1.0, 2.0, 4.0, 6.0])
        cond_d = check_condition_d(flow, dom, escape_ts, xs, [_COMPACT],
                                   tolerance=tolerance)
        if spec.norm_mode == "lp":
            main = check_lp_semiflow_admissible(w, flow, dom, ts_two_sided, xs,
                                                tolerance=tolerance)
        else:
            main = check_c0_semiflow_admissible(w, flow, dom, ts, xs,
                                                [_COMPACT],
                                                tolerance=tolerance)
        return (main, cond_d)
    return ()


# -- criterion plans -------------------------------------------------------

def run_criterion(name: str, horizon: float | None = None,
                  tol: float = 1e-4) -> CriterionReport:
    """The instance's predicting criterion at its stock parameters."""
    _check_name(name)
    spec = CATALOG[name]
    w = make_weight(spec.weight)
    if name.startswith("halfline-"):
        cert = _weight_cert(name, 1e-9)
        return liminf_criterion_halfline(w, cert, horizon=horizon or 1000.0,
                                         tol=tol)
    if name.startswith("line-"):
        return line_joint_criterion(w, horizon=horizon or 1000.0, tol=tol)
    if name == "dilation-lp":
        return lp_semiflow_criterion(w, make_flow("dilation"), _COMPACT,
                                     horizon=horizon or _FLOW_HORIZON, tol=tol)
    if name == "dilation-c0":
        return c0_semiflow_criterion(w, make_flow("dilation"), _COMPACT,
                                     _BOX, horizon=horizon or _FLOW_HORIZON,
                                     tol=tol)
    freqs = (_RATIONAL_FREQS if name == "diagonal-rational"
             else _IRRATIONAL_FREQS)
    return discrete_spectrum_criterion(freqs)


def run_secondary_criteria(name: str, horizon: float | None = None,
                           tol: float = 1e-4) -> tuple[CriterionReport, ...]:
    """Backward-transport criteria, reported alongside the primary one."""
    _check_name(name)
    spec = CATALOG[name]
    if spec.family_kind != "dilation":
        return ()
    w = make_weight(spec.weight)
    flow = make_flow("dilation")
    h = horizon or _FLOW_HORIZON
    if spec.norm_mode == "lp":
        return (weighted_jacobian_criterion_lp(w, flow, _COMPACT, horizon=h,
                                               tol=tol),)
    return (weighted_jacobian_criterion_c0(w, flow, _COMPACT, horizon=h,
                                           tol=tol),)


# -- detector plans --------------------------------------------------------

# stock detector tolerances; the scan tolerance for the irrational phase
# is 0.05 because its return times thin out like the denominators of the
# sqrt(2) approximations and a scan to 10^4 sees many scales only at this
# resolution
_DETECTOR_TOL = {
    "halfline-flat": 0.5,
    "halfline-growing": 1e-3,
    "diagonal-rational": 1e-3,
    "diagonal-irrational": 0.05,
    "dilation-c0": 0.2,
    "dilation-lp": 0.0125,
}

_SCAN_HORIZON = {
    "halfline-flat": 1000,
    "halfline-growing": 1000,
    "diagonal-rational": 64,
    "diagonal-irrational": 10000,
}


def _stalled_report(family: OperatorFamily, eps0: float,
                    stalls: dict[str, int]) -> RecurrenceReport:
    lo, hi = family.space.window
    return RecurrenceReport(
        verdict=Verdict.NO_WITNESS_IN_RANGE,
        witness_times=(),
        residuals=(),
        method="nested_ball",
        horizon=hi - lo,
        tolerance=2.0 * eps0,
        truncation_hit=False,
        parameters=dict(stalls),
    )


def run_construction(name: str, eps0: float = 0.5, stages: int | None = None,
                     direction: int = 1) -> NestedBallResult:
    """The chained-ball construction on instances that carry one."""
    _check_name(name)
    family = build_family(name)
    if name.startswith("halfline-"):
        start = family.space.indicator(0.0, 1.0)
        n = stages if stages is not None else 6
    elif name.startswith("line-"):
        start = family.space.indicator(-0.5, 0.5)
        n = stages if stages is not None else 4
    else:
        raise ValueError(f"{name}: no construction plan for this instance")
    return nested_ball_construct(family, start, eps0, n, direction=direction)


def run_detector(name: str, tol: float | None = None,
                 horizon: float | None = None) -> RecurrenceReport:
    """The instance's stock return detector."""
    _check_name(name)
    family = build_family(name)
    if name in ("halfline-expdecay", "line-symmetric", "line-oneside"):
        eps0 = tol if tol is not None else 0.5
        if name == "line-oneside":
            # both directions stall: the flat left tail keeps return
            # residuals at the full starting norm
            stalls = {}
            for direction, key in ((1, "stalled_forward_after"),
                                   (-1, "stalled_backward_after")):
                try:
                    return run_construction(name, eps0=eps0,
                                            direction=direction).report
                except ConstructionStalledError as err:
                    stalls[key] = len(err.stages)
            return _stalled_report(family, eps0, stalls)
        return run_construction(name, eps0=eps0).report
    if name.startswith("dilation-"):
        eps = tol if tol is not None else _DETECTOR_TOL[name]
        bump = family.space.tent(0.8, 1.2)
        times = range(1, 9)
        return oracle_scan(family, bump, eps, times)
    scan_tol = tol if tol is not None else _DETECTOR_TOL[name]
    top = int(horizon if horizon is not None else _SCAN_HORIZON[name])
    times = range(1, top + 1)
    if name.startswith("halfline-"):
        f = family.space.indicator(0.0, 1.0)
    else:
        f = family.space.function(np.ones(family.space.n, dtype=complex))
    return direct_scan(family, f, times, tol=scan_tol)


# -- showcase analyses -----------------------------------------------------

def spectrum_plan(name: str, grid_points: int = 2048,
                  t0: float = 1.0) -> tuple[OperatorFamily, float]:
    """A matrix-sized variant of the instance for spectral analysis."""
    _check_name(name)
    if CATALOG[name].family_kind == "diagonal":
        return build_family(name), t0
    return build_family(name, grid_points=grid_points), t0


def rigidity_plan(name: str) -> tuple[str, float, range]:
    """(kind, tolerance, time ladder) for the stock rigidity scan."""
    _check_name(name)
    if name == "diagonal-irrational":
        return ("uniform", 0.05, range(1, 10001))
    if name == "diagonal-rational":
        return ("uniform", 1e-3, range(1, 65))
    return ("strong", 0.1, range(1, 65))


def run_rigidity(name: str, kind: str | None = None,
                 tol: float | None = None) -> RigidityReport:
    stock_kind, stock_tol, ladder = rigidity_plan(name)
    kind = kind or stock_kind
    tol = tol if tol is not None else stock_tol
    family = build_family(name)
    if kind == "uniform":
        return uniform_rigidity_scan(family, ladder, tol=tol)
    space = family.space
    if CATALOG[name].family_kind == "diagonal":
        v = space.function(np.ones(space.n, dtype=complex))
    else:
        lo, hi = space.window
        v = space.indicator(lo, lo + 1.0)
    v = v * (1.0 / space.norm(v))
    return rigidity_scan(family, [v], ladder, tol=tol)


def run_gdelta(name: str, k_max: int = 10 ** 6,
                horizon: float = 64.0) -> GdeltaReport:
    """Return-set depth of the instance's natural center vector."""
    _check_name(name)
    family = build_family(name)
    if name == "halfline-expdecay":
        vec = run_construction(name).vector
    elif name.startswith("diagonal-"):
        vec = family.space.function(np.ones(family.space.n, dtype=complex))
    else:
        raise ValueError(f"{name}: no stock depth plan")
    return gdelta_membership(family, vec, k_max, horizon=horizon)


# -- one-call pipeline -----------------------------------------------------

@dataclass(frozen=True)
class InstanceResult:
    """Everything the runner reports for one catalog instance."""

    name: str
    spec: InstanceSpec
    certificates: tuple[AdmissibilityCertificate, ...]
    criterion: CriterionReport
    secondary: tuple[CriterionReport, ...]
    detector: RecurrenceReport
    consistency: ConsistencyRecord


def run_consistency(name: str, criterion: CriterionReport | None = None,
                    detector: RecurrenceReport | None = None
                    ) -> ConsistencyRecord:
    _check_name(name)
    spec = CATALOG[name]
    if criterion is None:
        criterion = run_criterion(name)
    if detector is None:
        detector = run_detector(name)
    return cross_validate(name, criterion, detector,
                          sufficiency_only=spec.sufficiency_only)


def run_instance(name: str, horizon: float | None = None,
                 criterion_tol: float = 1e-4,
                 detector_tol: float | None = None) -> InstanceResult:
    """Admissibility, criterion, detector and cross-validation in order."""
    _check_name(name)
    spec = CATALOG[name]
    certs = run_admissibility(name)
    criterion = run_criterion(name, horizon=horizon, tol=criterion_tol)
    secondary = run_secondary_criteria(name, horizon=horizon,
                                       tol=criterion_tol)
    detector = run_detector(name, tol=detector_tol)
    record = cross_validate(name, criterion, detector,
                            sufficiency_only=spec.sufficiency_only)
    return InstanceResult(name, spec, certs, criterion, secondary, detector,
                          record)
