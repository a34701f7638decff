"""Weight and flow criteria that predict recurrence, and cross-validation.

Each criterion inspects only weights, flows and Jacobians; none of them
touches an operator family.  The detectors in :mod:`recurlab.recurrence`
measure actual returns.  :func:`cross_validate` compares the two and tags
the outcome, which is the laboratory's main consistency instrument.

"Decays along an unbounded time set" is operationalized the same way
everywhere: the quantity must fall below the criterion tolerance at
sampled times covering at least three dyadic magnitude scales and
reaching half the horizon.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .admissibility import AdmissibilityCertificate
from .errors import CriterionUnavailableError, PreconditionError
from .recurrence import Verdict, spans_dyadic_scales
from .semiflows import Semiflow
from .spaces import WeightFunction

__all__ = [
    "Criterion",
    "CriterionReport",
    "ConsistencyRecord",
    "MassCurve",
    "dyadic_time_ladder",
    "liminf_criterion_halfline",
    "pointwise_decay_criterion_line",
    "line_joint_criterion",
    "lp_mass_curve",
    "lp_semiflow_criterion",
    "c0_semiflow_criterion",
    "weighted_jacobian_criterion_lp",
    "weighted_jacobian_criterion_c0",
    "discrete_spectrum_criterion",
    "cross_validate",
]

DEFAULT_CRITERION_TOL = 1e-4
DEFAULT_HORIZON = 1000.0


class Criterion(enum.Enum):
    LIMINF_HALFLINE = "liminf-halfline"
    POINTWISE_DECAY_LINE = "pointwise-decay-line"
    LINE_JOINT = "line-joint"
    LP_SEMIFLOW_MASS = "lp-semiflow-mass"
    C0_SEMIFLOW_SUP = "c0-semiflow-sup"
    WEIGHTED_JACOBIAN_LP = "weighted-jacobian-lp"
    WEIGHTED_JACOBIAN_C0 = "weighted-jacobian-c0"
    DISCRETE_SPECTRUM = "discrete-spectrum"


@dataclass(frozen=True)
class MassCurve:
    times: tuple[float, ...]
    values: tuple[float, ...]
    label: str

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError("curve times and values must align")


@dataclass(frozen=True)
class CriterionReport:
    criterion: Criterion
    holds: bool
    horizon: float
    tolerance: float
    direction: str = "forward"
    passing_times: tuple[float, ...] = ()
    curves: tuple[MassCurve, ...] = ()
    notes: tuple[str, ...] = ()
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConsistencyRecord:
    """Comparison of a criterion prediction with a detector verdict.

    ``CriterionNoDetectorYes`` is the alarming direction: the detector
    certified returns where the criterion sees an obstruction.
    """

    instance: str
    criterion: Criterion
    criterion_holds: bool
    detector_verdict: Verdict
    tag: str
    note: str = ""


def _finite(v: np.ndarray) -> np.ndarray:
    return np.where(np.isfinite(v), v, np.inf)


def dyadic_time_ladder(horizon: float, start: float = 1.0) -> list[float]:
    """Times start * {2**k, 3 * 2**k} up to the horizon, sorted."""
    out = set()
    t = float(start)
    while t <= horizon:
        out.add(t)
        if 1.5 * t <= horizon:
            out.add(1.5 * t)
        t *= 2.0
    return sorted(out)


def _eventually_small(times: Sequence[float], values: Sequence[float],
                      tol: float, horizon: float):
    passing = tuple(t for t, v in zip(times, values) if v < tol)
    ok = (spans_dyadic_scales(passing)
          and bool(passing)
          and max(abs(t) for t in passing) >= horizon / 2.0)
    return ok, passing


def liminf_criterion_halfline(weight: WeightFunction,
                              certificate: AdmissibilityCertificate,
                              horizon: float = DEFAULT_HORIZON,
                              tol: float = DEFAULT_CRITERION_TOL,
                              samples_per_window: int = 256) -> CriterionReport:
    """Half-line translation criterion: the weight dips arbitrarily low.

    Measures m(x) = min of the weight over [x, 2x] for dyadic x; the
    criterion holds when the dips persist across scales up to the
    horizon.  Only meaningful for weights already certified admissible,
    hence the mandatory certificate.
    """
    if certificate is None or not certificate.holds:
        raise PreconditionError(
            "liminf criterion needs a passing weight admissibility certificate")
    xs = []
    x = 1.0
    while 2.0 * x <= horizon:
        xs.append(x)
        x *= 2.0
    mins = []
    for x0 in xs:
        pts = np.linspace(x0, 2.0 * x0, samples_per_window)
        mins.append(float(np.min(_finite(np.asarray(weight(pts), dtype=float)))))
    passing = tuple(x for x, m in zip(xs, mins) if m < tol)
    holds = (spans_dyadic_scales(passing)
             and bool(passing)
             and max(passing) >= horizon / 4.0)
    return CriterionReport(
        criterion=Criterion.LIMINF_HALFLINE,
        holds=holds,
        horizon=horizon,
        tolerance=tol,
        direction="forward",
        passing_times=passing,
        curves=(MassCurve(tuple(xs), tuple(mins), "window minimum of the weight"),),
        evidence={"samples_per_window": samples_per_window,
                  "certificate_kind": certificate.kind.value},
    )


def pointwise_decay_criterion_line(weight: WeightFunction,
                                   direction: str = "forward",
                                   horizon: float = DEFAULT_HORIZON,
                                   tol: float = DEFAULT_CRITERION_TOL,
                                   probe: Sequence[float] | None = None
                                   ) -> CriterionReport:
    """One direction of the line translation criterion.

    s(t) = max over a fixed probe set X of weight(x + t) (forward) or
    weight(x - t) (backward); the direction holds when s decays along an
    unbounded time set.  The probe set is the surrogate for "every x".
    """
    if direction not in ("forward", "backward"):
        raise ValueError("direction must be forward or backward")
    if probe is None:
        probe = [float(s * 2.0 ** k) for k in range(-1, 5) for s in (-1, 1)] + [0.0]
    probe_arr = np.asarray(sorted(probe), dtype=float)
    sign = 1.0 if direction == "forward" else -1.0
    times = dyadic_time_ladder(horizon)
    sup = []
    for t in times:
        vals = _finite(np.asarray(weight(probe_arr + sign * t), dtype=float))
        sup.append(float(np.max(vals)))
    holds, passing = _eventually_small(times, sup, tol, horizon)
    return CriterionReport(
        criterion=Criterion.POINTWISE_DECAY_LINE,
        holds=holds,
        horizon=horizon,
        tolerance=tol,
        direction=direction,
        passing_times=passing,
        curves=(MassCurve(tuple(times), tuple(sup),
                          f"probe-set weight sup, {direction}"),),
        evidence={"probe": tuple(float(x) for x in probe_arr)},
    )


def line_joint_criterion(weight: WeightFunction,
                         horizon: float = DEFAULT_HORIZON,
                         tol: float = DEFAULT_CRITERION_TOL,
                         probe: Sequence[float] | None = None
                         ) -> CriterionReport:
    """Conjunction of the forward and backward line criteria.

    A translation group returns along positive times exactly when it
    returns along negative ones, so a sound prediction must see decay on
    both sides; a one-sided dip is not enough.  Both per-direction curves
    are reported.
    """
    fwd = pointwise_decay_criterion_line(weight, "forward", horizon, tol, probe)
    bwd = pointwise_decay_criterion_line(weight, "backward", horizon, tol, probe)
    return CriterionReport(
        criterion=Criterion.LINE_JOINT,
        holds=fwd.holds and bwd.holds,
        horizon=horizon,
        tolerance=tol,
        direction="both",
        passing_times=tuple(sorted(set(fwd.passing_times)
                                   & set(bwd.passing_times))),
        curves=fwd.curves + bwd.curves,
        notes=(f"forward={'holds' if fwd.holds else 'fails'}",
               f"backward={'holds' if bwd.holds else 'fails'}"),
        evidence={"forward_holds": fwd.holds, "backward_holds": bwd.holds},
    )


def lp_mass_curve(weight: WeightFunction, flow: Semiflow,
                  compact: tuple[float, float], times: Sequence[float],
                  n_quad: int = 4096,
                  keep_mask: np.ndarray | None = None) -> MassCurve:
    """Forward-image mass of a compact under the flow, per time.

    m(t) = integral over K of weight(phi(t, x)) |J(t, x)| dx, computed by
    the midpoint rule on a fine lattice; m(0) is the plain weighted
    measure of K.  ``keep_mask`` restricts the lattice to a measurable
    subset of K.
    """
    a, b = compact
    if not b > a:
        raise ValueError("compact must be a nondegenerate interval")
    h = (b - a) / n_quad
    xs = a + (np.arange(n_quad) + 0.5) * h
    if keep_mask is not None:
        xs = xs[keep_mask]
    vals = []
    for t in times:
        tt = np.full(xs.shape, float(t))
        img = flow.forward(tt, xs)
        jac = np.abs(flow.jacobian(tt, xs))
        dens = _finite(np.asarray(weight(img), dtype=float)) * jac
        vals.append(float(np.sum(dens) * h))
    label = "forward-image mass" if keep_mask is None else "refined forward-image mass"
    return MassCurve(tuple(float(t) for t in times), tuple(vals), label)


def lp_semiflow_criterion(weight: WeightFunction, flow: Semiflow,
                          compact: tuple[float, float],
                          times: Sequence[float] | None = None,
                          horizon: float = 100.0,
                          tol: float = DEFAULT_CRITERION_TOL,
                          n_quad: int = 4096,
                          n_refine: int = 8) -> CriterionReport:
    """Integral-norm flow criterion: compacts lose their weighted mass.

    Two curves: the full forward-image mass of K, and a refined curve
    with the worst cells removed (the 1/n_refine fraction of the initial
    mass carrying the largest late-time density).  The removal mirrors
    the freedom to discard a small part of the compact; the verdict is
    read off the refined curve.
    """
    if times is None:
        times = dyadic_time_ladder(horizon)
    times = [float(t) for t in times]
    a, b = compact
    h = (b - a) / n_quad
    xs = a + (np.arange(n_quad) + 0.5) * h
    mu = _finite(np.asarray(weight(xs), dtype=float)) * h
    full = lp_mass_curve(weight, flow, compact, times, n_quad)
    t_star = max(times)
    tt = np.full(xs.shape, t_star)
    late = (_finite(np.asarray(weight(flow.forward(tt, xs)), dtype=float))
            * np.abs(flow.jacobian(tt, xs)))
    order = np.argsort(-late)
    budget = float(np.sum(mu)) / n_refine
    removed = np.zeros(n_quad, dtype=bool)
    acc = 0.0
    for i in order:
        if acc + mu[i] > budget:
            break
        removed[i] = True
        acc += float(mu[i])
    refined = lp_mass_curve(weight, flow, compact, times, n_quad,
                            keep_mask=~removed)
    holds, passing = _eventually_small(refined.times, refined.values,
                                       tol, max(times))
    return CriterionReport(
        criterion=Criterion.LP_SEMIFLOW_MASS,
        holds=holds,
        horizon=max(times),
        tolerance=tol,
        direction="forward",
        passing_times=passing,
        curves=(full, refined),
        evidence={"compact": (float(a), float(b)),
                  "initial_mass": float(np.sum(mu)),
                  "removed_mass": acc,
                  "n_refine": n_refine},
    )


def c0_semiflow_criterion(weight: WeightFunction, flow: Semiflow,
                          compact: tuple[float, float],
                          x_window: tuple[float, float],
                          times: Sequence[float] | None = None,
                          horizon: float = 100.0,
                          tol: float = DEFAULT_CRITERION_TOL,
                          n_scan: int = 8192) -> CriterionReport:
    """Sup-norm flow criterion: weight dies on preimages and images of K.

    s_pre(t) = sup of the weight over sampled x with phi(t, x) in K;
    s_img(t) = sup of weight(phi(t, x)) over sampled x in K; an empty sup
    is zero.  The quantity max(s_pre, s_img) must decay.  Needs the
    weight bounded away from zero on K, else the compact carries no
    sup-norm obstruction to measure.
    """
    if times is None:
        times = dyadic_time_ladder(horizon)
    times = [float(t) for t in times]
    a, b = compact
    lo, hi = x_window
    xs = np.linspace(lo, hi, n_scan)
    wx = _finite(np.asarray(weight(xs), dtype=float))
    k_mask = (xs >= a) & (xs <= b)
    if not np.any(k_mask) or float(np.min(wx[k_mask])) <= 0.0:
        raise PreconditionError(
            "sup-norm criterion needs the weight positive on the compact")
    sup = []
    pres = []
    imgs = []
    for t in times:
        tt = np.full(xs.shape, float(t))
        fx = flow.forward(tt, xs)
        pre_mask = (fx >= a) & (fx <= b)
        s_pre = float(np.max(wx[pre_mask])) if np.any(pre_mask) else 0.0
        wimg = _finite(np.asarray(weight(fx[k_mask]), dtype=float))
        s_img = float(np.max(wimg)) if wimg.size else 0.0
        pres.append(s_pre)
        imgs.append(s_img)
        sup.append(max(s_pre, s_img))
    holds, passing = _eventually_small(times, sup, tol, max(times))
    return CriterionReport(
        criterion=Criterion.C0_SEMIFLOW_SUP,
        holds=holds,
        horizon=max(times),
        tolerance=tol,
        direction="forward",
        passing_times=passing,
        curves=(MassCurve(tuple(times), tuple(pres), "preimage weight sup"),
                MassCurve(tuple(times), tuple(imgs), "image weight sup"),
                MassCurve(tuple(times), tuple(sup), "combined weight sup")),
        evidence={"compact": (float(a), float(b)), "n_scan": n_scan},
    )


def _backward_map(flow: Semiflow):
    """Time-t inverse map of the flow, with its Jacobian."""
    if flow.group_like:
        return (lambda t, y: flow.forward(-t, y),
                lambda t, y: flow.jacobian(-t, y))
    if flow.inverse is None:
        raise CriterionUnavailableError(
            f"{flow.name}: no inverse available for the backward quantity")

    def back(t, y):
        return flow.inverse(t, y)

    def back_jac(t, y, d=1e-6):
        return (flow.inverse(t, y + d) - flow.inverse(t, y - d)) / (2 * d)

    return back, back_jac


def weighted_jacobian_criterion_lp(weight: WeightFunction, flow: Semiflow,
                                   compact: tuple[float, float],
                                   times: Sequence[float] | None = None,
                                   horizon: float = 100.0,
                                   tol: float = DEFAULT_CRITERION_TOL,
                                   n_points: int = 64,
                                   condition_d: AdmissibilityCertificate | None = None,
                                   ) -> CriterionReport:
    """Backward weighted-Jacobian criterion in the integral norm.

    For each sampled x in K the quantity
    q_x(t) = weight(psi(t, x)) |J_psi(t, x)| must dip below tol along an
    increasing subsequence of times, psi being the backward map.  The
    reported curve is the worst (largest) q_x over the sample per time.
    The flow must be invertible in one of two senses: a genuine group, or
    a semiflow with a passing escape certificate for K.  Also samples the
    transport inequality
    weight(x) <= M * exp(omega t) * weight(phi(t, x)) |J(t, x)| and
    records the worst constant seen, as a health check on the weight/flow
    pairing.
    """
    if not flow.group_like:
        if condition_d is None or not condition_d.holds:
            raise PreconditionError(
                "backward criterion needs a group flow or a passing "
                "escape certificate for the compact")
    back, back_jac = _backward_map(flow)
    if times is None:
        times = dyadic_time_ladder(horizon)
    times = [float(t) for t in times]
    a, b = compact
    step = (b - a) / n_points
    xs = a + (np.arange(n_points) + 0.5) * step
    per_time = np.empty((len(times), n_points))
    for i, t in enumerate(times):
        tt = np.full(xs.shape, float(t))
        per_time[i] = (_finite(np.asarray(weight(back(tt, xs)), dtype=float))
                       * np.abs(back_jac(tt, xs)))
    vals = [float(v) for v in per_time.max(axis=1)]
    point_ok = []
    for j in range(n_points):
        ok, _ = _eventually_small(times, [float(v) for v in per_time[:, j]],
                                  tol, max(times))
        point_ok.append(ok)
    holds_curve, passing = _eventually_small(times, vals, tol, max(times))
    holds = holds_curve and all(point_ok)
    worst = 0.0
    m, om = weight.claimed_m, weight.claimed_omega
    for t in times[: min(len(times), 6)]:
        tt = np.full(xs.shape, float(t))
        denom = (m * math.exp(om * abs(t))
                 * _finite(np.asarray(weight(flow.forward(tt, xs)), dtype=float))
                 * np.abs(flow.jacobian(tt, xs)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = _finite(np.asarray(weight(xs), dtype=float)) / denom
        ratio = ratio[np.isfinite(ratio)]
        if ratio.size:
            worst = max(worst, float(np.max(ratio)))
    return CriterionReport(
        criterion=Criterion.WEIGHTED_JACOBIAN_LP,
        holds=holds,
        horizon=max(times),
        tolerance=tol,
        direction="forward",
        passing_times=passing,
        curves=(MassCurve(tuple(times), tuple(vals),
                          "backward weighted density, worst point"),),
        evidence={"compact": (float(a), float(b)),
                  "points_passing": int(sum(point_ok)),
                  "points_total": n_points,
                  "transport_worst_ratio": worst},
    )


def weighted_jacobian_criterion_c0(weight: WeightFunction, flow: Semiflow,
                                   compact: tuple[float, float],
                                   times: Sequence[float] | None = None,
                                   horizon: float = 100.0,
                                   tol: float = DEFAULT_CRITERION_TOL,
                                   n_scan: int = 4096) -> CriterionReport:
    """Backward weighted criterion in the sup norm.

    r(t) = sup over K of weight(psi(t, x)) for the backward map psi.  The
    limit target is taken as zero; a note records that reading, since
    decay to a positive constant would also be compatible with some
    bounded-orbit behaviour and is deliberately not accepted here.
    """
    back, _ = _backward_map(flow)
    if times is None:
        times = dyadic_time_ladder(horizon)
    times = [float(t) for t in times]
    a, b = compact
    xs = np.linspace(a, b, n_scan)
    vals = []
    for t in times:
        tt = np.full(xs.shape, float(t))
        w = _finite(np.asarray(weight(back(tt, xs)), dtype=float))
        vals.append(float(np.max(w)) if w.size else 0.0)
    holds, passing = _eventually_small(times, vals, tol, max(times))
    return CriterionReport(
        criterion=Criterion.WEIGHTED_JACOBIAN_C0,
        holds=holds,
        horizon=max(times),
        tolerance=tol,
        direction="forward",
        passing_times=passing,
        curves=(MassCurve(tuple(times), tuple(vals), "backward weight sup"),),
        notes=("limit target taken as zero",),
        evidence={"compact": (float(a), float(b))},
    )


def discrete_spectrum_criterion(frequencies: Sequence[float],
                                tol: float = 1e-12) -> CriterionReport:
    """Sufficiency-only criterion for diagonal phase families.

    Unimodular eigenvalues with dense eigenvector span force returns of
    every vector; the check certifies unimodularity of each phase.  This
    direction never rules recurrence out, so a failing check reports
    holds = False with a note rather than claiming an obstruction.
    """
    freqs = np.asarray(frequencies, dtype=float)
    if freqs.ndim != 1 or freqs.size == 0:
        raise ValueError("frequencies must be a nonempty 1-D sequence")
    gap = float(np.max(np.abs(np.abs(np.exp(1j * freqs)) - 1.0)))
    holds = bool(np.all(np.isfinite(freqs))) and gap <= tol
    return CriterionReport(
        criterion=Criterion.DISCRETE_SPECTRUM,
        holds=holds,
        horizon=0.0,
        tolerance=tol,
        direction="both",
        notes=("sufficiency only: unimodular point spectrum with dense span",),
        evidence={"n_frequencies": int(freqs.size), "unimodularity_gap": gap},
    )


def cross_validate(instance: str, criterion: CriterionReport,
                   detector, sufficiency_only: bool = False
                   ) -> ConsistencyRecord:
    """Tag the agreement between a criterion and a detector report.

    A truncation-limited detector that still certified witnesses at the
    reachable scales supports a positive criterion: the window, not the
    dynamics, capped the scale count, so the pair agrees with a caveat.
    A truncation-limited detector with witnesses cannot contradict a
    negative criterion either, since returns at finitely many times never
    establish recurrence.  ``CriterionNoDetectorYes`` is reserved for a
    full-scale witness set against a necessary criterion; a
    sufficiency-only criterion cannot be contradicted that way.
    """
    verdict = detector.verdict
    witnesses = tuple(getattr(detector, "witness_times", ()))
    if verdict is Verdict.TRUNCATION_LIMITED:
        if criterion.holds and witnesses:
            tag = "Agree"
            note = "returns confirmed at window-reachable scales only"
        elif criterion.holds:
            tag = "CriterionYesDetectorNo"
            note = "window truncated the search before any witness"
        else:
            tag = "Agree"
            note = ("finite-scale returns do not contradict the obstruction"
                    if witnesses else "window truncated an already negative search")
        return ConsistencyRecord(instance, criterion.criterion,
                                 criterion.holds, verdict, tag, note)
    found = verdict is Verdict.WITNESS_FOUND
    if criterion.holds and found:
        tag = "Agree"
        note = ""
    elif not criterion.holds and not found:
        tag = "Agree"
        note = ""
    elif criterion.holds and not found:
        tag = "CriterionYesDetectorNo"
        note = "prediction unconfirmed within the scanned window"
    else:
        if sufficiency_only:
            tag = "Agree"
            note = "sufficiency-only criterion silent, detector positive"
        else:
            tag = "CriterionNoDetectorYes"
            note = "detector certified returns against the criterion"
    return ConsistencyRecord(instance, criterion.criterion, criterion.holds,
                             verdict, tag, note)
