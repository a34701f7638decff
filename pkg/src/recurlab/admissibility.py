"""Sampled admissibility certificates for weights and flows.

Every check certifies an inequality of the form

    value(sample) <= claimed_m * exp(claimed_omega * |shift|) * reference(sample)

over a finite sample lattice and reports the worst ratio encountered.  A
certificate is a statement about the sampled lattice only; the checkers never
extrapolate.  Failures come with the witnessing sample.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidWeightError
from .spaces import DomainKind, DomainSpec, WeightFunction

__all__ = [
    "CertificateKind",
    "AdmissibilityCertificate",
    "check_weight_admissible",
    "check_lp_semiflow_admissible",
    "check_c0_semiflow_admissible",
    "check_condition_d",
]

#: Relative slack applied to every sampled inequality.
DEFAULT_TOLERANCE = 1e-9

#: Thresholds used by the compact-containment surrogate in the C0 check.
_DELTA_LADDER = tuple(0.5 ** k for k in range(0, 9))


class CertificateKind(enum.Enum):
    WEIGHT = "weight"
    LP_SEMIFLOW = "lp-semiflow"
    C0_SEMIFLOW = "c0-semiflow"
    CONDITION_D = "condition-d"


@dataclass(frozen=True)
class AdmissibilityCertificate:
    """Outcome of a sampled admissibility check.

    ``holds`` iff ``worst_ratio <= 1 + tolerance``.  The witness fields are
    populated exactly when the check failed.
    """

    kind: CertificateKind
    holds: bool
    worst_ratio: float
    claimed_m: float
    claimed_omega: float
    tolerance: float
    witness_point: float | None = None
    witness_time: float | None = None
    detail: str = ""

    def __post_init__(self):
        ok = self.worst_ratio <= 1.0 + self.tolerance
        if ok != self.holds:
            raise ValueError("certificate verdict inconsistent with ratio")


def _finish(kind, ratios, points, times, m, omega, tol, detail=""):
    worst = int(np.argmax(ratios))
    worst_ratio = float(ratios[worst])
    holds = worst_ratio <= 1.0 + tol
    return AdmissibilityCertificate(
        kind=kind,
        holds=holds,
        worst_ratio=worst_ratio,
        claimed_m=m,
        claimed_omega=omega,
        tolerance=tol,
        witness_point=None if holds else float(points[worst]),
        witness_time=None if holds else float(times[worst]),
        detail=detail,
    )


def check_weight_admissible(weight: WeightFunction, domain: DomainSpec,
                            t_samples, shift_samples,
                            tolerance: float = DEFAULT_TOLERANCE
                            ) -> AdmissibilityCertificate:
    """Certify the weight's shift inequality on a sample lattice.

    Checks ``w(t) <= claimed_m * exp(claimed_omega * |s|) * w(t + s)`` for all
    sampled ``t`` and shifts ``s`` whose sum stays in the truncated window;
    pairs leaving the window are clipped away.  On the half-line only
    non-negative shifts are meaningful and negative ones are rejected.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    shifts = np.asarray(shift_samples, dtype=float)
    if domain.kind is DomainKind.HALF_LINE and np.any(shifts < 0):
        raise ValueError("negative shifts are outside the half-line time set")
    lo, hi = domain.window
    tt, ss = np.meshgrid(t_samples, shifts, indexing="ij")
    tt, ss = tt.ravel(), ss.ravel()
    keep = (tt + ss >= lo) & (tt + ss <= hi) & (tt >= lo) & (tt <= hi)
    tt, ss = tt[keep], ss[keep]
    if tt.size == 0:
        raise ValueError("no sample pairs remain inside the window")
    base = weight(tt)
    shifted = weight(tt + ss)
    for name, vals in (("w(t)", base), ("w(t+s)", shifted)):
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise InvalidWeightError(f"{name} non-positive or non-finite on samples")
    m, omega = weight.claimed_m, weight.claimed_omega
    ratios = base / (m * np.exp(omega * np.abs(ss)) * shifted)
    return _finish(CertificateKind.WEIGHT, ratios, tt, ss, m, omega, tolerance,
                   detail=f"{tt.size} sample pairs")


def check_lp_semiflow_admissible(weight: WeightFunction, flow, domain: DomainSpec,
                                 t_samples, x_samples,
                                 tolerance: float = DEFAULT_TOLERANCE
                                 ) -> AdmissibilityCertificate:
    """Certify the integral-norm admissibility inequality for a flow.

    Checks ``w(x) <= claimed_m * exp(claimed_omega * |t|) * w(phi(t,x)) * |J|``
    with ``J`` the spatial Jacobian determinant of the time-t map, over the
    sampled (t, x) lattice.  A vanishing Jacobian at a sample is an immediate
    failure with that sample as witness.
    """
    t_samples = np.asarray(t_samples, dtype=float)
    x_samples = np.asarray(x_samples, dtype=float)
    tt, xx = np.meshgrid(t_samples, x_samples, indexing="ij")
    tt, xx = tt.ravel(), xx.ravel()
    base = weight(xx)
    if np.any(~np.isfinite(base)) or np.any(base <= 0):
        raise InvalidWeightError("weight non-positive or non-finite on samples")
    moved = flow.forward(tt, xx)
    jac = np.abs(flow.jacobian(tt, xx))
    m, omega = weight.claimed_m, weight.claimed_omega
    singular = ~(jac > 0) | ~np.isfinite(moved)
    if np.any(singular):
        k = int(np.argmax(singular))
        return AdmissibilityCertificate(
            kind=CertificateKind.LP_SEMIFLOW, holds=False, worst_ratio=np.inf,
            claimed_m=m, claimed_omega=omega, tolerance=tolerance,
            witness_point=float(xx[k]), witness_time=float(tt[k]),
            detail="singular or non-finite time-t map at witness")
    ratios = base / (m * np.exp(omega * np.abs(tt)) * weight(moved) * jac)
    return _finish(CertificateKind.LP_SEMIFLOW, ratios, xx, tt, m, omega,
                   tolerance, detail=f"{tt.size} sample pairs")


def check_c0_semiflow_admissible(weight: WeightFunction, flow, domain: DomainSpec,
                                 t_samples, x_samples, compacts,
                                 tolerance: float = DEFAULT_TOLERANCE
                                 ) -> AdmissibilityCertificate:
    """Certify the sup-norm admissibility conditions for a flow.

    Two parts: (i) the pointwise inequality
    ``w(x) <= claimed_m * exp(claimed_omega * |t|) * w(phi(t,x))`` on the
    lattice, and (ii) a compact-containment surrogate: for every compact
    interval in ``compacts``, every sampled time and every threshold in a
    fixed halving ladder, the sampled set

        {x : phi(t, x) in K and w(x) >= delta}

    must stay clear of the outermost two lattice points on every open window
    edge.  An unbounded-looking set (touching a truncation edge) fails the
    certificate with that (x, t) as witness.
    """
    compacts = tuple(compacts)
    t_samples = np.asarray(t_samples, dtype=float)
    x_samples = np.sort(np.asarray(x_samples, dtype=float))
    if x_samples.size < 8:
        raise ValueError("need at least 8 spatial samples for the edge margin")
    tt, xx = np.meshgrid(t_samples, x_samples, indexing="ij")
    tt, xx = tt.ravel(), xx.ravel()
    base = weight(xx)
    if np.any(~np.isfinite(base)) or np.any(base <= 0):
        raise InvalidWeightError("weight non-positive or non-finite on samples")
    moved = flow.forward(tt, xx)
    m, omega = weight.claimed_m, weight.claimed_omega
    ratios = base / (m * np.exp(omega * np.abs(tt)) * weight(moved))
    cert = _finish(CertificateKind.C0_SEMIFLOW, ratios, xx, tt, m, omega,
                   tolerance, detail=f"{tt.size} sample pairs")
    if not cert.holds:
        return cert

    left_open, right_open = domain.open_edges
    forbidden = np.zeros(x_samples.size, dtype=bool)
    if left_open:
        forbidden[:2] = True
    if right_open:
        forbidden[-2:] = True
    rho_x = weight(x_samples)
    for a, b in compacts:
        for t in t_samples:
            img = flow.forward(np.full_like(x_samples, t), x_samples)
            in_pre = (img >= a) & (img <= b)
            for delta in _DELTA_LADDER:
                members = in_pre & (rho_x >= delta)
                bad = members & forbidden
                if np.any(bad):
                    k = int(np.argmax(bad))
                    return AdmissibilityCertificate(
                        kind=CertificateKind.C0_SEMIFLOW, holds=False,
                        worst_ratio=2.0, claimed_m=m, claimed_omega=omega,
                        tolerance=tolerance,
                        witness_point=float(x_samples[k]), witness_time=float(t),
                        detail=f"preimage of [{a}, {b}] at threshold {delta:g} "
                               "touches a truncation edge")
    return cert


def check_condition_d(flow, domain: DomainSpec, t_samples, x_samples,
                      compacts, tolerance: float = DEFAULT_TOLERANCE
                      ) -> AdmissibilityCertificate:
    """Certify eventual escape of the flow from every compact interval.

    For each compact [a, b] the check asks for a sampled time ``t0`` such
    that for all sampled ``t >= t0`` no sampled point lands in [a, b] under
    the time-t map.  Operationally: the trailing segment of the time ladder
    must be intersection-free, which holds iff the latest sampled time is.
    ``worst_ratio`` is 0 when every compact escapes and 2 otherwise, keeping
    the holds/ratio invariant of the certificate type.
    """
    compacts = tuple(compacts)
    t_samples = np.sort(np.asarray(t_samples, dtype=float))
    x_samples = np.asarray(x_samples, dtype=float)
    for a, b in compacts:
        hit_last = None
        for t in t_samples[::-1]:
            img = flow.forward(np.full_like(x_samples, t), x_samples)
            hits = (img >= a) & (img <= b)
            if np.any(hits):
                hit_last = (t, float(x_samples[int(np.argmax(hits))]))
                break
        if hit_last is not None and hit_last[0] == t_samples[-1]:
            return AdmissibilityCertificate(
                kind=CertificateKind.CONDITION_D, holds=False, worst_ratio=2.0,
                claimed_m=1.0, claimed_omega=0.0, tolerance=tolerance,
                witness_point=hit_last[1], witness_time=float(hit_last[0]),
                detail=f"flow still meets [{a}, {b}] at the final sampled time")
    return AdmissibilityCertificate(
        kind=CertificateKind.CONDITION_D, holds=True, worst_ratio=0.0,
        claimed_m=1.0, claimed_omega=0.0, tolerance=tolerance,
        detail=f"{len(compacts)} compacts escape within the time ladder")
