"""Experiment driver: run a config, collect reports, write deterministic files.

One run proceeds per instance in a fixed order: admissibility checks,
then criteria, then detectors, then cross-validation, then any extra
analyses the config asked for.  Report files carry no timestamps or
environment detail, so running the same config twice produces
byte-identical output; wall time lives only on the in-memory record.

CSV rows use one fixed column set and one row per measured (time,
quantity) pair.  The structured summary carries the verdicts, tags and
certificate outcomes, keyed by instance.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from . import catalog as cat
from .catalog import InstanceResult, make_flow, make_weight
from .admissibility import (check_c0_semiflow_admissible, check_condition_d,
                            check_lp_semiflow_admissible,
                            check_weight_admissible)
from .config import ExperimentConfig
from .criteria import (c0_semiflow_criterion, cross_validate,
                       discrete_spectrum_criterion, liminf_criterion_halfline,
                       line_joint_criterion, lp_semiflow_criterion)
from .errors import (ConstructionStalledError, CriterionUnavailableError,
                     PreconditionError)
from .matrices import (assemble_matrix, operator_norm_estimate,
                       spectral_radius_estimate)
from .operators import (CompositionFamily, DiagonalFamily, OperatorFamily,
                        TranslationFamily, coordinate_space, rotate_family)
from .recurrence import direct_scan, oracle_scan
from .spaces import DomainKind, DomainSpec, WeightedGridSpace

__all__ = ["RunRecord", "run", "csv_rows", "summary_dict", "write_reports",
           "CSV_COLUMNS"]

CSV_COLUMNS = ("instance", "analysis", "quantity", "t_or_x", "value", "tol",
               "horizon", "truncated", "method")


@dataclass(frozen=True)
class RunRecord:
    """Everything one run produced, plus process bookkeeping."""

    config: ExperimentConfig
    config_hash: str
    version: str
    wall_time: float
    results: tuple[InstanceResult, ...]
    extras: dict
    exit_code: int


# -- custom (non-catalog) instances ---------------------------------------

def _custom_space(cfg: ExperimentConfig) -> WeightedGridSpace:
    sc = cfg.space
    w = make_weight(cfg.weight_name)
    if sc.domain == "halfline":
        dom = DomainSpec(DomainKind.HALF_LINE, trunc=sc.trunc)
    elif sc.domain == "line":
        dom = DomainSpec(DomainKind.LINE, trunc=sc.trunc)
    else:
        dom = DomainSpec(DomainKind.OPEN_BOX, (sc.window,))
    return WeightedGridSpace(dom, sc.grid_points, w, mode=sc.mode, p=sc.p)


def _custom_family(cfg: ExperimentConfig) -> OperatorFamily:
    fc = cfg.family
    if fc.kind == "diagonal":
        space = coordinate_space(len(fc.frequencies))
        fam: OperatorFamily = DiagonalFamily(fc.frequencies, space)
    else:
        space = _custom_space(cfg)
        if fc.kind == "translation":
            fam = TranslationFamily(space)
        else:
            fam = CompositionFamily(space, make_flow("dilation"))
    if fc.rotation is not None:
        fam = rotate_family(fam, *fc.rotation)
    return fam


def _custom_admissibility(cfg: ExperimentConfig):
    fc = cfg.family
    if fc.kind == "diagonal":
        return ()
    space = _custom_space(cfg)
    dom = space.domain
    w = make_weight(cfg.weight_name)
    lo, hi = dom.window
    if fc.kind == "translation":
        ts = np.linspace(max(lo, -32.0), min(hi, 32.0), 65)
        pos = np.array([0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0])
        if dom.kind is DomainKind.HALF_LINE:
            shifts = pos
        else:
            shifts = np.concatenate([-pos[::-1], pos])
        return (check_weight_admissible(w, dom, ts, shifts),)
    flow = make_flow("dilation")
    span = hi - lo
    compact = (lo + 0.3 * span, lo + 0.4 * span)
    ts = np.array([0.5, 1.0, 2.0, 4.0])
    xs = np.linspace(lo + 0.005 * span, hi - 0.005 * span, 4096)
    cond_d = check_condition_d(flow, dom, np.array([1.0, 2.0, 4.0, 8.0]), xs,
                               [compact])
    if space.mode == "lp":
        main = check_lp_semiflow_admissible(
            w, flow, dom, np.concatenate([-ts[::-1], ts]), xs)
    else:
        main = check_c0_semiflow_admissible(w, flow, dom, ts, xs, [compact])
    return (main, cond_d)


def _custom_criterion(cfg: ExperimentConfig, certs):
    fc = cfg.family
    w = make_weight(cfg.weight_name) if cfg.weight_name else None
    horizon = cfg.analysis.horizon
    tol = cfg.analysis.criterion_tol
    if fc.kind == "diagonal":
        return discrete_spectrum_criterion(fc.frequencies)
    if fc.kind == "translation":
        if cfg.space.domain == "halfline":
            return liminf_criterion_halfline(w, certs[0],
                                             horizon=horizon or 1000.0,
                                             tol=tol)
        return line_joint_criterion(w, horizon=horizon or 1000.0, tol=tol)
    lo, hi = cfg.space.window
    span = hi - lo
    compact = (lo + 0.3 * span, lo + 0.4 * span)
    flow = make_flow("dilation")
    if cfg.space.mode == "lp":
        return lp_semiflow_criterion(w, flow, compact,
                                     horizon=horizon or 64.0, tol=tol)
    return c0_semiflow_criterion(w, flow, compact, (lo, hi),
                                 horizon=horizon or 64.0, tol=tol)


def _custom_detector(cfg: ExperimentConfig, family: OperatorFamily):
    tol = cfg.analysis.detector_tol or 1e-3
    horizon = int(cfg.analysis.horizon or 64)
    space = family.space
    if cfg.family.kind == "diagonal":
        f = space.function(np.ones(space.n, dtype=complex))
        return direct_scan(family, f, range(1, horizon + 1), tol=tol)
    if cfg.family.kind == "dilation":
        lo, hi = space.window
        mid = lo + 0.3 * (hi - lo)
        bump = space.tent(0.8 * mid, 1.2 * mid)
        return oracle_scan(family, bump, tol, range(1, 9))
    lo, _ = space.window
    f = space.indicator(lo, lo + 1.0)
    return direct_scan(family, f, range(1, horizon + 1), tol=tol)


_UNAVAILABLE = "unavailable"


def _run_one(cfg: ExperimentConfig, name: str) -> tuple[InstanceResult, dict]:
    """Pipeline for one instance; extras keyed by analysis name."""
    analyses = cfg.analysis.run
    is_catalog = cfg.instance is not None
    spec = (cat.CATALOG[name] if is_catalog
            else cat.InstanceSpec(
                name=name, summary="custom instance",
                weight=cfg.weight_name or "flat",
                family_kind=cfg.family.kind,
                norm_mode=(cfg.space.mode if cfg.space else "c0sup"),
                expected_recurrent=False,
                expected_verdict=None,
                provenance="user config",
                sufficiency_only=cfg.family.kind == "diagonal"))

    certs = ()
    if "admissibility" in analyses:
        certs = (cat.run_admissibility(name) if is_catalog
                 else _custom_admissibility(cfg))

    criterion = None
    secondary = ()
    criterion_note = ""
    if "criterion" in analyses:
        try:
            if is_catalog:
                criterion = cat.run_criterion(
                    name, horizon=cfg.analysis.horizon,
                    tol=cfg.analysis.criterion_tol)
                secondary = cat.run_secondary_criteria(
                    name, horizon=cfg.analysis.horizon,
                    tol=cfg.analysis.criterion_tol)
            else:
                criterion = _custom_criterion(cfg, certs)
        except (PreconditionError, CriterionUnavailableError) as err:
            criterion_note = f"{_UNAVAILABLE}: {err}"

    detector = None
    if "detector" in analyses:
        if is_catalog:
            detector = cat.run_detector(name, tol=cfg.analysis.detector_tol)
        else:
            family = _custom_family(cfg)
            detector = _custom_detector(cfg, family)

    record = None
    if "cross-validate" in analyses and criterion is not None \
            and detector is not None:
        record = cross_validate(name, criterion, detector,
                                sufficiency_only=spec.sufficiency_only)

    extras = {}
    if criterion_note:
        extras["criterion_note"] = criterion_note
    if "spectrum" in analyses:
        extras["spectrum"] = _spectrum_extra(cfg, name, is_catalog)
    if "rigidity" in analyses:
        extras["rigidity"] = (cat.run_rigidity(name) if is_catalog else None)
    if "gdelta" in analyses:
        try:
            extras["gdelta"] = cat.run_gdelta(name) if is_catalog else None
        except ValueError:
            extras["gdelta"] = None
    if "construct" in analyses:
        try:
            extras["construct"] = (cat.run_construction(name) if is_catalog
                                   else None)
        except (ValueError, ConstructionStalledError) as err:
            extras["construct"] = None
            extras["construct_note"] = str(err)

    result = InstanceResult(name=name, spec=spec, certificates=tuple(certs),
                            criterion=criterion, secondary=tuple(secondary),
                            detector=detector, consistency=record)
    return result, extras


def _spectrum_extra(cfg: ExperimentConfig, name: str, is_catalog: bool):
    if is_catalog:
        family, t0 = cat.spectrum_plan(name)
    else:
        family, t0 = _custom_family(cfg), 1.0
    m = assemble_matrix(family, t0)
    radius, converged = spectral_radius_estimate(m, seed=cfg.analysis.seed)
    opnorm = operator_norm_estimate(m, seed=cfg.analysis.seed)
    return {"t0": t0, "radius": radius, "converged": converged,
            "operator_norm": opnorm}


def run(cfg: ExperimentConfig) -> RunRecord:
    """Execute a validated config and fold the outcome into one record."""
    start = time.perf_counter()
    if cfg.instance is not None:
        names = [cfg.instance]
    else:
        names = [cfg.name]
    results = []
    extras = {}
    for name in names:
        res, extra = _run_one(cfg, name)
        results.append(res)
        extras[name] = extra
    exit_code = 0
    for res in results:
        if res.consistency is not None \
                and res.consistency.tag == "CriterionNoDetectorYes":
            exit_code = 2
    return RunRecord(config=cfg, config_hash=cfg.digest, version=__version__,
                     wall_time=time.perf_counter() - start,
                     results=tuple(results), extras=extras,
                     exit_code=exit_code)


def run_catalog(cfg: ExperimentConfig) -> RunRecord:
    """Run every catalog instance under one config's analysis settings."""
    start = time.perf_counter()
    results = []
    extras = {}
    for name in cat.INSTANCE_NAMES:
        sub = ExperimentConfig(
            schema_version=cfg.schema_version, name=name, instance=name,
            space=None, weight_name=None, family=None,
            analysis=cfg.analysis, output=cfg.output, digest=cfg.digest)
        res, extra = _run_one(sub, name)
        results.append(res)
        extras[name] = extra
    exit_code = 0
    for res in results:
        if res.consistency is not None \
                and res.consistency.tag == "CriterionNoDetectorYes":
            exit_code = 2
    return RunRecord(config=cfg, config_hash=cfg.digest, version=__version__,
                     wall_time=time.perf_counter() - start,
                     results=tuple(results), extras=extras,
                     exit_code=exit_code)


# -- serialization ---------------------------------------------------------

def _fmt(value) -> str:
    if value is None or value == "":
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def csv_rows(record: RunRecord) -> list[tuple[str, ...]]:
    """All measured quantities, one row per (time, quantity), sorted."""
    rows: list[tuple] = []

    def add(name, analysis, quantity, t, value, tol, horizon, truncated,
            method):
        rows.append((name, analysis, quantity, t, value, tol, horizon,
                     truncated, method))

    for res in record.results:
        name = res.name
        for cert in res.certificates:
            add(name, "admissibility", f"{cert.kind.value}-worst-ratio",
                cert.witness_time, cert.worst_ratio, cert.tolerance, "",
                "", "sampled-ratio")
        reports = []
        if res.criterion is not None:
            reports.append(res.criterion)
        reports.extend(res.secondary)
        for rep in reports:
            for curve in rep.curves:
                for t, v in zip(curve.times, curve.values):
                    add(name, "criterion", curve.label, t, v, rep.tolerance,
                        rep.horizon, "", rep.criterion.value)
        det = res.detector
        if det is not None:
            for t, r in zip(det.witness_times, det.residuals):
                add(name, "detector", "return-residual", t, r, det.tolerance,
                    det.horizon, det.truncation_hit, det.method)
        extra = record.extras.get(name, {})
        spec_extra = extra.get("spectrum")
        if spec_extra is not None:
            add(name, "spectrum", "spectral-radius", spec_extra["t0"],
                spec_extra["radius"], "", "", "", "power-iteration")
            add(name, "spectrum", "operator-norm", spec_extra["t0"],
                spec_extra["operator_norm"], "", "", "", "weighted-estimate")
        rig = extra.get("rigidity")
        if rig is not None:
            lookup = dict(zip(rig.times, rig.values))
            for t in rig.witness_times:
                add(name, "rigidity", f"{rig.kind}-defect", t, lookup[t],
                    rig.tolerance, max(rig.times), rig.truncation_hit,
                    f"{rig.kind}_rigidity_scan")
            if rig.values:
                k = int(np.argmin(rig.values))
                add(name, "rigidity", f"{rig.kind}-min-defect", rig.times[k],
                    rig.values[k], rig.tolerance, max(rig.times),
                    rig.truncation_hit, f"{rig.kind}_rigidity_scan")
        gd = extra.get("gdelta")
        if gd is not None:
            add(name, "gdelta", "member-up-to", "", gd.member_up_to, "",
                gd.horizon, gd.truncation_hit, "dyadic-rational-scan")
            add(name, "gdelta", "min-residual", gd.argmin_time,
                gd.min_residual, "", gd.horizon, gd.truncation_hit,
                "dyadic-rational-scan")
        cons = extra.get("construct")
        if cons is not None:
            for st in cons.stages:
                add(name, "construct", "stage-radius", st.time, st.radius,
                    "", "", "", "nested_ball")
            for st, r in zip(cons.stages, cons.certified_residuals):
                add(name, "construct", "certified-residual", st.time, r,
                    "", "", "", "nested_ball")

    def key(row):
        t = row[3]
        tval = float(t) if t not in ("", None) else float("-inf")
        return (row[0], row[1], tval)

    rows.sort(key=key)
    return [tuple(_fmt(v) for v in row) for row in rows]


def _cert_dict(cert):
    out = {"kind": cert.kind.value, "holds": cert.holds,
           "worst_ratio": cert.worst_ratio, "tolerance": cert.tolerance,
           "detail": cert.detail}
    if cert.witness_point is not None:
        out["witness_point"] = cert.witness_point
        out["witness_time"] = cert.witness_time
    return out


def _criterion_dict(rep):
    return {"criterion": rep.criterion.value, "holds": rep.holds,
            "horizon": rep.horizon, "tolerance": rep.tolerance,
            "direction": rep.direction,
            "passing_times": list(rep.passing_times),
            "notes": list(rep.notes)}


def summary_dict(record: RunRecord) -> dict:
    """Structured verdict summary; stable content for identical configs."""
    instances = {}
    for res in record.results:
        det = res.detector
        entry = {
            "summary": res.spec.summary,
            "expected_recurrent": res.spec.expected_recurrent,
            "certificates": [_cert_dict(c) for c in res.certificates],
            "criterion": (_criterion_dict(res.criterion)
                          if res.criterion is not None else None),
            "secondary_criteria": [_criterion_dict(r) for r in res.secondary],
            "detector": None if det is None else {
                "method": det.method,
                "verdict": det.verdict.value,
                "witness_times": list(det.witness_times),
                "residuals": list(det.residuals),
                "tolerance": det.tolerance,
                "horizon": det.horizon,
                "truncation_hit": det.truncation_hit,
                "parameters": {k: v for k, v in sorted(
                    det.parameters.items())},
            },
            "consistency": None if res.consistency is None else {
                "tag": res.consistency.tag,
                "note": res.consistency.note,
                "criterion_holds": res.consistency.criterion_holds,
                "detector_verdict": res.consistency.detector_verdict.value,
            },
        }
        extra = record.extras.get(res.name, {})
        if "criterion_note" in extra:
            entry["criterion_note"] = extra["criterion_note"]
        if extra.get("spectrum") is not None:
            entry["spectrum"] = extra["spectrum"]
        if extra.get("rigidity") is not None:
            rig = extra["rigidity"]
            entry["rigidity"] = {"kind": rig.kind,
                                 "verdict": rig.verdict.value,
                                 "witness_count": len(rig.witness_times),
                                 "tolerance": rig.tolerance}
        if extra.get("gdelta") is not None:
            gd = extra["gdelta"]
            entry["gdelta"] = {"member_up_to": gd.member_up_to,
                               "k_max": gd.k_max,
                               "min_residual": gd.min_residual,
                               "argmin_time": gd.argmin_time}
        if extra.get("construct") is not None:
            cons = extra["construct"]
            entry["construct"] = {
                "certified": cons.certified,
                "stage_times": [st.time for st in cons.stages],
                "stage_radii": [st.radius for st in cons.stages],
                "certified_residuals": list(cons.certified_residuals),
                "certified_bounds": list(cons.certified_bounds)}
        if "construct_note" in extra:
            entry["construct_note"] = extra["construct_note"]
        instances[res.name] = entry
    return {
        "schema_version": 1,
        "config_hash": record.config_hash,
        "package_version": record.version,
        "exit_code": record.exit_code,
        "instances": instances,
    }


def write_reports(record: RunRecord, out_dir: str | Path,
                  fmt: str | None = None) -> list[Path]:
    """Write report files; byte-identical across runs of the same config."""
    import json

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fmt = fmt or record.config.output.format
    written = []
    summary = summary_dict(record)
    summary_path = out_dir / "summary.json"
    summary_path.write_text(
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
        encoding="utf-8")
    written.append(summary_path)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        writer.writerows(csv_rows(record))
        csv_path = out_dir / "rows.csv"
        csv_path.write_text(buf.getvalue(), encoding="utf-8")
        written.append(csv_path)
    return written
