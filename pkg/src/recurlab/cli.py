"""Command-line interface for the recurrence laboratory.

Exit codes are uniform across subcommands: 0 for success (including
scientifically negative outcomes like a failed certificate or a stalled
construction), 1 for execution or validation errors, 2 when
cross-validation found a criterion/detector contradiction.
"""

from __future__ import annotations

import json
from pathlib import Path

import click

from . import __version__
from . import catalog as cat
from .config import (AnalysisConfig, DEFAULT_ANALYSES, ExperimentConfig,
                     KNOWN_ANALYSES, OutputConfig, config_from_dict,
                     config_hash, load_config)
from .errors import ConfigValidationError, RecurlabError
from .matrices import assemble_matrix, operator_norm_estimate, \
    spectral_radius_estimate
from .runner import run, run_catalog, summary_dict, write_reports
from .verify import SUITE_NAMES, verify_theorems

_VERDICT_TEXT = {
    "WitnessFound": "recurrent (witnessed)",
    "NoWitnessInRange": "no witness in range",
    "TruncationLimited": "window-limited",
}


def _fail(message) -> None:
    if isinstance(message, ConfigValidationError):
        click.echo("config validation failed:", err=True)
        for problem in message.problems:
            click.echo(f"  {problem}", err=True)
    else:
        click.echo(f"error: {message}", err=True)
    raise SystemExit(1)


def _analysis_config(run_list, horizon, tol, seed) -> AnalysisConfig:
    return AnalysisConfig(
        run=tuple(run_list),
        horizon=horizon,
        criterion_tol=1e-4,
        detector_tol=tol,
        seed=seed if seed is not None else 0,
    )


def _resolve_config(config_path, instance, run_list, horizon, tol, seed,
                    fmt) -> tuple[ExperimentConfig, bool]:
    """(config, run_whole_catalog) from CLI flags; flags override the file."""
    if config_path is not None:
        cfg = load_config(config_path)
        if instance is not None:
            _fail("--config and --instance are mutually exclusive")
        analysis = cfg.analysis
        if horizon is not None or tol is not None or seed is not None:
            analysis = AnalysisConfig(
                run=analysis.run,
                horizon=horizon if horizon is not None else analysis.horizon,
                criterion_tol=analysis.criterion_tol,
                detector_tol=tol if tol is not None else analysis.detector_tol,
                seed=seed if seed is not None else analysis.seed)
        out = OutputConfig(fmt) if fmt is not None else cfg.output
        cfg = ExperimentConfig(
            schema_version=cfg.schema_version, name=cfg.name,
            instance=cfg.instance, space=cfg.space,
            weight_name=cfg.weight_name, family=cfg.family,
            analysis=analysis, output=out, digest=cfg.digest)
        return cfg, False
    name = instance if instance is not None else "all"
    analysis = _analysis_config(run_list, horizon, tol, seed)
    if name == "all":
        seed_dict = {"schema_version": 1, "instance": "all",
                     "analysis": {"run": list(run_list)}}
        cfg = ExperimentConfig(
            schema_version=1, name="all", instance=None, space=None,
            weight_name=None, family=None, analysis=analysis,
            output=OutputConfig(fmt or "csv"),
            digest=config_hash(seed_dict))
        return cfg, True
    data = {"schema_version": 1, "instance": name}
    cfg = config_from_dict(data)
    cfg = ExperimentConfig(
        schema_version=1, name=cfg.name, instance=cfg.instance, space=None,
        weight_name=None, family=None, analysis=analysis,
        output=OutputConfig(fmt or "csv"), digest=cfg.digest)
    return cfg, False


@click.group()
@click.version_option(__version__)
def main():
    """Numerical laboratory for recurrence of weighted operator families."""


@main.command("catalog")
def catalog_cmd():
    """List the stock instances and their expected outcomes."""
    for name in cat.INSTANCE_NAMES:
        spec = cat.CATALOG[name]
        expectation = "recurrent" if spec.expected_recurrent else "not recurrent"
        click.echo(f"{name}: {spec.summary}")
        click.echo(f"    expected {expectation} "
                   f"[detector: {spec.expected_verdict.value}]")
        click.echo(f"    basis: {spec.provenance}")


@main.command("check-admissible")
@click.option("--instance", default=None, help="catalog instance name")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="JSON config with a custom weight/space/family")
@click.option("--tol", type=float, default=None,
              help="relative tolerance for the sampled inequality")
def check_admissible(instance, config_path, tol):
    """Certify (or refute) the admissibility of a pairing."""
    try:
        if (instance is None) == (config_path is None):
            _fail("give exactly one of --instance or --config")
        if instance is not None:
            certs = cat.run_admissibility(instance,
                                          **({"tolerance": tol} if tol else {}))
        else:
            from .runner import _custom_admissibility
            certs = _custom_admissibility(load_config(config_path))
        if not certs:
            click.echo("no admissibility conditions attach to this family")
            return
        for cert in certs:
            status = "holds" if cert.holds else "FAILS"
            line = (f"{cert.kind.value}: {status} "
                    f"(worst ratio {cert.worst_ratio!r}, "
                    f"tol {cert.tolerance!r})")
            if not cert.holds and cert.witness_point is not None:
                line += (f"; witness x={cert.witness_point!r}"
                         f" t={cert.witness_time!r}")
            click.echo(line)
    except ConfigValidationError as err:
        _fail(err)
    except (RecurlabError, KeyError, ValueError) as err:
        _fail(err)


@main.command("analyze")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--instance", default=None,
              help="catalog instance, or 'all' for the whole catalog")
@click.option("--out", type=click.Path(), default=None,
              help="directory for report files")
@click.option("--format", "fmt", type=click.Choice(["csv", "structured"]),
              default=None)
@click.option("--horizon", type=float, default=None)
@click.option("--tol", type=float, default=None,
              help="detector tolerance override")
@click.option("--seed", type=int, default=None)
@click.option("--analysis", "extra_analyses", multiple=True,
              type=click.Choice(sorted(KNOWN_ANALYSES)),
              help="extra analyses beyond the default pipeline")
def analyze(config_path, instance, out, fmt, horizon, tol, seed,
            extra_analyses):
    """Admissibility, criterion, detector and cross-validation in order."""
    run_list = tuple(DEFAULT_ANALYSES) + tuple(
        a for a in extra_analyses if a not in DEFAULT_ANALYSES)
    try:
        cfg, whole_catalog = _resolve_config(config_path, instance, run_list,
                                             horizon, tol, seed, fmt)
        record = run_catalog(cfg) if whole_catalog else run(cfg)
    except ConfigValidationError as err:
        _fail(err)
    except (RecurlabError, ValueError) as err:
        _fail(err)
    for res in record.results:
        det = res.detector
        det_text = (_VERDICT_TEXT.get(det.verdict.value, det.verdict.value)
                    if det is not None else "skipped")
        wit = f", {len(det.witness_times)} witnesses" if det else ""
        crit = res.criterion
        crit_text = ("holds" if crit is not None and crit.holds
                     else "fails" if crit is not None else "skipped")
        tag = res.consistency.tag if res.consistency is not None else "n/a"
        click.echo(f"{res.name}: detector {det_text}{wit}; "
                   f"criterion {crit_text}; consistency {tag}")
    if out is not None:
        paths = write_reports(record, out, fmt)
        for p in paths:
            click.echo(f"wrote {p}")
    elif cfg.output.format == "structured" or fmt == "structured":
        click.echo(json.dumps(summary_dict(record), sort_keys=True, indent=2))
    if record.exit_code == 2:
        click.echo("status: criterion/detector contradiction", err=True)
    else:
        click.echo("status: consistent")
    raise SystemExit(record.exit_code)


@main.command("construct-recurrent")
@click.option("--instance", required=True)
@click.option("--stages", type=int, default=None)
@click.option("--eps0", type=float, default=0.5, show_default=True)
@click.option("--direction", type=click.Choice(["forward", "backward"]),
              default="forward", show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="write the stage table as JSON")
def construct_recurrent(instance, stages, eps0, direction, out):
    """Chain pullback witnesses into a single recurrent-looking vector."""
    from .errors import ConstructionStalledError
    d = 1 if direction == "forward" else -1
    try:
        result = cat.run_construction(instance, eps0=eps0, stages=stages,
                                      direction=d)
    except ConstructionStalledError as err:
        click.echo(f"construction stalled: {err}")
        click.echo(f"completed stages: {len(err.stages)}")
        raise SystemExit(0)
    except (RecurlabError, KeyError, ValueError) as err:
        _fail(err)
    click.echo(f"certified: {result.certified}")
    for st, res, bound in zip(result.stages, result.certified_residuals,
                              result.certified_bounds):
        click.echo(f"  stage {st.index}: t={st.time!r} radius={st.radius!r} "
                   f"residual={res!r} <= bound={bound!r}")
    if out is not None:
        payload = {
            "instance": instance,
            "eps0": eps0,
            "direction": direction,
            "certified": result.certified,
            "stage_times": [st.time for st in result.stages],
            "stage_radii": [st.radius for st in result.stages],
            "certified_residuals": list(result.certified_residuals),
            "certified_bounds": list(result.certified_bounds),
        }
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                        encoding="utf-8")
        click.echo(f"wrote {path}")


@main.command("rigidity")
@click.option("--instance", required=True)
@click.option("--kind", type=click.Choice(["strong", "uniform"]),
              default=None, help="defaults to the instance's stock kind")
@click.option("--tol", type=float, default=None)
def rigidity(instance, kind, tol):
    """Scan for simultaneous returns of a vector set or the operator ball."""
    try:
        report = cat.run_rigidity(instance, kind=kind, tol=tol)
    except (RecurlabError, KeyError, ValueError) as err:
        _fail(err)
    click.echo(f"{report.kind} rigidity: "
               f"{_VERDICT_TEXT.get(report.verdict.value)}")
    click.echo(f"witnesses: {len(report.witness_times)} of "
               f"{len(report.times)} sampled times at tol {report.tolerance!r}")
    if report.witness_times:
        shown = ", ".join(repr(t) for t in report.witness_times[:6])
        click.echo(f"first witness times: {shown}")


@main.command("spectrum")
@click.option("--instance", required=True)
@click.option("--t0", type=float, default=1.0, show_default=True)
@click.option("--grid-points", type=int, default=2048, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def spectrum(instance, t0, grid_points, seed):
    """Spectral radius and operator norm of the time-t0 snapshot matrix."""
    try:
        family, t0 = cat.spectrum_plan(instance, grid_points=grid_points,
                                       t0=t0)
        m = assemble_matrix(family, t0)
        radius, converged = spectral_radius_estimate(m, seed=seed)
        norm = operator_norm_estimate(m, seed=seed)
    except (RecurlabError, KeyError, ValueError) as err:
        _fail(err)
    click.echo(f"t0={t0!r} n={m.entries.shape[0]}")
    click.echo(f"spectral radius estimate: {radius!r} "
               f"(converged: {converged})")
    click.echo(f"operator norm estimate: {norm!r}")


@main.command("verify-theorems")
@click.option("--suite", "suites", multiple=True,
              help="suite names; pass an empty value for an explicit no-op")
@click.option("--tamper", default=None, hidden=True,
              help="negative control: break the named suite's tolerance")
def verify_theorems_cmd(suites, tamper):
    """Run the structural invariant suites over small built-in instances."""
    if suites:
        selected = [s for s in suites if s not in ("", "none")]
        if not selected:
            click.echo("no suites selected")
            raise SystemExit(0)
    else:
        selected = None
    try:
        results = verify_theorems(selected, tamper=tamper)
    except ValueError as err:
        _fail(err)
    failed = [r for r in results if not r.passed]
    for r in results:
        click.echo(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.detail}")
    if failed:
        click.echo(f"{len(failed)} of {len(results)} suites failed", err=True)
        raise SystemExit(1)
    click.echo(f"all {len(results)} suites passed")


if __name__ == "__main__":
    main()
