"""Experiment configuration: JSON schema, validation and hashing.

A config either names a catalog instance or wires a custom space, weight
and family.  Validation is total: every problem found is collected with
its field path before :class:`ConfigValidationError` is raised, so one
round trip shows everything wrong with a file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .catalog import CATALOG, weight_names
from .errors import ConfigValidationError

__all__ = [
    "SpaceConfig",
    "FamilyConfig",
    "AnalysisConfig",
    "OutputConfig",
    "ExperimentConfig",
    "DEFAULT_ANALYSES",
    "KNOWN_ANALYSES",
    "MATRIX_ANALYSES",
    "config_from_dict",
    "load_config",
    "config_hash",
]

DEFAULT_ANALYSES = ("admissibility", "criterion", "detector", "cross-validate")
KNOWN_ANALYSES = DEFAULT_ANALYSES + ("spectrum", "rigidity", "gdelta",
                                     "construct")
# analyses that assemble a dense matrix and therefore respect the size cap
MATRIX_ANALYSES = ("spectrum", "rigidity")
_MATRIX_CAP = 4096

_TOP_KEYS = {"schema_version", "name", "instance", "space", "weight",
             "family", "analysis", "output"}
_DOMAINS = ("halfline", "line", "openbox")
_FAMILY_KINDS = ("translation", "dilation", "diagonal")


@dataclass(frozen=True)
class SpaceConfig:
    domain: str
    grid_points: int
    mode: str
    p: float | None = None
    trunc: float | None = None
    window: tuple[float, float] | None = None


@dataclass(frozen=True)
class FamilyConfig:
    kind: str
    frequencies: tuple[float, ...] | None = None
    rotation: tuple[int, int] | None = None


@dataclass(frozen=True)
class AnalysisConfig:
    run: tuple[str, ...] = DEFAULT_ANALYSES
    horizon: float | None = None
    criterion_tol: float = 1e-4
    detector_tol: float | None = None
    seed: int = 0


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    schema_version: int
    name: str
    instance: str | None
    space: SpaceConfig | None
    weight_name: str | None
    family: FamilyConfig | None
    analysis: AnalysisConfig
    output: OutputConfig
    digest: str


def config_hash(data: dict) -> str:
    """Stable hash of the raw config dict (canonical JSON, sha256)."""
    canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_space(block, analyses, problems) -> SpaceConfig | None:
    if not isinstance(block, dict):
        problems.append("space: must be an object")
        return None
    known = {"domain", "grid_points", "mode", "p", "trunc", "window"}
    for key in sorted(set(block) - known):
        problems.append(f"space.{key}: unknown field")
    domain = block.get("domain")
    if domain not in _DOMAINS:
        problems.append(f"space.domain: expected one of {_DOMAINS}, "
                        f"got {domain!r}")
    n = block.get("grid_points")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        problems.append(f"space.grid_points: must be a positive integer, "
                        f"got {n!r}")
        n = None
    elif any(a in analyses for a in MATRIX_ANALYSES) and n > _MATRIX_CAP:
        problems.append(f"space.grid_points: {n} exceeds the {_MATRIX_CAP} "
                        "cap for matrix analyses")
    mode = block.get("mode", "lp")
    if mode not in ("lp", "c0sup"):
        problems.append(f"space.mode: expected 'lp' or 'c0sup', got {mode!r}")
    p = block.get("p")
    if mode == "lp":
        if p is None:
            p = 1.0
        elif not _number(p) or not p >= 1:
            problems.append(f"space.p: need p >= 1, got {p!r}")
            p = None
    trunc = block.get("trunc")
    window = block.get("window")
    if domain in ("halfline", "line"):
        if not _number(trunc) or not trunc > 0:
            problems.append(f"space.trunc: must be positive, got {trunc!r}")
    elif domain == "openbox":
        ok = (isinstance(window, (list, tuple)) and len(window) == 2
              and all(_number(v) for v in window) and window[0] < window[1])
        if not ok:
            problems.append(f"space.window: need [lo, hi] with lo < hi, "
                            f"got {window!r}")
            window = None
    if problems:
        return None
    return SpaceConfig(domain=domain, grid_points=n, mode=mode, p=p,
                       trunc=float(trunc) if trunc is not None else None,
                       window=tuple(map(float, window)) if window else None)


def _check_weight(block, problems) -> str | None:
    if not isinstance(block, dict):
        problems.append("weight: must be an object")
        return None
    for key in sorted(set(block) - {"name"}):
        problems.append(f"weight.{key}: unknown field")
    name = block.get("name")
    if name not in weight_names():
        problems.append(f"weight.name: unknown weight {name!r}")
        return None
    return name


def _check_family(block, space: SpaceConfig | None, problems
                  ) -> FamilyConfig | None:
    if not isinstance(block, dict):
        problems.append("family: must be an object")
        return None
    for key in sorted(set(block) - {"kind", "frequencies", "rotation"}):
        problems.append(f"family.{key}: unknown field")
    kind = block.get("kind")
    if kind not in _FAMILY_KINDS:
        problems.append(f"family.kind: expected one of {_FAMILY_KINDS}, "
                        f"got {kind!r}")
        return None
    freqs = block.get("frequencies")
    if kind == "diagonal":
        ok = (isinstance(freqs, (list, tuple)) and len(freqs) > 0
              and all(_number(v) for v in freqs))
        if not ok:
            problems.append("family.frequencies: diagonal families need a "
                            "nonempty list of numbers")
            freqs = None
        elif space is not None and space.grid_points != len(freqs):
            problems.append("family.frequencies: count must equal "
                            "space.grid_points")
    elif freqs is not None:
        problems.append("family.frequencies: only valid for diagonal families")
        freqs = None
    if kind == "dilation" and space is not None and space.domain != "openbox":
        problems.append("family.kind: dilation needs an openbox space")
    rotation = block.get("rotation")
    if rotation is not None:
        ok = (isinstance(rotation, (list, tuple)) and len(rotation) == 2
              and all(isinstance(v, int) and not isinstance(v, bool)
                      for v in rotation) and rotation[1] > 0)
        if not ok:
            problems.append(f"family.rotation: need integers [p, q] with "
                            f"q > 0, got {rotation!r}")
            rotation = None
    return FamilyConfig(kind=kind,
                        frequencies=tuple(map(float, freqs)) if freqs else None,
                        rotation=tuple(rotation) if rotation else None)


def _check_analysis(block, problems) -> AnalysisConfig:
    if block is None:
        return AnalysisConfig()
    if not isinstance(block, dict):
        problems.append("analysis: must be an object")
        return AnalysisConfig()
    known = {"run", "horizon", "criterion_tol", "detector_tol", "seed"}
    for key in sorted(set(block) - known):
        problems.append(f"analysis.{key}: unknown field")
    run = block.get("run", list(DEFAULT_ANALYSES))
    if not isinstance(run, (list, tuple)) or not all(isinstance(a, str)
                                                     for a in run):
        problems.append("analysis.run: must be a list of analysis names")
        run = DEFAULT_ANALYSES
    else:
        for a in run:
            if a not in KNOWN_ANALYSES:
                problems.append(f"analysis.run: unknown analysis {a!r}")
        run = tuple(a for a in run if a in KNOWN_ANALYSES)
    horizon = block.get("horizon")
    if horizon is not None and (not _number(horizon) or not horizon > 0):
        problems.append(f"analysis.horizon: must be positive, got {horizon!r}")
        horizon = None
    ctol = block.get("criterion_tol", 1e-4)
    if not _number(ctol) or not ctol > 0:
        problems.append(f"analysis.criterion_tol: must be positive, "
                        f"got {ctol!r}")
        ctol = 1e-4
    dtol = block.get("detector_tol")
    if dtol is not None and (not _number(dtol) or not dtol > 0):
        problems.append(f"analysis.detector_tol: must be positive, "
                        f"got {dtol!r}")
        dtol = None
    seed = block.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        problems.append(f"analysis.seed: must be an integer, got {seed!r}")
        seed = 0
    return AnalysisConfig(run=tuple(run),
                          horizon=float(horizon) if horizon is not None else None,
                          criterion_tol=float(ctol),
                          detector_tol=float(dtol) if dtol is not None else None,
                          seed=seed)


def _check_output(block, problems) -> OutputConfig:
    if block is None:
        return OutputConfig()
    if not isinstance(block, dict):
        problems.append("output: must be an object")
        return OutputConfig()
    for key in sorted(set(block) - {"format"}):
        problems.append(f"output.{key}: unknown field")
    fmt = block.get("format", "csv")
    if fmt not in ("csv", "structured"):
        problems.append(f"output.format: expected 'csv' or 'structured', "
                        f"got {fmt!r}")
        fmt = "csv"
    return OutputConfig(format=fmt)


def config_from_dict(data: dict) -> ExperimentConfig:
    """Validate a parsed config; collects every problem before raising."""
    problems: list[str] = []
    if not isinstance(data, dict):
        raise ConfigValidationError(["config: top level must be an object"])
    for key in sorted(set(data) - _TOP_KEYS):
        problems.append(f"{key}: unknown field")
    if data.get("schema_version") != 1:
        problems.append(f"schema_version: expected 1, "
                        f"got {data.get('schema_version')!r}")

    analysis = _check_analysis(data.get("analysis"), problems)
    output = _check_output(data.get("output"), problems)

    instance = data.get("instance")
    custom_keys = [k for k in ("space", "weight", "family") if k in data]
    space = weight_name = family = None
    if instance is not None:
        if not isinstance(instance, str) or instance not in CATALOG:
            problems.append(f"instance: unknown catalog instance {instance!r}")
        if custom_keys:
            problems.append("instance: cannot combine with a custom "
                            f"{'/'.join(custom_keys)} block")
    else:
        missing = [k for k in ("space", "weight", "family") if k not in data]
        for k in missing:
            problems.append(f"{k}: required without an instance")
        if not missing:
            space_problems: list[str] = []
            space = _check_space(data["space"], analysis.run, space_problems)
            problems.extend(space_problems)
            weight_name = _check_weight(data["weight"], problems)
            family = _check_family(data["family"], space, problems)

    name = data.get("name", instance if instance is not None else "custom")
    if not isinstance(name, str) or not name:
        problems.append(f"name: must be a nonempty string, got {name!r}")
        name = "custom"

    if problems:
        raise ConfigValidationError(problems)
    return ExperimentConfig(
        schema_version=1,
        name=name,
        instance=instance,
        space=space,
        weight_name=weight_name,
        family=family,
        analysis=analysis,
        output=output,
        digest=config_hash(data),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigValidationError([f"config: cannot read {path}: {err}"])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigValidationError([f"config: invalid JSON: {err}"])
    return config_from_dict(data)
