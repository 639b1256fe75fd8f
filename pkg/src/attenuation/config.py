"""Experiment config files.

INI syntax, read with :mod:`configparser`::

    [densities]
    standard = normal(0,1)
    wide = normal(0,1.5)

    [experiments]
    # name = prior, noise[, believed noise]
    baseline = standard, standard
    noisier = standard, wide

    [grids]
    signals = linear(-5, 5, 25)      ; also log(lo, hi, n) or a list of values
    states = -3, -1, 0, 1, 3

    [tolerances]
    rel_tol = 1e-10
    abs_tol = 1e-14
    tail_mass = 1e-12
    max_subdivisions = 200
    check_tol = 1e-7

    [outputs]
    dir = results
    format = csv                     ; csv, svg or both

    [run]
    seed = 0
    draws = 1000000
    jobs = 1

Only ``[densities]`` and ``[experiments]`` are required. Every problem in a
file is collected before :class:`~attenuation.errors.ParseError` is raised.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .densities import Density, DensitySpec, make_density, parse_density_spec
from .errors import AttenuationError, ParseError, UnresolvedName
from .grids import GridSpec
from .posterior import LocationExperiment
from .quadrature import QuadratureConfig

REQUIRED_SECTIONS = ("densities", "experiments")
OPTIONAL_SECTIONS = ("grids", "tolerances", "outputs", "run")
FORMATS = ("csv", "svg", "both")

_GRID_RE = re.compile(r"^\s*(linear|log)\s*\(([^()]*)\)\s*$")
_TOL_KEYS = {"rel_tol": float, "abs_tol": float, "tail_mass": float, "max_subdivisions": int, "check_tol": float}
_RUN_KEYS = {"seed": int, "draws": int, "jobs": int}


@dataclass(frozen=True)
class OutputSpec:
    directory: Path = Path("results")
    format: str = "csv"

    @property
    def formats(self) -> tuple[str, ...]:
        return ("csv", "svg") if self.format == "both" else (self.format,)


@dataclass
class ExperimentConfig:
    densities: dict[str, DensitySpec]
    experiments: dict[str, tuple[str, str, str | None]]
    grids: dict[str, np.ndarray] = field(default_factory=dict)
    quad: QuadratureConfig = QuadratureConfig()
    check_tol: float = 1e-7
    outputs: OutputSpec = OutputSpec()
    seed: int = 0
    draws: int = 1_000_000
    jobs: int = 1
    source: str = ""

    def density(self, name: str) -> Density:
        if name not in self.densities:
            raise UnresolvedName([f"undefined density {name!r}"])
        return make_density(self.densities[name])

    def experiment(self, name: str) -> LocationExperiment:
        prior, noise, believed = self.experiments[name]
        return LocationExperiment(self.density(prior), self.density(noise),
                                  self.density(believed) if believed else None)


def _line_index(text: str) -> dict[tuple[str, str], int]:
    """Map ``(section, key)`` (and ``(section, '')``) to 1-based line numbers."""
    out: dict[tuple[str, str], int] = {}
    section = ""
    for i, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            out.setdefault((section, ""), i)
            continue
        m = re.match(r"^([^=:]+)[=:]", line)
        if m and section:
            out.setdefault((section, m.group(1).strip().lower()), i)
    return out


def parse_grid(text: str) -> np.ndarray:
    """``linear(lo, hi, n)``, ``log(lo, hi, n)`` or comma-separated values, strictly increasing."""
    m = _GRID_RE.match(text)
    if m:
        parts = [p.strip() for p in m.group(2).split(",")]
        if len(parts) != 3:
            raise ValueError(f"{m.group(1)}() takes lo, hi, n")
        pts = GridSpec(float(parts[0]), float(parts[1]), int(parts[2]), m.group(1)).points()
    else:
        pts = np.array([float(p) for p in text.split(",") if p.strip()])
    if pts.size == 0:
        raise ValueError("grid is empty")
    if np.any(np.diff(pts) <= 0):
        raise ValueError("grid must be strictly increasing")
    return pts


def parse_config_text(text: str, source: str = "<string>") -> ExperimentConfig:
    problems: list[str] = []
    unresolved: list[str] = []
    lines = _line_index(text)

    def at(section: str, key: str = "") -> str:
        n = lines.get((section, key.lower()))
        return f"{source}:{n}" if n else source

    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParseError([f"{source}: {exc}"]) from None

    missing = [s for s in REQUIRED_SECTIONS if not parser.has_section(s)]
    if missing:
        problems.append(f"{source}: missing required section(s): {', '.join('[' + s + ']' for s in missing)}")
    for s in parser.sections():
        if s not in REQUIRED_SECTIONS + OPTIONAL_SECTIONS:
            problems.append(f"{at(s)}: unknown section [{s}]")

    densities: dict[str, DensitySpec] = {}
    if parser.has_section("densities"):
        for name, value in parser.items("densities"):
            try:
                densities[name] = parse_density_spec(value)
            except AttenuationError as exc:
                problems.append(f"{at('densities', name)}: [densities] {name}: {exc}")
        if not parser.items("densities"):
            problems.append(f"{at('densities')}: [densities] is empty")

    experiments: dict[str, tuple[str, str, str | None]] = {}
    if parser.has_section("experiments"):
        for name, value in parser.items("experiments"):
            refs = [v.strip() for v in value.split(",")]
            if len(refs) not in (2, 3) or not all(refs):
                problems.append(f"{at('experiments', name)}: [experiments] {name}: expected 'prior, noise[, believed]'")
                continue
            bad = [r for r in refs if r.lower() not in _defined_names(parser)]
            for r in bad:
                unresolved.append(f"{at('experiments', name)}: [experiments] {name}: undefined density {r!r}")
            refs = [r.lower() for r in refs]
            experiments[name] = (refs[0], refs[1], refs[2] if len(refs) == 3 else None)

    grids: dict[str, np.ndarray] = {}
    if parser.has_section("grids"):
        for name, value in parser.items("grids"):
            try:
                grids[name] = parse_grid(value)
            except (ValueError, AttenuationError) as exc:
                problems.append(f"{at('grids', name)}: [grids] {name}: {exc}")

    tol_values: dict[str, float | int] = {}
    if parser.has_section("tolerances"):
        for key, value in parser.items("tolerances"):
            if key not in _TOL_KEYS:
                problems.append(f"{at('tolerances', key)}: [tolerances] unknown key {key!r}")
                continue
            try:
                tol_values[key] = _TOL_KEYS[key](value)
            except ValueError:
                problems.append(f"{at('tolerances', key)}: [tolerances] {key}: not a number: {value!r}")
    check_tol = float(tol_values.pop("check_tol", 1e-7))
    quad = QuadratureConfig()
    try:
        quad = QuadratureConfig(**tol_values)
    except (AttenuationError, TypeError) as exc:
        problems.append(f"{at('tolerances')}: [tolerances] {exc}")
    if not check_tol > 0:
        problems.append(f"{at('tolerances', 'check_tol')}: [tolerances] check_tol must be positive")

    outputs = OutputSpec()
    if parser.has_section("outputs"):
        sec = parser["outputs"]
        fmt = sec.get("format", "csv").strip().lower()
        if fmt not in FORMATS:
            problems.append(f"{at('outputs', 'format')}: [outputs] format must be one of {FORMATS}, got {fmt!r}")
            fmt = "csv"
        for key in sec:
            if key not in ("dir", "format"):
                problems.append(f"{at('outputs', key)}: [outputs] unknown key {key!r}")
        outputs = OutputSpec(Path(sec.get("dir", "results")), fmt)

    run: dict[str, int] = {}
    if parser.has_section("run"):
        for key, value in parser.items("run"):
            if key not in _RUN_KEYS:
                problems.append(f"{at('run', key)}: [run] unknown key {key!r}")
                continue
            try:
                run[key] = int(value)
            except ValueError:
                problems.append(f"{at('run', key)}: [run] {key}: not an integer: {value!r}")

    if problems:
        raise ParseError(problems + unresolved)
    if unresolved:
        raise UnresolvedName(unresolved)
    return ExperimentConfig(densities, experiments, grids, quad, check_tol, outputs, source=source, **run)


def _defined_names(parser: configparser.ConfigParser) -> set[str]:
    """Names in [densities], including ones whose spec failed to parse (reported separately)."""
    return set(parser.options("densities")) if parser.has_section("densities") else set()


def resolve_config_path(path: str | Path) -> Path:
    """A file path, or the name of a shipped config such as ``figure1``."""
    p = Path(path)
    if p.exists():
        return p
    shipped = resources.files("attenuation") / "configs" / f"{p.stem}.cfg"
    if p.parent == Path(".") and shipped.is_file():
        return Path(str(shipped))
    raise ParseError([f"{path}: no such config file"])


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a config file; see the module docstring for the format."""
    p = resolve_config_path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ParseError([f"{p}: {exc}"]) from None
    return parse_config_text(text, str(p))


__all__ = [
    "ExperimentConfig",
    "OutputSpec",
    "parse_config",
    "parse_config_text",
    "parse_grid",
    "resolve_config_path",
]
