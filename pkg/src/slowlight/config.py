"""Scenario configuration: JSON schema, typed parsing and whole-document validation.

All quantities are SI: detunings and widths in Hz, lengths in m, absorption
coefficients in 1/m, times in s. The units are repeated in the schema
descriptions.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema

from slowlight.cavity import DEFAULT_EXCESS, CavityConfig
from slowlight.errors import ConfigError, InvalidParameter
from slowlight.profile import (DEFAULT_CARRIER, FrequencyGrid, HoleSpec, build_background,
                               burn_hole)
from slowlight.pulse import energy_bandwidth, gaussian_pulse

_POS = {"type": "number", "exclusiveMinimum": 0}

_GRID = {
    "type": "object",
    "required": ["span", "resolution"],
    "additionalProperties": False,
    "properties": {
        "span": {**_POS, "description": "total detuning span, Hz"},
        "resolution": {**_POS, "description": "largest allowed grid step, Hz; the point "
                                              "count is rounded up to a power of two"},
        "center": {"type": "number", "description": "grid centre detuning, Hz"},
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "slowlight scenario",
    "type": "object",
    "required": ["name", "profile", "grid", "cavity"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "comment": {"type": "string", "description": "the measurement this scenario targets"},
        "carrier": {**_POS, "description": "optical carrier frequency, Hz"},
        "profile": {
            "type": "object",
            "required": ["background"],
            "additionalProperties": False,
            "properties": {
                "background": {
                    "type": "object",
                    "required": ["shape", "peak_alpha"],
                    "additionalProperties": False,
                    "properties": {
                        "shape": {"enum": ["flat", "gaussian"]},
                        "peak_alpha": {"type": "number", "description": "1/m"},
                        "fwhm": {"type": "number", "description": "inhomogeneous FWHM, Hz"},
                        "grid_span": {"type": "number",
                                      "description": "detuning extent of the breakpoints, Hz"},
                        "center": {"type": "number", "description": "line centre, Hz"},
                    },
                },
                "holes": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["center", "width"],
                        "additionalProperties": False,
                        "properties": {
                            "center": {"type": "number", "description": "Hz"},
                            "width": {"type": "number", "description": "full outer width, Hz"},
                            "residual": {"type": "number", "description": "in-window alpha, 1/m"},
                            "edge_ramp": {"type": "number", "description": "linear edge width, Hz"},
                        },
                    },
                },
            },
        },
        "grid": _GRID,
        "wide_grid": _GRID,
        "cavity": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "length": {"type": "number", "description": "m"},
                "r1": {"type": "number"},
                "r2": {"type": "number"},
                "background_index": {"type": "number"},
                "excess_roundtrip": {"type": ["number", "null"],
                                     "description": "round-trip intensity factor A; null "
                                                    "calibrates a 1 GHz empty-cavity linewidth"},
            },
        },
        "pulse": {
            "type": "object",
            "required": ["fwhm"],
            "additionalProperties": False,
            "properties": {
                "fwhm": {"type": "number", "description": "intensity FWHM, s"},
                "center": {"type": "number", "description": "s"},
                "time_span": {"type": "number", "description": "s"},
                "samples": {"type": "integer"},
            },
        },
        "sweep": {
            "type": "object",
            "required": ["gamma_values"],
            "additionalProperties": False,
            "properties": {
                "gamma_values": {"type": "array", "minItems": 1, "items": {"type": "number"},
                                 "description": "window widths, Hz"},
                "span_factor": {**_POS, "description": "grid span in window widths"},
                "count": {"type": "integer", "minimum": 4},
            },
        },
        "analysis": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "min_peak_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "linewidth_hint": {**_POS, "description": "narrowest expected resonance FWHM, Hz"},
            },
        },
        "output_dir": {"type": "string"},
    },
}


@dataclass(frozen=True)
class GridSpec:
    span: float
    resolution: float
    center: float = 0.0

    @property
    def count(self) -> int:
        n = max(4, math.ceil(self.span / self.resolution - 1e-9))
        return 1 << (n - 1).bit_length()

    def build(self, carrier: float) -> FrequencyGrid:
        return FrequencyGrid.centered(self.span, self.count, carrier, self.center)


@dataclass(frozen=True)
class PulseSpec:
    fwhm: float
    center: float = 0.0
    time_span: float | None = None
    samples: int = 4096

    def build(self):
        return gaussian_pulse(self.fwhm, self.center, self.time_span, self.samples)


@dataclass(frozen=True)
class SweepSpec:
    gamma_values: tuple[float, ...]
    span_factor: float = 20.0
    count: int = 1 << 18


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    background: dict
    holes: tuple[HoleSpec, ...]
    grid: GridSpec
    cavity: CavityConfig
    comment: str = ""
    carrier: float = DEFAULT_CARRIER
    wide_grid: GridSpec | None = None
    pulse: PulseSpec | None = None
    sweep: SweepSpec | None = None
    min_peak_fraction: float = 0.01
    linewidth_hint: float | None = None
    output_dir: str | None = None
    #: True when the cavity A was left null and calibrated
    calibrated_excess: bool = field(default=False, compare=False)

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "comment": self.comment,
            "carrier": self.carrier,
            "profile": {"background": dict(self.background),
                        "holes": [dataclasses.asdict(h) for h in self.holes]},
            "grid": dataclasses.asdict(self.grid),
            "cavity": {
                "length": self.cavity.length, "r1": self.cavity.r1, "r2": self.cavity.r2,
                "background_index": self.cavity.background_index,
                "excess_roundtrip": None if self.calibrated_excess else self.cavity.excess_roundtrip,
            },
            "analysis": {"min_peak_fraction": self.min_peak_fraction},
        }
        if self.linewidth_hint is not None:
            d["analysis"]["linewidth_hint"] = self.linewidth_hint
        if self.wide_grid is not None:
            d["wide_grid"] = dataclasses.asdict(self.wide_grid)
        if self.pulse is not None:
            d["pulse"] = {k: v for k, v in dataclasses.asdict(self.pulse).items() if v is not None}
        if self.sweep is not None:
            s = dataclasses.asdict(self.sweep)
            s["gamma_values"] = list(s["gamma_values"])
            d["sweep"] = s
        if self.output_dir is not None:
            d["output_dir"] = self.output_dir
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class ValidationReport:
    errors: list[dict] = field(default_factory=list)
    warnings: list[dict] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.errors

    def error(self, where: str, message: str):
        self.errors.append({"field": where, "message": message})

    def warn(self, where: str, message: str):
        self.warnings.append({"field": where, "message": message})

    def as_dict(self) -> dict:
        return {"valid": self.valid, "errors": self.errors, "warnings": self.warnings}


class ConfigInvalid(InvalidParameter):
    """Raised by :func:`parse_config` with the full report attached."""

    def __init__(self, report: ValidationReport):
        first = report.errors[0]
        super().__init__(first["message"], first["field"])
        self.report = report


def load_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return doc


def _path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _rename(exc: InvalidParameter, prefix: str) -> str:
    """Map a module field name like ``hole.width`` onto the config path."""
    leaf = (exc.field or "").split(".")[-1]
    return f"{prefix}.{leaf}" if leaf else prefix


def check(doc: dict) -> tuple[ValidationReport, ScenarioConfig | None]:
    """Validate a parsed document, collecting every violation before giving up."""
    rep = ValidationReport()
    for err in sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc), key=str):
        rep.error(_path(err.absolute_path), err.message)
    if not rep.valid:
        return rep, None

    carrier = float(doc.get("carrier", DEFAULT_CARRIER))
    bg = dict(doc["profile"]["background"])
    background = None
    try:
        background = build_background(**bg)
    except InvalidParameter as exc:
        rep.error(_rename(exc, "profile.background"), str(exc))

    holes = []
    for i, h in enumerate(doc["profile"].get("holes", [])):
        try:
            hole = HoleSpec(**{k: float(v) for k, v in h.items()})
        except InvalidParameter as exc:
            rep.error(_rename(exc, f"profile.holes[{i}]"), str(exc))
            continue
        holes.append(hole)
        if background is not None:
            try:
                background = burn_hole(background, hole)
            except InvalidParameter as exc:
                rep.error(_rename(exc, f"profile.holes[{i}]"), str(exc))

    grids = {}
    for key in ("grid", "wide_grid"):
        if key not in doc:
            continue
        spec = GridSpec(**doc[key])
        try:
            grids[key] = (spec, spec.build(carrier))
        except InvalidParameter as exc:
            rep.error(_rename(exc, key), str(exc))

    cav = dict(doc["cavity"])
    calibrated = cav.get("excess_roundtrip") is None
    cav["excess_roundtrip"] = DEFAULT_EXCESS if calibrated else cav["excess_roundtrip"]
    cavity = None
    try:
        cavity = CavityConfig(**cav)
    except InvalidParameter as exc:
        rep.error(_rename(exc, "cavity"), str(exc))

    pulse = None
    if "pulse" in doc:
        pulse = PulseSpec(**doc["pulse"])
        try:
            lo, hi = energy_bandwidth(pulse.build())
        except InvalidParameter as exc:
            rep.error(_rename(exc, "pulse"), str(exc))
        else:
            if "grid" in grids:
                pts = grids["grid"][1].points
                if lo < pts[0] or hi > pts[-1]:
                    rep.error("pulse", "pulse bandwidth exceeds the grid span")

    sweep = None
    if "sweep" in doc:
        s = doc["sweep"]
        sweep = SweepSpec(tuple(float(g) for g in s["gamma_values"]),
                          float(s.get("span_factor", 20.0)), int(s.get("count", 1 << 18)))
        if not holes:
            rep.error("sweep", "a sweep needs a template hole in profile.holes")
        for i, g in enumerate(sweep.gamma_values):
            if not g > 0:
                rep.error(f"sweep.gamma_values[{i}]", "hole.width must be positive")
        if sweep.count % 2:
            rep.error("sweep.count", "grid count must be even")

    analysis = doc.get("analysis", {})
    hint = analysis.get("linewidth_hint")
    if hint is not None:
        # the wide grid only has to resolve the broad wing modes
        if "grid" in grids and grids["grid"][1].step > hint / 10:
            rep.warn("grid.resolution",
                     f"grid step {grids['grid'][1].step:.4g} Hz is coarser than linewidth_hint/10")

    if not rep.valid:
        return rep, None
    return rep, ScenarioConfig(
        name=doc["name"],
        background=bg,
        holes=tuple(holes),
        grid=grids["grid"][0],
        cavity=cavity,
        comment=doc.get("comment", ""),
        carrier=carrier,
        wide_grid=grids["wide_grid"][0] if "wide_grid" in grids else None,
        pulse=pulse,
        sweep=sweep,
        min_peak_fraction=float(analysis.get("min_peak_fraction", 0.01)),
        linewidth_hint=hint,
        output_dir=doc.get("output_dir"),
        calibrated_excess=calibrated,
    )


def parse_config(doc: dict) -> ScenarioConfig:
    rep, cfg = check(doc)
    if cfg is None:
        raise ConfigInvalid(rep)
    return cfg


def validate_config(path: str | Path) -> ValidationReport:
    """Full report for a config file; unreadable files raise :class:`ConfigError`."""
    return check(load_json(path))[0]


def scenario_names() -> list[str]:
    root = resources.files("slowlight") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def scenario_path(name: str) -> Path:
    p = resources.files("slowlight") / "scenarios" / f"{name}.json"
    if not p.is_file():
        raise ConfigError(f"unknown scenario {name!r}; available: {', '.join(scenario_names())}")
    return Path(str(p))


def load_scenario(name: str) -> ScenarioConfig:
    return parse_config(load_json(scenario_path(name)))
