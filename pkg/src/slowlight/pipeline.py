"""Scenario runner: profile -> dispersion -> cavity -> modes -> pulse -> report."""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from slowlight.cavity import (FieldTransfer, ModeTable, relink, find_modes, order_increments,
                              transfer, write_modes_csv, write_transfer_csv)
from slowlight.config import ScenarioConfig
from slowlight.errors import InvalidParameter
from slowlight.io import write_json
from slowlight.kk import DispersionProfile, kk_analytic, write_dispersion_csv
from slowlight.metrics import SlowLightReport, build_report, tuning_sweep, write_reports
from slowlight.profile import (AbsorptionProfile, FrequencyGrid, build_profile, sample,
                               write_profile_csv)
from slowlight.pulse import (PulseEnvelope, RingDown, propagate, ring_down_metrics,
                             write_pulse_csv)

STAGES = ("profile", "dispersion", "spectrum", "modes", "pulse", "sweep")


@dataclass
class Solved:
    """Everything computed on one detuning grid."""

    grid: FrequencyGrid
    alpha: np.ndarray
    disp: DispersionProfile | None = None
    ft: FieldTransfer | None = None
    modes: ModeTable | None = None


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    profile: AbsorptionProfile
    main: Solved
    wide: Solved | None = None
    modes: ModeTable | None = None
    increments: list[float] = field(default_factory=list)
    report: SlowLightReport | None = None
    pulse_in: PulseEnvelope | None = None
    pulse_out: PulseEnvelope | None = None
    ring_down: RingDown | None = None
    delay: float | None = None
    sweep: list[SlowLightReport] | None = None


def _need(stage: str, upto: str) -> bool:
    return upto == "all" or STAGES.index(stage) <= STAGES.index(upto)


def _solve(cfg: ScenarioConfig, prof: AbsorptionProfile, grid: FrequencyGrid, upto: str) -> Solved:
    s = Solved(grid, sample(prof, grid))
    if _need("dispersion", upto):
        s.disp = kk_analytic(prof, grid, cfg.cavity.background_index)
    if _need("spectrum", upto):
        s.ft = transfer(cfg.cavity, s.alpha, s.disp)
    if _need("modes", upto):
        s.modes = find_modes(s.ft, cfg.min_peak_fraction, s.disp, cfg.cavity)
    return s


def _merge(main: Solved, wide: Solved) -> ModeTable:
    """Main-grid modes plus wide-grid modes lying outside the main grid."""
    lo, hi = main.grid.points[0], main.grid.points[-1]
    extra = [m for m in wide.modes if not lo <= m.center <= hi]
    return ModeTable(relink(sorted(list(main.modes) + extra, key=lambda m: m.center)))


def compute(cfg: ScenarioConfig, upto: str = "all") -> ScenarioResult:
    """Run the pipeline up to and including stage ``upto`` (or ``"all"``)."""
    if upto != "all" and upto not in STAGES:
        raise InvalidParameter(f"unknown stage {upto!r}", "stage")
    prof = build_profile(cfg.background, list(cfg.holes))
    main_stage = upto if upto in STAGES[:4] else "modes"
    res = ScenarioResult(cfg, prof, _solve(cfg, prof, cfg.grid.build(cfg.carrier), main_stage))
    if cfg.wide_grid is not None and _need("spectrum", upto):
        res.wide = _solve(cfg, prof, cfg.wide_grid.build(cfg.carrier), main_stage)

    if not _need("modes", upto):
        return res
    res.modes = res.main.modes if res.wide is None else _merge(res.main, res.wide)
    for s in (res.main, res.wide):
        if s is None:
            continue
        table = s.modes
        if s is res.wide:
            lo, hi = res.main.grid.points[0], res.main.grid.points[-1]
            table = ModeTable([m for m in table if not lo <= m.center <= hi])
        res.increments += order_increments(table, s.disp, cfg.cavity)

    if cfg.pulse is not None and _need("pulse", upto):
        res.pulse_in = cfg.pulse.build()
        res.pulse_out = propagate(res.pulse_in, res.main.ft)
        res.ring_down = ring_down_metrics(res.pulse_out)
        if res.ring_down.peak_times:
            res.delay = res.ring_down.peak_times[0] - cfg.pulse.center

    if cfg.holes:
        res.report = build_report(prof, cfg.holes[0], res.main.disp, res.main.modes, cfg.cavity,
                                  res.delay)

    if cfg.sweep is not None and _need("sweep", upto):
        res.sweep = tuning_sweep(cfg.holes[0], cfg.sweep.gamma_values, cfg.background,
                                 cfg.cavity, cfg.sweep.span_factor, cfg.sweep.count, cfg.carrier)
    return res


def _ring_down_doc(res: ScenarioResult) -> dict:
    rd = res.ring_down
    return {"peak_times_s": list(rd.peak_times), "peak_intensities": list(rd.peak_intensities),
            "period_s": rd.period, "amplitude_ratio": rd.amplitude_ratio,
            "first_peak_delay_s": res.delay}


def emit(res: ScenarioResult, out: Path, upto: str = "all", normalize: bool = False,
         fmt: str = "csv") -> list[Path]:
    """Write the artifacts of the requested stage (every stage for ``"all"``)."""
    out.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []

    def want(stage):
        return upto == "all" or upto == stage

    def put(name, writer, *args):
        path = out / name
        writer(path, *args)
        files.append(path)

    if want("profile"):
        put("profile.csv", write_profile_csv, res.profile, res.main.grid)
        put("profile_breakpoints.csv", write_profile_csv, res.profile)
    if want("dispersion"):
        put("dispersion.csv", write_dispersion_csv, res.main.disp)
    if want("spectrum"):
        put("spectrum.csv", write_transfer_csv, res.main.ft)
        if res.wide is not None:
            put("spectrum_wide.csv", write_transfer_csv, res.wide.ft)
    if want("modes"):
        if fmt == "json":
            put("modes.json", write_json, {"modes": [vars(m) for m in res.modes]})
        else:
            put("modes.csv", write_modes_csv, res.modes)
        if res.report is not None:
            put(f"report.{fmt}", write_reports, [res.report], fmt)
    if want("pulse") and res.pulse_in is not None:
        put("pulse_in.csv", write_pulse_csv, res.pulse_in, normalize)
        put("pulse_out.csv", write_pulse_csv, res.pulse_out, normalize)
        put("ringdown.json", write_json, _ring_down_doc(res))
    if want("sweep") and res.sweep is not None:
        put(f"sweep.{fmt}", write_reports, res.sweep, fmt)
    return files


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_scenario(cfg: ScenarioConfig, out: str | Path | None = None, upto: str = "all",
                 normalize: bool = False, fmt: str = "csv") -> tuple[ScenarioResult, Path]:
    """Compute, emit and write ``manifest.json``; returns the result and manifest path."""
    if fmt not in ("csv", "json"):
        raise InvalidParameter(f"unknown format {fmt!r}", "format")
    t0 = time.perf_counter()
    out = Path(out or cfg.output_dir or f"out/{cfg.name}")
    res = compute(cfg, upto)
    files = emit(res, out, upto, normalize, fmt)
    manifest = {
        "scenario": cfg.name,
        "stage": upto,
        "config_hash": cfg.config_hash(),
        "files": [{"path": p.name, "sha256": _sha256(p)} for p in files],
        "wall_time_s": round(time.perf_counter() - t0, 3),
    }
    path = out / "manifest.json"
    write_json(path, manifest)
    return res, path
