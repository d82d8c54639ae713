"""Closed-form slow-light figures of merit and quasi-static window-width sweeps."""

from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT

from slowlight.cavity import CavityConfig, ModeTable, airy_fwhm_fraction, find_modes, transfer
from slowlight.errors import InvalidParameter
from slowlight.io import write_json
from slowlight.kk import DispersionProfile, kk_analytic
from slowlight.profile import (AbsorptionProfile, FrequencyGrid, HoleSpec, build_profile,
                               sample)


def vg_window_estimate(gamma: float, alpha: float) -> float:
    """Group velocity estimate 2 pi Gamma / alpha for a window of width Gamma."""
    if not gamma > 0:
        raise InvalidParameter("gamma must be positive", "gamma")
    if not alpha > 0:
        raise InvalidParameter("alpha must be positive", "alpha")
    return 2.0 * math.pi * gamma / alpha


def tb_product(alpha: float, length: float) -> float:
    """Delay-bandwidth product alpha * l / (2 pi) of a hole-burnt delay line."""
    return alpha * length / (2.0 * math.pi)


def mode_spacing_local(v_g: float, length: float) -> float:
    """Local free spectral range v_g / 2L."""
    return v_g / (2.0 * length)


def vg_from_ringdown(period: float, length: float) -> float:
    return 2.0 * length / period


def nondispersive_linewidth(cfg: CavityConfig) -> float:
    """Airy FWHM of the cavity with only background index and mirror/excess loss."""
    return airy_fwhm_fraction(cfg.round_trip_amplitude) * cfg.free_spectral_range


def alpha_effective(profile: AbsorptionProfile, hole: HoleSpec) -> float:
    """Absorption just outside the window, averaged over both sides.

    For a ramped edge the value is read one ramp width beyond the outer
    edge; for a square edge it is the outer one-sided limit.
    """
    if hole.edge_ramp > 0:
        lo = float(profile(hole.lower - hole.edge_ramp))
        hi = float(profile(hole.upper + hole.edge_ramp))
    else:
        lo = float(profile.left_limit(hole.lower))
        hi = float(profile.right_limit(hole.upper))
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class SlowLightReport:
    gamma: float
    alpha_eff: float
    v_g_window: float
    v_g_kk: float
    mode_spacing: float
    linewidth: float
    narrowing_factor: float
    spacing_reduction_factor: float
    tb_product: float
    group_index_center: float
    #: delay of the first transmitted pulse peak times gamma, when a pulse was run
    tb_simulated: float | None = None

    def __post_init__(self):
        for f in ("gamma", "alpha_eff", "v_g_window", "v_g_kk", "mode_spacing", "linewidth",
                  "narrowing_factor", "spacing_reduction_factor", "tb_product"):
            if not getattr(self, f) > 0:
                raise InvalidParameter(f"report.{f} must be positive", f"report.{f}")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


REPORT_FIELDS = [f.name for f in dataclasses.fields(SlowLightReport)]


def build_report(profile: AbsorptionProfile, hole: HoleSpec, disp: DispersionProfile,
                 table: ModeTable, cfg: CavityConfig, delay: float | None = None) -> SlowLightReport:
    """Figures of merit for the window ``hole`` from a solved cavity.

    Spacing and linewidth are measured on the resonances nearest the window
    centre; the reference linewidth is the empty-cavity Airy width.
    """
    inside = table.within(hole.lower, hole.upper)
    if len(inside) < 2:
        raise InvalidParameter("fewer than two resonances inside the window", "hole")
    centre = inside.nearest(hole.center)
    if centre.fwhm is None:
        raise InvalidParameter("central resonance width is not resolved", "grid")
    spacing = inside.central_spacing(hole.center)
    a_eff = alpha_effective(profile, hole)
    ng = float(disp.group_index_at(hole.center))
    return SlowLightReport(
        gamma=hole.width,
        alpha_eff=a_eff,
        v_g_window=vg_window_estimate(hole.width, a_eff),
        v_g_kk=C_LIGHT / ng,
        mode_spacing=spacing,
        linewidth=centre.fwhm,
        narrowing_factor=nondispersive_linewidth(cfg) / centre.fwhm,
        spacing_reduction_factor=cfg.free_spectral_range / spacing,
        tb_product=tb_product(a_eff, cfg.length),
        group_index_center=ng,
        tb_simulated=None if delay is None else delay * hole.width,
    )


def sweep_hole(template: HoleSpec, gamma: float) -> HoleSpec:
    """Template hole resized to ``gamma``; the edge ramp keeps its fraction of the width."""
    ramp = template.edge_ramp * gamma / template.width
    return HoleSpec(template.center, gamma, template.residual, ramp)


def tuning_sweep(template: HoleSpec, gamma_values, background: dict, cavity: CavityConfig,
                 span_factor: float = 20.0, count: int = 1 << 18,
                 carrier: float | None = None) -> list[SlowLightReport]:
    """One independent profile -> dispersion -> cavity -> modes solve per window width.

    Each grid spans ``span_factor`` window widths with ``count`` points, so
    the resolution scales with Gamma. Rows come back ordered by Gamma.
    """
    rows = []
    for gamma in sorted(float(g) for g in gamma_values):
        hole = sweep_hole(template, gamma)
        prof = build_profile(background, [hole])
        kwargs = {} if carrier is None else {"carrier": carrier}
        grid = FrequencyGrid.centered(span_factor * gamma, count, center=hole.center, **kwargs)
        disp = kk_analytic(prof, grid, cavity.background_index)
        ft = transfer(cavity, sample(prof, grid), disp)
        table = find_modes(ft, disp=disp, cfg=cavity)
        rows.append(build_report(prof, hole, disp, table, cavity))
    return rows


def write_reports(path: str | Path, rows: list[SlowLightReport], fmt: str = "csv") -> None:
    if fmt == "json":
        write_json(path, {"reports": [r.as_dict() for r in rows]})
        return
    if fmt != "csv":
        raise InvalidParameter(f"unknown format {fmt!r}", "format")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_FIELDS)
        for r in rows:
            w.writerow(["" if v is None else repr(float(v)) for v in dataclasses.astuple(r)])


def spacing_consistency(table: ModeTable, disp: DispersionProfile, cfg: CavityConfig,
                        max_ng_variation: float = 0.10) -> list[tuple[float, float]]:
    """(measured, predicted) spacings for neighbour pairs where n_g is slowly varying.

    The prediction is v_g / 2L with n_g taken at the pair midpoint. Pairs over
    which n_g changes by more than ``max_ng_variation`` are left out.
    """
    out = []
    g = disp.grid.points
    for a, b in zip(table.modes, table.modes[1:]):
        i0, i1 = np.searchsorted(g, [a.center, b.center])
        seg = disp.group_index[max(i0 - 1, 0):min(i1 + 1, g.size)]
        if seg.size < 2 or np.any(seg <= 0):
            continue
        if (seg.max() - seg.min()) / seg.min() > max_ng_variation:
            continue
        ng = float(disp.group_index_at(0.5 * (a.center + b.center)))
        out.append((b.center - a.center, mode_spacing_local(C_LIGHT / ng, cfg.length)))
    return out
