"""Dispersive Fabry-Perot etalon: field transfer, resonance table, mode numbers."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.optimize import brentq
from scipy.signal import peak_prominences

from slowlight.errors import InvalidParameter
from slowlight.io import write_columns
from slowlight.kk import DEFAULT_BACKGROUND_INDEX, DispersionProfile
from slowlight.profile import FrequencyGrid

DEFAULT_LENGTH = 6e-3
DEFAULT_REFLECTIVITY = 0.95
#: Measured linewidth of the empty (non-dispersive) cavity.
NONDISPERSIVE_FWHM = 1e9


def airy_fwhm_fraction(round_trip_amplitude: float) -> float:
    """FWHM / FSR of an Airy peak with round-trip field factor ``r``.

    Half maximum is reached where ``4 r sin^2(delta/2) = (1 - r)^2``.
    """
    r = round_trip_amplitude
    return 2.0 / math.pi * math.asin((1.0 - r) / (2.0 * math.sqrt(r)))


def calibrate_excess_loss(r1: float = DEFAULT_REFLECTIVITY, r2: float = DEFAULT_REFLECTIVITY,
                          fwhm: float = NONDISPERSIVE_FWHM, length: float = DEFAULT_LENGTH,
                          index: float = DEFAULT_BACKGROUND_INDEX) -> float:
    """Round-trip intensity factor A that gives the empty cavity a linewidth ``fwhm``."""
    fsr = C_LIGHT / (2.0 * index * length)
    target = fwhm / fsr
    r_max = math.sqrt(r1 * r2)
    if airy_fwhm_fraction(r_max) > target:
        raise InvalidParameter("mirrors alone are already broader than the target linewidth",
                               "cavity.fwhm")
    # below r = (sqrt(2) - 1)^2 the peak never drops to half maximum
    r_min = (math.sqrt(2.0) - 1.0) ** 2 + 1e-9
    r = brentq(lambda x: airy_fwhm_fraction(x) - target, r_min, r_max, xtol=1e-15)
    return r * r / (r1 * r2)


DEFAULT_EXCESS = calibrate_excess_loss()


@dataclass(frozen=True)
class CavityConfig:
    length: float = DEFAULT_LENGTH
    r1: float = DEFAULT_REFLECTIVITY
    r2: float = DEFAULT_REFLECTIVITY
    background_index: float = DEFAULT_BACKGROUND_INDEX
    excess_roundtrip: float = DEFAULT_EXCESS

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidParameter("cavity.length must be positive", "cavity.length")
        for name in ("r1", "r2"):
            if not 0 < getattr(self, name) < 1:
                raise InvalidParameter(f"cavity.{name} must lie in (0, 1)", f"cavity.{name}")
        if not 0 < self.excess_roundtrip <= 1:
            raise InvalidParameter("cavity.excess_roundtrip must lie in (0, 1]",
                                   "cavity.excess_roundtrip")
        if not self.background_index > 0:
            raise InvalidParameter("cavity.background_index must be positive",
                                   "cavity.background_index")

    @property
    def round_trip_amplitude(self) -> float:
        """Field factor per round trip from mirrors and excess loss (no absorption)."""
        return math.sqrt(self.r1 * self.r2 * self.excess_roundtrip)

    @property
    def round_trip_intensity(self) -> float:
        return self.r1 * self.r2 * self.excess_roundtrip

    @property
    def free_spectral_range(self) -> float:
        """Non-dispersive mode spacing c / (2 n L)."""
        return C_LIGHT / (2.0 * self.background_index * self.length)


@dataclass(frozen=True, eq=False)
class FieldTransfer:
    grid: FrequencyGrid
    t: np.ndarray

    @property
    def T(self) -> np.ndarray:
        return np.abs(self.t) ** 2


def resonance_order(detuning, disp: DispersionProfile, cfg: CavityConfig) -> np.ndarray:
    """2 L nu n(nu) / c: integer exactly on a Fabry-Perot resonance."""
    nu = disp.grid.carrier + np.asarray(detuning, dtype=float)
    return 2.0 * cfg.length * nu * disp.index_at(detuning) / C_LIGHT


def transfer(cfg: CavityConfig, alpha_samples, disp: DispersionProfile) -> FieldTransfer:
    """Complex field transmission of the absorbing, dispersive etalon.

    ``t = sqrt((1-R1)(1-R2)A) e^{i phi - aL/2} / (1 - sqrt(R1 R2 A) e^{2 i phi - aL})``
    with single-pass phase ``phi = 2 pi nu n(nu) L / c`` and ``a`` the
    intensity absorption coefficient.
    """
    alpha = np.asarray(alpha_samples, dtype=float)
    grid = disp.grid
    if alpha.shape != grid.points.shape:
        raise InvalidParameter("alpha samples and dispersion grid differ", "grid")
    if cfg.background_index != disp.background_index:
        raise InvalidParameter("cavity and dispersion background indices differ",
                               "cavity.background_index")
    order = 2.0 * cfg.length * grid.frequencies * disp.index / C_LIGHT
    # phi = pi * order; reduce modulo 2 before exponentiating
    half_turns = np.mod(order, 2.0)
    phase = np.exp(1j * math.pi * half_turns)
    loss = np.exp(-0.5 * alpha * cfg.length)
    num = math.sqrt((1 - cfg.r1) * (1 - cfg.r2) * cfg.excess_roundtrip) * phase * loss
    den = 1.0 - cfg.round_trip_amplitude * phase * phase * loss * loss
    return FieldTransfer(grid, num / den)


@dataclass
class Mode:
    center: float
    fwhm: float | None
    peak_T: float
    spacing_to_next: float | None = None
    mode_number: int | None = None
    residual: float | None = None
    order: float | None = None

    @property
    def bounded(self) -> bool:
        return self.fwhm is not None


@dataclass
class ModeTable:
    modes: list[Mode] = field(default_factory=list)

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    @property
    def centers(self) -> np.ndarray:
        return np.array([m.center for m in self.modes])

    def within(self, lo: float, hi: float) -> "ModeTable":
        return ModeTable(relink([m for m in self.modes if lo <= m.center <= hi]))

    def nearest(self, detuning: float) -> Mode:
        i = int(np.argmin(np.abs(self.centers - detuning)))
        return self.modes[i]

    def central_spacing(self, detuning: float) -> float:
        """Spacing of the adjacent pair whose midpoint is closest to ``detuning``."""
        c = self.centers
        if c.size < 2:
            raise ValueError("need at least two modes for a spacing")
        mids = 0.5 * (c[1:] + c[:-1])
        i = int(np.argmin(np.abs(mids - detuning)))
        return float(c[i + 1] - c[i])


def relink(modes: list[Mode]) -> list[Mode]:
    """Recompute ``spacing_to_next`` along an ordered list of modes."""
    for a, b in zip(modes, modes[1:]):
        a.spacing_to_next = b.center - a.center
    if modes:
        modes[-1].spacing_to_next = None
    return modes


def find_modes(ft: FieldTransfer, min_peak_fraction: float = 0.01,
               disp: DispersionProfile | None = None,
               cfg: CavityConfig | None = None) -> ModeTable:
    """Locate transmission peaks and measure their widths.

    Peaks are strict local maxima above ``min_peak_fraction`` of the global
    maximum that fall to half their height before meeting a taller sample
    (shoulders on a neighbouring resonance are dropped). Centres are refined with a parabola through the three highest
    samples; the FWHM comes from linear interpolation of the half-maximum
    crossings. A peak whose half-maximum crossing falls off the grid keeps
    ``fwhm=None``. When ``disp`` and ``cfg`` are given each mode also gets
    its integer mode number.
    """
    T = ft.T
    x = ft.grid.points
    h = ft.grid.step
    if T.size < 3 or not np.any(T > 0):
        return ModeTable()
    thr = min_peak_fraction * T.max()
    inner = T[1:-1]
    idx = np.nonzero((inner > T[:-2]) & (inner >= T[2:]) & (inner > thr))[0] + 1
    if idx.size == 0:
        return ModeTable()
    # bases: lowest sample between the peak and the nearest taller one (or the grid edge)
    # flat-topped candidates get zero prominence; their bases are still valid
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", "some peaks have a prominence of 0")
        _, left_base, right_base = peak_prominences(T, idx)
    taller_left = np.r_[-np.inf, np.maximum.accumulate(T)[:-1]]
    taller_right = np.r_[np.maximum.accumulate(T[::-1])[::-1][1:], -np.inf]

    modes = []
    for i, lb, rb in zip(idx, left_base, right_base):
        y0, y1, y2 = T[i - 1], T[i], T[i + 1]
        denom = y0 - 2 * y1 + y2
        off = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        center = x[i] + off * h
        peak = y1 - 0.25 * (y0 - y2) * off
        half = 0.5 * peak
        lo = _crossing(T, x, i, lb, half, taller_left[i] > y1)
        hi = _crossing(T, x, i, rb, half, taller_right[i] > y1)
        if lo is _UNRESOLVED or hi is _UNRESOLVED:
            continue
        fwhm = None if lo is None or hi is None else hi - lo
        modes.append(Mode(center=float(center), fwhm=fwhm, peak_T=float(peak)))

    table = ModeTable(relink(modes))
    if disp is not None and cfg is not None:
        for m in table:
            num, res, order = mode_number(m.center, disp, cfg)
            m.mode_number, m.residual, m.order = num, res, order
    return table


_UNRESOLVED = object()


def _crossing(T, x, i, base, level, blocked):
    """Half-maximum crossing between peak ``i`` and its base on one side.

    Returns None when the side runs off the grid without crossing and
    ``_UNRESOLVED`` when a taller sample comes first (a shoulder, not a
    resonance).
    """
    if T[base] >= level:
        return _UNRESOLVED if blocked else None
    if base < i:
        k = base + int(np.nonzero(T[base:i] < level)[0][-1])
        j = k + 1
    else:
        k = i + int(np.nonzero(T[i:base + 1] < level)[0][0])
        j = k - 1
    # T[j] >= level > T[k]
    frac = (T[j] - level) / (T[j] - T[k])
    return float(x[j] + frac * (x[k] - x[j]))


def mode_number(center: float, disp: DispersionProfile, cfg: CavityConfig) -> tuple[int, float, float]:
    """Integer mode number of a resonance, its residual and the raw order."""
    g = disp.grid.points
    if not g[0] <= center <= g[-1]:
        raise InvalidParameter("mode centre lies outside the dispersion grid", "center")
    order = float(resonance_order(center, disp, cfg))
    m = int(round(order))
    return m, abs(order - m), order


def order_increments(table: ModeTable, disp: DispersionProfile, cfg: CavityConfig) -> list[float]:
    """Change of 2 L nu n / c between neighbouring modes of one transparency band.

    Pairs separated by an opaque stretch where the order is not monotonic
    (anomalous dispersion inside the absorption line) are skipped.
    """
    out = []
    g = disp.grid.points
    orders = resonance_order(g, disp, cfg)
    for a, b in zip(table.modes, table.modes[1:]):
        i0, i1 = np.searchsorted(g, [a.center, b.center])
        seg = orders[max(i0 - 1, 0):min(i1 + 1, g.size)]
        if seg.size > 1 and np.all(np.diff(seg) > 0):
            out.append(float(resonance_order(b.center, disp, cfg) - resonance_order(a.center, disp, cfg)))
    return out


def write_transfer_csv(path: str | Path, ft: FieldTransfer) -> None:
    write_columns(path, ["detuning_Hz", "T", "re_t", "im_t"],
                  [ft.grid.points, ft.T, ft.t.real, ft.t.imag])


def write_modes_csv(path: str | Path, table: ModeTable) -> None:
    """Unbounded widths, the last spacing and missing mode numbers are written as nan."""
    def col(name):
        return [np.nan if getattr(m, name) is None else getattr(m, name) for m in table]

    write_columns(path, ["center_Hz", "fwhm_Hz", "peak_T", "spacing_Hz", "mode_number"],
                  [col("center"), col("fwhm"), col("peak_T"), col("spacing_to_next"),
                   col("mode_number")])
