"""Engineered absorption profiles: inhomogeneous background plus burned holes.

Profiles are stored as piecewise-linear functions of detuning (Hz) with
constant extrapolation beyond the outermost breakpoints. A square hole edge
is a genuine discontinuity and is stored as two breakpoints at the same
detuning, the first holding the left limit and the second the right limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT

from slowlight.errors import InvalidParameter
from slowlight.io import read_columns, write_columns

#: Vacuum wavelength of the Pr:YSO 3H4-1D2 transition used in the experiment.
DEFAULT_WAVELENGTH = 605.976e-9
DEFAULT_CARRIER = C_LIGHT / DEFAULT_WAVELENGTH

#: Background absorption near the hole, alpha*L = 2 over 1 mm.
DEFAULT_ALPHA = 2000.0
#: Inhomogeneous linewidth of the Pr ensemble.
INHOMOGENEOUS_FWHM = 9e9

#: Edge ramps narrower than this fraction of the hole width are burnt as square.
MIN_RAMP_FRACTION = 1e-6

_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Uniform detuning axis relative to an absolute optical carrier."""

    carrier: float
    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 1 or pts.size < 2 or pts.size % 2:
            raise InvalidParameter("grid needs an even number (>= 2) of points", "grid.count")
        if not self.carrier > 0:
            raise InvalidParameter("carrier must be positive", "grid.carrier")
        steps = np.diff(pts)
        if steps[0] <= 0:
            raise InvalidParameter("grid points must be strictly increasing", "grid.points")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-300) + 1e-12 * np.max(np.abs(pts)):
            raise InvalidParameter("grid points must be uniformly spaced", "grid.points")
        if np.max(np.abs(pts)) >= self.carrier / 100:
            raise InvalidParameter("detuning span too large for the narrowband model", "grid.span")

    @classmethod
    def centered(cls, span: float, count: int, carrier: float = DEFAULT_CARRIER,
                 center: float = 0.0) -> "FrequencyGrid":
        """Grid of ``count`` points covering ``[center - span/2, center + span/2)``.

        The point ``center`` itself is always on the grid.
        """
        if not span > 0:
            raise InvalidParameter("grid span must be positive", "grid.span")
        if count < 2 or count % 2:
            raise InvalidParameter("grid count must be even and >= 2", "grid.count")
        step = span / count
        return cls(carrier, center + step * (np.arange(count) - count // 2))

    @property
    def count(self) -> int:
        return self.points.size

    @property
    def step(self) -> float:
        return float(self.points[1] - self.points[0])

    @property
    def span(self) -> float:
        return self.step * self.count

    @property
    def frequencies(self) -> np.ndarray:
        """Absolute optical frequencies (Hz)."""
        return self.carrier + self.points

    def same_as(self, other: "FrequencyGrid") -> bool:
        return (self.carrier == other.carrier and self.count == other.count
                and np.array_equal(self.points, other.points))


@dataclass(frozen=True)
class HoleSpec:
    """A burned spectral transmission window.

    ``width`` is the full outer width; the flat bottom spans
    ``width - 2 * edge_ramp``.
    """

    center: float
    width: float
    residual: float = 0.0
    edge_ramp: float = 0.0

    def __post_init__(self):
        if not self.width > 0:
            raise InvalidParameter("hole.width must be positive", "hole.width")
        if self.residual < 0:
            raise InvalidParameter("hole.residual must be non-negative", "hole.residual")
        if self.edge_ramp < 0 or self.edge_ramp > self.width / 2:
            raise InvalidParameter("hole.edge_ramp must lie in [0, width/2]", "hole.edge_ramp")

    @property
    def lower(self) -> float:
        return self.center - self.width / 2

    @property
    def upper(self) -> float:
        return self.center + self.width / 2


@dataclass(frozen=True, eq=False)
class AbsorptionProfile:
    """Piecewise-linear intensity absorption coefficient alpha(detuning) in 1/m."""

    breakpoints: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        x = _frozen(self.breakpoints)
        a = _frozen(self.alphas)
        object.__setattr__(self, "breakpoints", x)
        object.__setattr__(self, "alphas", a)
        if x.ndim != 1 or x.shape != a.shape or x.size < 1:
            raise InvalidParameter("breakpoints and alphas must be matching 1-d arrays", "profile")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(a))):
            raise InvalidParameter("profile values must be finite", "profile")
        if np.any(a < 0):
            raise InvalidParameter("absorption must be non-negative", "profile.alphas")
        dx = np.diff(x)
        if np.any(dx < 0):
            raise InvalidParameter("breakpoints must be sorted", "profile.breakpoints")
        # a zero-width step encodes a jump; three coincident points would be ambiguous
        if np.any((dx[:-1] == 0) & (dx[1:] == 0)):
            raise InvalidParameter("at most two breakpoints may coincide", "profile.breakpoints")

    def __eq__(self, other):
        if not isinstance(other, AbsorptionProfile):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.alphas, other.alphas))

    __hash__ = None

    @property
    def edge_values(self) -> tuple[float, float]:
        return float(self.alphas[0]), float(self.alphas[-1])

    def left_limit(self, x) -> np.ndarray:
        """alpha(x-), the limit approaching from lower detunings."""
        bp, al = self.breakpoints, self.alphas
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(bp, x, side="left")
        return _interp_at(bp, al, x, i)

    def right_limit(self, x) -> np.ndarray:
        """alpha(x+), the limit approaching from higher detunings."""
        bp, al = self.breakpoints, self.alphas
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(bp, x, side="right")
        return _interp_at(bp, al, x, i)

    def __call__(self, x) -> np.ndarray:
        # at a jump the mean of the two limits is returned
        return 0.5 * (self.left_limit(x) + self.right_limit(x))

    def nodes(self):
        """Distinct breakpoints with one-sided values and slopes.

        Returns ``(x, value_left, value_right, slope_left, slope_right)``.
        Slopes outside the breakpoint span are zero.
        """
        bp, al = self.breakpoints, self.alphas
        keep_first = np.r_[True, np.diff(bp) > 0]
        keep_last = np.r_[np.diff(bp) > 0, True]
        x = bp[keep_first]
        v_left = al[keep_first]
        v_right = al[keep_last]
        # segment slopes between distinct nodes
        seg = (v_left[1:] - v_right[:-1]) / np.diff(x)
        s_left = np.r_[0.0, seg]
        s_right = np.r_[seg, 0.0]
        return x, v_left, v_right, s_left, s_right


def _interp_at(bp, al, x, i):
    n = bp.size
    out = np.empty(x.shape, dtype=float)
    lo = i <= 0
    hi = i >= n
    mid = ~(lo | hi)
    out[lo] = al[0]
    out[hi] = al[-1]
    j = i[mid]
    x0, x1 = bp[j - 1], bp[j]
    a0, a1 = al[j - 1], al[j]
    w = x1 - x0
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(w > 0, (x[mid] - x0) / np.where(w > 0, w, 1.0), 0.0)
    out[mid] = a0 + frac * (a1 - a0)
    return out


def sample(profile: AbsorptionProfile, grid: FrequencyGrid) -> np.ndarray:
    """Exact piecewise-linear evaluation of ``profile`` on every grid point."""
    return profile(grid.points)


def build_background(shape: str, peak_alpha: float, fwhm: float | None = None,
                     grid_span: float = 2e9, center: float = 0.0) -> AbsorptionProfile:
    """Inhomogeneous background line as a piecewise-linear profile.

    Parameters
    ----------
    shape : {"flat", "gaussian"}
    peak_alpha : float
        Peak intensity absorption coefficient (1/m).
    fwhm : float, optional
        Full width at half maximum (Hz); required for ``"gaussian"``.
    grid_span : float
        Total detuning span covered by breakpoints; the profile is constant
        beyond it.
    center : float
        Line center detuning (Hz).

    Notes
    -----
    Gaussian breakpoints are placed adaptively from the local curvature so
    that the linear interpolation error stays below 0.1% of ``peak_alpha``.
    """
    if peak_alpha < 0:
        raise InvalidParameter("background.peak_alpha must be non-negative", "background.peak_alpha")
    if not grid_span > 0:
        raise InvalidParameter("background.grid_span must be positive", "background.grid_span")
    half = grid_span / 2
    if shape == "flat":
        return AbsorptionProfile([center - half, center + half], [peak_alpha, peak_alpha])
    if shape != "gaussian":
        raise InvalidParameter(f"unknown background shape {shape!r}", "background.shape")
    if fwhm is None or not fwhm > 0:
        raise InvalidParameter("background.fwhm must be positive for a gaussian", "background.fwhm")

    sigma = fwhm * _FWHM_TO_SIGMA
    offsets = _gaussian_offsets(sigma, half)
    if fwhm / 2 < half:
        offsets = np.union1d(offsets, [fwhm / 2])
    x = np.r_[-offsets[:0:-1], offsets]
    a = peak_alpha * np.exp(-0.5 * (x / sigma) ** 2)
    return AbsorptionProfile(center + x, a)


def _gaussian_offsets(sigma: float, half: float, tol: float = 5e-4) -> np.ndarray:
    # |f''|/peak for a unit gaussian, maximised over a look-ahead window
    def curv(u):
        return np.abs(u**2 - 1.0) * np.exp(-0.5 * u**2)

    out = [0.0]
    h_max = 0.5 * sigma
    while out[-1] < half:
        x0 = out[-1]
        probe = np.linspace(x0, x0 + h_max, 9) / sigma
        m = max(curv(probe).max(), 1e-12) / sigma**2
        h = min(h_max, math.sqrt(8.0 * tol / m))
        out.append(min(x0 + h, half))
    return np.asarray(out)


def burn_hole(profile: AbsorptionProfile, hole: HoleSpec) -> AbsorptionProfile:
    """Remove absorption inside a spectral window.

    Inside the flat bottom the result equals ``hole.residual``; across each
    edge ramp it rises linearly to the original value at the outer edge.
    The result is the pointwise minimum of this template and the original
    profile, so burning never adds absorption and is idempotent.
    """
    bp = profile.breakpoints
    lo, hi = hole.lower, hole.upper
    if lo < bp[0] or hi > bp[-1]:
        raise InvalidParameter("hole lies outside the profile breakpoint span", "hole.center")
    local = float(profile(np.array([hole.center]))[0])
    # roundoff slack: re-burning a zero-width bottom reads it back by interpolation
    if hole.residual > local + 1e-12 * max(abs(local), 1.0):
        raise InvalidParameter("hole.residual exceeds the local background", "hole.residual")

    a_lo = float(profile.left_limit(np.array([lo]))[0])
    a_hi = float(profile.right_limit(np.array([hi]))[0])
    r = hole.residual
    w = hole.edge_ramp
    # a ramp this thin is a jump; keeping it would cost cancellation in the KK logs
    if w > MIN_RAMP_FRACTION * hole.width:
        template = AbsorptionProfile([lo, lo + w, hi - w, hi], [a_lo, r, r, a_hi])
    else:
        template = AbsorptionProfile([lo, lo, hi, hi], [a_lo, r, r, a_hi])
    return _min_on_window(profile, template, lo, hi)


def _min_on_window(base: AbsorptionProfile, tmpl: AbsorptionProfile,
                   lo: float, hi: float) -> AbsorptionProfile:
    bp = base.breakpoints
    cand = np.unique(np.r_[bp[(bp > lo) & (bp < hi)], tmpl.breakpoints])
    # crossings of the two linear pieces inside each interval
    xs = [cand]
    if cand.size > 1:
        a, b = cand[:-1], cand[1:]
        d0 = base.right_limit(a) - tmpl.right_limit(a)
        d1 = base.left_limit(b) - tmpl.left_limit(b)
        cross = (d0 * d1) < 0
        if np.any(cross):
            t = d0[cross] / (d0[cross] - d1[cross])
            xs.append(a[cross] + t * (b[cross] - a[cross]))
    cand = np.unique(np.concatenate(xs))

    left = np.minimum(base.left_limit(cand), tmpl.left_limit(cand))
    right = np.minimum(base.right_limit(cand), tmpl.right_limit(cand))
    # outside the window the base is kept untouched
    left[0] = base.left_limit(cand[:1])[0]
    right[-1] = base.right_limit(cand[-1:])[0]

    # roundoff must not masquerade as a jump: its 1/(nu - x) term is unbounded
    tol = 1e-12 * max(float(np.max(np.abs(base.alphas))), float(np.max(np.abs(tmpl.alphas))), 1e-300)
    win_x, win_a = [], []
    for xi, l, r in zip(cand, left, right):
        win_x.append(xi)
        win_a.append(l)
        if abs(r - l) > tol:
            win_x.append(xi)
            win_a.append(r)

    outer_lo = bp < lo
    outer_hi = bp > hi
    x = np.r_[bp[outer_lo], win_x, bp[outer_hi]]
    a = np.r_[base.alphas[outer_lo], win_a, base.alphas[outer_hi]]
    return _simplify(AbsorptionProfile(x, a))


def _simplify(p: AbsorptionProfile) -> AbsorptionProfile:
    """Drop interior breakpoints that are collinear with their neighbours."""
    x, a = p.breakpoints, p.alphas
    scale = max(float(np.max(np.abs(a))), 1e-300)
    # coincident pairs with equal values are not jumps
    dup = np.r_[False, (np.diff(x) == 0) & (np.abs(np.diff(a)) <= 1e-12 * scale)]
    x, a = x[~dup], a[~dup]
    if x.size <= 2:
        return AbsorptionProfile(x, a)
    keep = np.ones(x.size, dtype=bool)
    for i in range(1, x.size - 1):
        j = i - 1
        while not keep[j]:
            j -= 1
        x0, x1, x2 = x[j], x[i], x[i + 1]
        if x0 == x1 or x1 == x2:
            continue
        pred = a[j] + (a[i + 1] - a[j]) * (x1 - x0) / (x2 - x0)
        if abs(pred - a[i]) <= 1e-12 * scale:
            keep[i] = False
    return AbsorptionProfile(x[keep], a[keep])


def build_profile(background: dict, holes: list[HoleSpec]) -> AbsorptionProfile:
    """Convenience: background keyword dict followed by a sequence of burns."""
    prof = build_background(**background)
    for h in holes:
        prof = burn_hole(prof, h)
    return prof


def write_profile_csv(path: str | Path, profile: AbsorptionProfile,
                      grid: FrequencyGrid | None = None) -> None:
    """Two-column CSV (detuning_Hz, alpha_per_m).

    Without a grid the breakpoints themselves are written, which round-trips
    exactly through :func:`read_profile_csv`.
    """
    if grid is None:
        x, a = profile.breakpoints, profile.alphas
    else:
        x, a = grid.points, sample(profile, grid)
    write_columns(path, ["detuning_Hz", "alpha_per_m"], [x, a])


def read_profile_csv(path: str | Path) -> AbsorptionProfile:
    cols = read_columns(path)
    return AbsorptionProfile(cols["detuning_Hz"], cols["alpha_per_m"])
