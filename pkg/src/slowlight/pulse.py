"""Linear propagation of pulse envelopes through a cavity transfer function.

Envelopes are baseband at the optical carrier. Time and frequency follow the
physics sign convention ``E(t) = sum_nu E(nu) exp(-2 pi i nu t)`` so that a
transfer factor ``exp(+i phi(nu))`` with ``phi`` increasing in ``nu``
delays the pulse. With numpy's transforms this means ``ifft`` maps time to
frequency and ``fft`` maps back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import find_peaks

from slowlight.cavity import FieldTransfer
from slowlight.errors import InvalidParameter
from slowlight.io import write_columns

MIN_SAMPLES_PER_FWHM = 16


@dataclass(frozen=True, eq=False)
class PulseEnvelope:
    times: np.ndarray
    field: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        f = np.asarray(self.field, dtype=complex)
        if t.ndim != 1 or t.shape != f.shape or t.size < 2:
            raise InvalidParameter("times and field must be matching 1-d arrays", "pulse")
        steps = np.diff(t)
        if steps[0] <= 0 or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
            raise InvalidParameter("pulse time grid must be uniform and increasing", "pulse.times")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "field", f)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    @property
    def energy(self) -> float:
        return float(np.sum(self.intensity) * self.dt)

    def scaled(self, k: complex) -> "PulseEnvelope":
        return PulseEnvelope(self.times, k * self.field)


def gaussian_pulse(fwhm: float, center: float = 0.0, time_span: float | None = None,
                   samples: int = 4096) -> PulseEnvelope:
    """Unit-peak Gaussian envelope whose *intensity* FWHM is ``fwhm``.

    The time grid has ``samples`` points spaced ``time_span / samples`` and
    contains ``t = 0``.
    """
    if not fwhm > 0:
        raise InvalidParameter("pulse.fwhm must be positive", "pulse.fwhm")
    if time_span is None:
        time_span = 20 * fwhm
    if time_span < 10 * fwhm:
        raise InvalidParameter("pulse.time_span must be at least 10 x fwhm", "pulse.time_span")
    dt = time_span / samples
    if fwhm / dt < MIN_SAMPLES_PER_FWHM:
        raise InvalidParameter(
            f"pulse undersampled: {fwhm / dt:.1f} samples per fwhm, need {MIN_SAMPLES_PER_FWHM}",
            "pulse.samples")
    t = dt * (np.arange(samples) - samples // 2)
    env = np.exp(-2.0 * math.log(2.0) * ((t - center) / fwhm) ** 2)
    return PulseEnvelope(t, env.astype(complex))


def gaussian_energy(fwhm: float, peak: float = 1.0) -> float:
    """Closed-form integral of the intensity of :func:`gaussian_pulse`."""
    return peak * fwhm * math.sqrt(math.pi / (4.0 * math.log(2.0)))


def spectrum(pulse: PulseEnvelope) -> tuple[np.ndarray, np.ndarray]:
    """Detuning bins (Hz) and envelope spectrum in the module's sign convention."""
    n = pulse.times.size
    return np.fft.fftfreq(n, pulse.dt), np.fft.ifft(pulse.field)


def energy_bandwidth(pulse: PulseEnvelope, fraction: float = 0.99) -> tuple[float, float]:
    """Detuning interval holding ``fraction`` of the spectral energy (equal tails cut)."""
    f, spec = spectrum(pulse)
    order = np.argsort(f)
    f, p = f[order], np.abs(spec[order]) ** 2
    cum = np.cumsum(p)
    if not cum[-1] > 0:
        return 0.0, 0.0
    cum /= cum[-1]
    tail = 0.5 * (1.0 - fraction)
    lo = f[np.searchsorted(cum, tail)]
    hi = f[min(np.searchsorted(cum, 1.0 - tail), f.size - 1)]
    return float(lo), float(hi)


def resample_transfer(ft: FieldTransfer, detunings: np.ndarray) -> np.ndarray:
    """Linear interpolation of t(nu) onto arbitrary detunings, constant beyond the grid."""
    x = ft.grid.points
    return np.interp(detunings, x, ft.t.real) + 1j * np.interp(detunings, x, ft.t.imag)


def propagate(pulse: PulseEnvelope, ft: FieldTransfer) -> PulseEnvelope:
    """Output envelope of a linear stationary system with transfer ``ft``.

    The whole response, including every cavity round trip, comes from one
    multiplication in the frequency domain.
    """
    lo, hi = energy_bandwidth(pulse)
    g = ft.grid.points
    if lo < g[0] or hi > g[-1]:
        raise InvalidParameter(
            f"pulse bandwidth [{lo:.4g}, {hi:.4g}] Hz exceeds the transfer grid", "pulse")
    f, spec = spectrum(pulse)
    out = np.fft.fft(spec * resample_transfer(ft, f))
    return PulseEnvelope(pulse.times, out)


@dataclass(frozen=True)
class RingDown:
    """Ring-down peak train. ``found`` is False when fewer than two peaks exist."""

    peak_times: tuple[float, ...]
    peak_intensities: tuple[float, ...]
    period: float | None
    amplitude_ratio: float | None

    @property
    def found(self) -> bool:
        return self.period is not None


def ring_down_metrics(output: PulseEnvelope, min_fraction: float = 0.01,
                      min_separation: int = 10) -> RingDown:
    """Peak times, mean period and mean per-period intensity ratio of a ring-down."""
    inten = output.intensity
    if not np.any(inten > 0):
        return RingDown((), (), None, None)
    idx, _ = find_peaks(inten, height=min_fraction * inten.max(), distance=min_separation)
    times = tuple(float(output.times[i]) for i in idx)
    peaks = tuple(float(inten[i]) for i in idx)
    if len(idx) < 2:
        return RingDown(times, peaks, None, None)
    period = float(np.mean(np.diff(times)))
    ratio = float(np.exp(np.mean(np.diff(np.log(peaks)))))
    return RingDown(times, peaks, period, ratio)


def write_pulse_csv(path: str | Path, pulse: PulseEnvelope, normalize: bool = False) -> None:
    """CSV (time_s, intensity, re_field, im_field); ``normalize`` scales to unit peak intensity."""
    inten = pulse.intensity
    field = pulse.field
    if normalize and inten.max() > 0:
        k = 1.0 / math.sqrt(inten.max())
        field = field * k
        inten = np.abs(field) ** 2
    write_columns(path, ["time_s", "intensity", "re_field", "im_field"],
                  [pulse.times, inten, field.real, field.imag])
