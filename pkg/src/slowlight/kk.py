"""Refractive-index dispersion from absorption via Kramers-Kronig.

In the narrowband limit (features of at most tens of GHz around an optical
carrier near 495 THz) the real index deviation follows from a single-pole
Hilbert transform of the intensity absorption coefficient::

    dn(nu) = c / (4 pi^2 nu0) * PV integral alpha(nu') / (nu' - nu) dnu'

With this sign a transparency window inside an absorbing background gives
d(dn)/dnu > 0, i.e. normal dispersion and slow light.

Two routes are provided. :func:`kk_analytic` integrates a piecewise-linear
profile exactly, segment by segment, and also returns the exact derivative.
:func:`kk_numeric` works on sampled absorption through an FFT convolution and
is used to validate the analytic route and for measured profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.constants import c as C_LIGHT

from slowlight.errors import InvalidParameter
from slowlight.io import write_columns
from slowlight.profile import AbsorptionProfile, FrequencyGrid

#: Real index of Y2SiO5 away from the Pr line.
DEFAULT_BACKGROUND_INDEX = 1.8

_CHUNK = 1 << 18


def kk_scale(carrier: float) -> float:
    """Prefactor c / (4 pi^2 nu0) converting the PV integral (Hz/m) into dn."""
    return C_LIGHT / (4.0 * math.pi**2 * carrier)


@dataclass(frozen=True, eq=False)
class DispersionProfile:
    grid: FrequencyGrid
    delta_n: np.ndarray
    group_index: np.ndarray
    background_index: float = DEFAULT_BACKGROUND_INDEX

    @property
    def index(self) -> np.ndarray:
        """Total real phase index n(nu) = background + dn."""
        return self.background_index + self.delta_n

    def index_at(self, detuning) -> np.ndarray:
        return self.background_index + np.interp(detuning, self.grid.points, self.delta_n)

    def group_index_at(self, detuning) -> np.ndarray:
        return np.interp(detuning, self.grid.points, self.group_index)


def pv_integral(profile: AbsorptionProfile, detunings, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form PV integral of a piecewise-linear profile and its derivative.

    For a linear piece ``a + s*(nu' - nu)`` on ``[x0, x1]`` the integral is
    ``(a) * ln|(x1 - nu)/(x0 - nu)| + s*(x1 - x0)``. Regrouping the logarithms
    by breakpoint, each node ``x_j`` contributes ``c_j(nu) * ln|x_j - nu|``
    where ``c_j`` is the difference between the left and right linear pieces
    extended to ``nu``. For a continuous profile ``c_j(x_j) = 0`` so the
    integrand singularity cancels exactly.

    Unequal constant tails make the integral diverge logarithmically; the
    divergent part is cut off symmetrically at ``cutoff`` Hz, which only
    shifts dn by a constant.

    At a node the finite part is returned (the log term is dropped), which
    is the limit value for continuous profiles.

    Returns
    -------
    value, derivative : ndarray
        PV integral (Hz/m, i.e. 1/m times a log) and its derivative with
        respect to detuning.
    """
    nu = np.asarray(detunings, dtype=float)
    x, vl, vr, sl, sr = profile.nodes()

    const = float(np.sum(vl[1:] - vr[:-1]))
    a0, a1 = profile.edge_values
    const += (a1 - a0) * math.log(cutoff)

    dv = vl - vr
    ds = sl - sr
    active = (dv != 0) | (ds != 0)
    x, dv, ds = x[active], dv[active], ds[active]

    value = np.full(nu.shape, const)
    deriv = np.zeros(nu.shape)
    flat_nu = nu.reshape(-1)
    flat_val = value.reshape(-1)
    flat_der = deriv.reshape(-1)
    for start in range(0, flat_nu.size, _CHUNK):
        v = flat_nu[start:start + _CHUNK]
        acc = np.zeros(v.size)
        dacc = np.zeros(v.size)
        for xj, dvj, dsj in zip(x, dv, ds):
            d = v - xj
            on = d == 0
            with np.errstate(divide="ignore"):
                log_d = np.log(np.abs(d))
            log_d[on] = 0.0
            cj = dvj + dsj * d
            acc += cj * log_d
            if dsj:
                dacc += dsj * log_d
            if dvj:
                with np.errstate(divide="ignore"):
                    jump = np.where(on, 0.0, dvj / np.where(on, 1.0, d))
                dacc += jump
        flat_val[start:start + _CHUNK] += acc
        flat_der[start:start + _CHUNK] = dacc
    return value, deriv


def kk_analytic(profile: AbsorptionProfile, grid: FrequencyGrid,
                background_index: float = DEFAULT_BACKGROUND_INDEX) -> DispersionProfile:
    """Exact dispersion of a piecewise-linear absorption profile on ``grid``.

    The group index uses the exact derivative, n_g = n + nu * dn/dnu with
    ``nu`` the absolute optical frequency.
    """
    scale = kk_scale(grid.carrier)
    value, deriv = pv_integral(profile, grid.points, cutoff=grid.carrier)
    delta_n = scale * value
    ng = background_index + delta_n + grid.frequencies * scale * deriv
    return DispersionProfile(grid, delta_n, ng, background_index)


def hilbert_pv(samples: np.ndarray, pad_factor: int = 4) -> np.ndarray:
    """PV integral f(nu')/(nu' - nu) of uniformly sampled data via FFT.

    Samples are treated as the nodes of a piecewise-linear interpolant and
    convolved with the exact PV kernel of a hat function. The linear
    convolution is evaluated with zero padding to ``pad_factor`` times the
    input length, and the padding is filled with half-cosine tapers of the
    edge values so the data meet zero smoothly.
    """
    f = np.asarray(samples, dtype=float)
    n = f.size
    if pad_factor < 4:
        raise InvalidParameter("pad_factor must be at least 4", "pad_factor")
    total = pad_factor * n
    extra = total - n
    left = extra // 2
    right = extra - left

    padded = np.zeros(total)
    padded[left:left + n] = f
    if left:
        ramp = 0.5 * (1 - np.cos(np.pi * np.arange(1, left + 1) / (left + 1)))
        padded[:left] = f[0] * ramp
    if right:
        ramp = 0.5 * (1 + np.cos(np.pi * np.arange(1, right + 1) / (right + 1)))
        padded[left + n:] = f[-1] * ramp

    # out[i] = sum_j f[j] K(i - j); the PV integral is invariant to the step size
    m = np.fft.fftfreq(2 * total, d=1.0 / (2 * total))
    kern = _hat_kernel(m)
    spec = np.fft.rfft(padded, 2 * total) * np.fft.rfft(kern)
    conv = np.fft.irfft(spec, 2 * total)
    return conv[left:left + n]


def _hat_kernel(k: np.ndarray) -> np.ndarray:
    """PV integral of the unit hat centred at 0 against 1/(u - k), u in steps.

    Equals (k+1) ln|k+1| - 2k ln|k| + (k-1) ln|k-1| with 0 ln 0 = 0, up to
    an overall sign so that the result is PV int hat(u)/(u - k) du.
    """
    def xlogx(v):
        av = np.abs(v)
        out = np.zeros_like(av)
        nz = av > 0
        out[nz] = v[nz] * np.log(av[nz])
        return out

    # int hat(u)/(u-k) du = -[(k+1)ln|k+1| - 2k ln|k| + (k-1)ln|k-1|]
    return -(xlogx(k + 1) - 2 * xlogx(k) + xlogx(k - 1))


def kk_numeric(alpha_samples, grid: FrequencyGrid,
               background_index: float = DEFAULT_BACKGROUND_INDEX,
               pad_factor: int = 4) -> DispersionProfile:
    """Dispersion from sampled absorption on a uniform grid.

    The mean of the two edge values is subtracted before transforming; a
    constant has no PV integral, so this only removes the part that would
    otherwise wrap around.
    """
    alpha = np.asarray(alpha_samples, dtype=float)
    if not isinstance(grid, FrequencyGrid):
        raise InvalidParameter("kk_numeric needs a uniform FrequencyGrid", "grid")
    if alpha.shape != grid.points.shape:
        raise InvalidParameter("alpha samples do not match the grid", "alpha")
    edge = 0.5 * (alpha[0] + alpha[-1])
    pv = hilbert_pv(alpha - edge, pad_factor)
    delta_n = kk_scale(grid.carrier) * pv
    disp = DispersionProfile(grid, delta_n, np.zeros_like(delta_n), background_index)
    return DispersionProfile(grid, delta_n, group_index(disp), background_index)


def group_index(disp: DispersionProfile) -> np.ndarray:
    """n_g = n + nu dn/dnu with central differences (second-order one-sided at edges)."""
    if disp.grid.count < 3:
        raise InvalidParameter("group index needs at least 3 grid points", "grid.count")
    slope = np.gradient(disp.delta_n, disp.grid.step, edge_order=2)
    return disp.background_index + disp.delta_n + disp.grid.frequencies * slope


def write_dispersion_csv(path: str | Path, disp: DispersionProfile) -> None:
    write_columns(path, ["detuning_Hz", "delta_n", "group_index"],
                  [disp.grid.points, disp.delta_n, disp.group_index])
