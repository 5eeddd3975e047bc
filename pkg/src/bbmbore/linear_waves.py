"""Exact evolution of the low-frequency acoustic background and its forcings.

The background solves ``eta_t + u_x = 0, u_t + eta_x = 0``:

    2 eta_L(t, x) = eta(x-t) + eta(x+t) + u(x-t) - u(x+t)
    2 u_L(t, x)   = eta(x-t) - eta(x+t) + u(x-t) + u(x+t)

so data with ``eta = u`` moves right at unit speed.

Translations are spectral phase shifts, exact for band-limited periodic data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .littlewood_paley import chi_profile
from .spectral import Field, GridSpec, dealias_mask

__all__ = [
    "WaveBackground",
    "dalembert_evolve",
    "dalembert_rates",
    "forcing_terms",
    "embedding_constant",
    "linear_bbm_propagate",
]


@dataclass(frozen=True)
class WaveBackground:
    """Band-limited 1D data ``(eta0_low, u0_low)`` driving the background."""

    eta0_low: Field
    u0_low: Field

    def __post_init__(self):
        if self.eta0_low.grid.dim != 1 or self.u0_low.grid != self.eta0_low.grid:
            raise ConfigurationError("background needs two fields on one 1D grid")

    @property
    def grid(self) -> GridSpec:
        return self.eta0_low.grid

    def band_leak(self) -> float:
        """Largest |spectrum| outside the block j=-1 support (|k| >= 4/3)."""
        outside = chi_profile(self.grid.kabs) == 0
        return float(max(np.abs(self.eta0_low.spectrum[outside]).max(initial=0),
                         np.abs(self.u0_low.spectrum[outside]).max(initial=0)))

    def spectra(self, t: float):
        """Spectra of ``(eta_L, u_L)`` at time ``t``."""
        k = self.grid.k_axis(0).copy()
        k[self.grid.points[0] // 2] = 0.0
        c, s = np.cos(k * t), -1j * np.sin(k * t)
        e, u = self.eta0_low.spectrum, self.u0_low.spectrum
        return c * e + s * u, s * e + c * u


def dalembert_evolve(bg: WaveBackground, t: float):
    """Return ``(eta_L, u_L)`` at time ``t``."""
    se, su = bg.spectra(t)
    g = bg.grid
    return Field(g, np.fft.ifft(se).real, se), Field(g, np.fft.ifft(su).real, su)


def dalembert_rates(bg: WaveBackground, t: float):
    """Time derivatives ``(-d_x u_L, -d_x eta_L)`` at time ``t``."""
    se, su = bg.spectra(t)
    ik = 1j * bg.grid.k_axis(0)
    ik[bg.grid.points[0] // 2] = 0.0
    g = bg.grid
    return Field(g, np.fft.ifft(-ik * su).real), Field(g, np.fft.ifft(-ik * se).real)


def _forcing_arrays(se, su, grid: GridSpec, b: float, d: float):
    ik = 1j * grid.k_axis(0)
    ik[grid.points[0] // 2] = 0.0
    mask = dealias_mask(grid)
    ifft = np.fft.ifft
    eta, u = ifft(se * mask).real, ifft(su * mask).real
    deta, du = ifft(ik * se * mask).real, ifft(ik * su * mask).real
    f = np.fft.fft(-eta * du - u * deta) * mask - b * ik**3 * su
    g = np.fft.fft(-u * du) * mask - d * ik**3 * se
    return f, g


def forcing_terms(bg: WaveBackground, t: float, b: float, d: float):
    """``f_L = -eta_L u_L' - u_L eta_L' - b u_L'''`` and ``g_L = -u_L u_L' - d eta_L'''``."""
    se, su = bg.spectra(t)
    f, g = _forcing_arrays(se, su, bg.grid, b, d)
    return Field(bg.grid, np.fft.ifft(f).real, f), Field(bg.grid, np.fft.ifft(g).real, g)


def embedding_constant(low: tuple, full: tuple) -> float:
    """``C1 = |(eta_low, u_low)|_inf / |(eta0, u0)|_inf`` measured on samples."""
    top = max(f.linf() for f in low)
    bottom = max(f.linf() for f in full)
    return top / bottom if bottom > 0 else 0.0


def linear_bbm_propagate(eta: Field, u: Field, t: float, eps: float, b: float, d: float):
    """Exact evolution under ``(1 - eps b D^2) eta_t + u_x = 0``, ``(1 - eps d D^2) u_t + eta_x = 0``."""
    g = eta.grid
    k = g.k_axis(0).copy()
    k[g.points[0] // 2] = 0.0
    pb, pd = 1 + eps * b * k**2, 1 + eps * d * k**2
    omega = k / np.sqrt(pb * pd)
    ratio = np.sqrt(pd / pb)
    c, s = np.cos(omega * t), np.sin(omega * t)
    e, v = eta.spectrum, u.spectrum
    se = c * e - 1j * s * ratio * v
    sv = -1j * s * e / ratio + c * v
    return Field(g, np.fft.ifft(se).real, se), Field(g, np.fft.ifft(sv).real, sv)
