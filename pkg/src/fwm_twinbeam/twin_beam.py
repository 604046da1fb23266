"""Linearized photon-number model of the seeded four-wave-mixing amplifier.

Fluctuations are in shot units: a coherent beam of mean flux N has a
number-fluctuation spectral density N.  The model keeps the terms linear in
the seed flux, i.e. it drops spontaneous (vacuum-seeded) emission, which is
negligible for bright beams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .errors import DomainError
from .medium import C, group_index


@dataclass(frozen=True)
class AmplifierParams:
    gain: float
    seed_flux: float = 1.0

    def __post_init__(self):
        if not self.gain >= 1.0:
            raise DomainError(f"power gain must be >= 1, got {self.gain}")
        if not self.seed_flux > 0:
            raise DomainError(f"seed flux must be positive, got {self.seed_flux}")


@dataclass(frozen=True)
class ChannelLosses:
    """Power transmittance of each arm, detector efficiency included."""

    eta_probe: float = 1.0
    eta_conjugate: float = 1.0

    def __post_init__(self):
        for name in ("eta_probe", "eta_conjugate"):
            eta = getattr(self, name)
            if not 0.0 < eta <= 1.0:
                raise DomainError(f"{name} must lie in (0, 1], got {eta}")


@dataclass(frozen=True)
class TwinBeamState:
    mean_probe: float
    mean_conjugate: float
    var_probe: float
    var_conjugate: float
    covar: float

    def __post_init__(self):
        if self.mean_probe < 0 or self.mean_conjugate < 0:
            raise DomainError("mean fluxes must be non-negative")
        if self.var_probe < 0 or self.var_conjugate < 0:
            raise DomainError("variances must be non-negative")
        bound = self.var_probe * self.var_conjugate
        if self.covar**2 > bound * (1 + 1e-12) + 1e-300:
            raise DomainError("covariance violates the Cauchy-Schwarz bound")

    @property
    def total_flux(self):
        return self.mean_probe + self.mean_conjugate

    @property
    def difference_variance(self):
        return self.var_probe + self.var_conjugate - 2.0 * self.covar

    def normalized_difference_noise(self):
        """Difference noise relative to the shot noise of the total flux."""
        if not self.total_flux > 0:
            raise DomainError("total flux must be positive")
        return self.difference_variance / self.total_flux


@dataclass(frozen=True)
class NoiseSpectrum:
    frequencies: np.ndarray
    noise_db: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        db = np.asarray(self.noise_db, dtype=float)
        if f.shape != db.shape or f.ndim != 1:
            raise ValueError("frequencies and noise_db must be 1-D and equal length")
        if f.size > 1 and not np.all(np.diff(f) > 0):
            raise ValueError("frequencies must be strictly increasing")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "noise_db", db)


def amplify(params):
    """Output moments of the amplifier for a coherent seed and vacuum conjugate input."""
    g, n = params.gain, params.seed_flux
    return TwinBeamState(
        mean_probe=g * n,
        mean_conjugate=(g - 1.0) * n,
        var_probe=g * (2.0 * g - 1.0) * n,
        var_conjugate=(g - 1.0) * (2.0 * g - 1.0) * n,
        covar=2.0 * g * (g - 1.0) * n,
    )


def apply_losses(state, losses):
    """Beam-splitter loss on each arm (vacuum enters the open port)."""
    ep, ec = losses.eta_probe, losses.eta_conjugate
    return TwinBeamState(
        mean_probe=ep * state.mean_probe,
        mean_conjugate=ec * state.mean_conjugate,
        var_probe=ep * ep * (state.var_probe - state.mean_probe) + ep * state.mean_probe,
        var_conjugate=ec * ec * (state.var_conjugate - state.mean_conjugate) + ec * state.mean_conjugate,
        covar=ep * ec * state.covar,
    )


def difference_noise_db(state):
    """Intensity-difference noise in dB relative to the standard quantum limit."""
    return 10.0 * math.log10(state.normalized_difference_noise())


def squeezing_spectrum(state, delay_s, freqs):
    """Difference-noise spectrum when the arms are offset by ``delay_s``.

    A relative delay tau leaves the single-beam spectra untouched and
    multiplies the cross-spectrum by cos(2 pi f tau).
    """
    f = np.asarray(freqs, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise ValueError("freqs must be a non-empty 1-D sequence")
    if np.any(f < 0):
        raise ValueError("analysis frequencies must be non-negative")
    if f.size > 1 and not np.all(np.diff(f) > 0):
        raise ValueError("analysis frequencies must be strictly increasing")
    if not state.total_flux > 0:
        raise DomainError("total flux must be positive")
    corr = np.cos(2.0 * np.pi * f * delay_s)
    noise = (state.var_probe + state.var_conjugate - 2.0 * state.covar * corr) / state.total_flux
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(noise)
    return NoiseSpectrum(f, db)


def delay_from_media(medium, probe_omega, conj_omega):
    """Differential group delay (probe minus conjugate) through ``medium``, s."""
    ng_p = group_index(medium, probe_omega)
    ng_c = group_index(medium, conj_omega)
    return medium.length / C * (ng_p - ng_c)


def efficiency_for_target(gain, target_db, eta_lo=1e-9, eta_hi=1.0):
    """Symmetric transmittance giving ``target_db`` difference noise at ``gain``.

    Bisection over eta; raises DomainError if the target is not bracketed.
    """
    state = amplify(AmplifierParams(gain))

    def excess(eta):
        return difference_noise_db(apply_losses(state, ChannelLosses(eta, eta))) - target_db

    lo, hi = excess(eta_lo), excess(eta_hi)
    if lo * hi > 0:
        raise DomainError(f"{target_db} dB is not reachable at gain {gain}")
    return bisect(excess, eta_lo, eta_hi, xtol=1e-14, rtol=1e-14, maxiter=200)


def write_spectrum_csv(spectrum, stream):
    stream.write("frequency_hz,noise_db\n")
    for f, db in zip(spectrum.frequencies, spectrum.noise_db):
        stream.write(f"{float(f)!r},{float(db)!r}\n")


def read_spectrum_csv(stream):
    header = stream.readline().strip()
    if header != "frequency_hz,noise_db":
        raise ValueError(f"unexpected header {header!r}")
    rows = [line.split(",") for line in stream if line.strip()]
    f = [float(r[0]) for r in rows]
    db = [float(r[1]) for r in rows]
    return NoiseSpectrum(np.array(f), np.array(db))
