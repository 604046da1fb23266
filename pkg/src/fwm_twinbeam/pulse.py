"""Envelope propagation of optical pulses through a dispersive medium.

The slowly varying envelope A(t) of E(t) = A(t) exp(-i w_c t) is propagated
in the frequency domain.  Each baseband component at offset W from the carrier
picks up exp(i (n(w_c + W) - n0) (w_c + W) L / c); the n0 part is dropped so
that reported delays are relative to transit at the background index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LeakageError
from .medium import C, index_shift

LEAKAGE_THRESHOLD = 1e-6
_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class Pulse:
    """Uniformly sampled complex envelope.

    Attributes:
        carrier: carrier angular frequency, rad/s.
        t0: time of the first sample, s.
        dt: sample interval, s.
        samples: complex envelope values.
    """

    carrier: float
    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size < 16:
            raise DomainError("a pulse needs at least 16 samples")
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        energy = float(np.sum(np.abs(s) ** 2) * self.dt)
        if not (math.isfinite(energy) and energy > 0):
            raise DomainError("pulse energy must be finite and positive")
        object.__setattr__(self, "samples", s)

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def intensity(self):
        return np.abs(self.samples) ** 2

    @property
    def energy(self):
        return float(np.sum(self.intensity) * self.dt)

    def scaled(self, factor):
        return Pulse(self.carrier, self.t0, self.dt, factor * self.samples)


@dataclass(frozen=True)
class PropagationReport:
    peak_delay_s: float
    centroid_delay_s: float
    energy_gain: float
    fractional_delay: float

    def __post_init__(self):
        if not self.energy_gain > 0:
            raise DomainError("energy gain must be positive")

    def as_text(self):
        return "".join(f"{k}={float(getattr(self, k))!r}\n" for k in
                       ("peak_delay_s", "centroid_delay_s", "energy_gain", "fractional_delay"))


def gaussian_pulse(fwhm, carrier, *, center=0.0, dt=None, n_samples=None, window=None, energy=1.0):
    """Gaussian pulse with intensity FWHM ``fwhm`` on a power-of-two grid.

    By default the sample interval is fwhm/16 and the window spans at least
    24 FWHM (or ``window`` seconds if larger), centered on ``center``.
    """
    if not fwhm > 0:
        raise DomainError("fwhm must be positive")
    dt = fwhm / 16.0 if dt is None else dt
    if n_samples is None:
        span = max(24.0 * fwhm, window or 0.0)
        n_samples = max(16, 1 << math.ceil(math.log2(span / dt)))
    t = center + dt * (np.arange(n_samples) - n_samples // 2)
    sigma_i = fwhm / _FWHM_PER_SIGMA  # intensity standard deviation
    field = np.exp(-((t - center) ** 2) / (4.0 * sigma_i**2)).astype(complex)
    field *= math.sqrt(energy / (np.sum(np.abs(field) ** 2) * dt))
    return Pulse(carrier, float(t[0]), dt, field)


def transfer_function(medium, omega):
    """Field transfer exp(i n(w) w L / c) including the vacuum phase."""
    w = np.asarray(omega, dtype=float)
    n = medium.n0 + np.asarray(index_shift(medium, w))
    h = np.exp(1j * n * w * medium.length / C)
    return h.item() if np.ndim(omega) == 0 else h


def envelope_transfer(medium, omega):
    """Transfer function with the background phase n0 w L / c removed."""
    w = np.asarray(omega, dtype=float)
    h = np.exp(1j * np.asarray(index_shift(medium, w)) * w * medium.length / C)
    return h.item() if np.ndim(omega) == 0 else h


def _edge_peak_ratio(values, edge):
    mag = np.abs(values)
    peak = mag.max()
    return max(mag[:edge].max(), mag[-edge:].max()) / peak


def _check_time_edges(samples, what, threshold):
    ratio = _edge_peak_ratio(samples, 2)
    if ratio >= threshold:
        raise LeakageError(f"{what} envelope at the time-grid edge is {ratio:.2e} of peak "
                           f"(limit {threshold:.0e}); widen the window")


def propagate(pulse, medium, *, threshold=LEAKAGE_THRESHOLD):
    """Propagate ``pulse`` through ``medium``.

    The sample count must be a power of two.  Raises LeakageError if the
    input spectrum or either envelope is not negligible at the grid edges,
    since the circular transform would otherwise wrap energy around.
    """
    n = pulse.samples.size
    if n & (n - 1):
        raise DomainError(f"sample count must be a power of two, got {n}")
    _check_time_edges(pulse.samples, "input", threshold)
    spectrum = np.fft.fft(pulse.samples)
    shifted = np.fft.fftshift(spectrum)
    ratio = _edge_peak_ratio(shifted, 2)
    if ratio >= threshold:
        raise LeakageError(f"input spectrum at the band edge is {ratio:.2e} of peak "
                           f"(limit {threshold:.0e}); reduce dt")
    # numpy's transform pairs exp(+i nu t); the physical offset from the carrier is -nu
    offset = -2.0 * np.pi * np.fft.fftfreq(n, pulse.dt)
    omega = pulse.carrier + offset
    if not np.all(omega > 0):
        raise DomainError("baseband grid reaches non-positive optical frequency")
    out = np.fft.ifft(spectrum * envelope_transfer(medium, omega))
    _check_time_edges(out, "output", threshold)
    return Pulse(pulse.carrier, pulse.t0, pulse.dt, out)


def _peak_time(pulse):
    i = pulse.intensity
    k = int(np.argmax(i))
    shift = 0.0
    if 0 < k < i.size - 1:
        a, b, c = i[k - 1], i[k], i[k + 1]
        curv = a - 2.0 * b + c
        if curv != 0:
            shift = 0.5 * (a - c) / curv
    return pulse.t0 + (k + shift) * pulse.dt


def _centroid(pulse):
    i = pulse.intensity
    return float(np.sum(pulse.times * i) / np.sum(i))


def intensity_fwhm(pulse):
    """Full width at half maximum of |A|^2 with linear interpolation."""
    i = pulse.intensity
    half = i.max() / 2.0
    above = np.nonzero(i >= half)[0]
    lo, hi = above[0], above[-1]

    def cross(j0, j1):
        # fractional index where intensity passes half between samples j0, j1
        return j0 + (half - i[j0]) / (i[j1] - i[j0]) * (j1 - j0)

    left = cross(lo - 1, lo) if lo > 0 else float(lo)
    right = cross(hi, hi + 1) if hi < i.size - 1 else float(hi)
    return (right - left) * pulse.dt


def measure(inp, out):
    """Delay, energy gain and fractional delay of ``out`` relative to ``inp``."""
    if inp.samples.size != out.samples.size or not math.isclose(inp.dt, out.dt, rel_tol=1e-12):
        raise DomainError("pulses must share sample count and dt")
    if not inp.energy > 0:
        raise DomainError("input pulse has zero energy")
    centroid_delay = _centroid(out) - _centroid(inp)
    return PropagationReport(
        peak_delay_s=_peak_time(out) - _peak_time(inp),
        centroid_delay_s=centroid_delay,
        energy_gain=out.energy / inp.energy,
        fractional_delay=centroid_delay / intensity_fwhm(inp),
    )


def response_window(medium):
    """Time window long enough for the slowest line response to die out."""
    if not medium.lines:
        return 0.0
    return 100.0 / min(line.gamma for line in medium.lines)


def scan_pulse_widths(medium, carrier, widths):
    """Fractional delay of unit-energy Gaussian pulses for each FWHM in ``widths``.

    Negative values are advancements.  Returns a list of (width, fractional_delay).
    """
    widths = [float(w) for w in widths]
    if not widths or any(w <= 0 for w in widths):
        raise DomainError("widths must be positive")
    if any(b <= a for a, b in zip(widths, widths[1:])):
        raise DomainError("widths must be strictly ascending")
    window = response_window(medium)
    results = []
    for w in widths:
        inp = gaussian_pulse(w, carrier, window=window)
        out = propagate(inp, medium)
        results.append((w, measure(inp, out).fractional_delay))
    return results


def write_pulse_csv(pulse, stream):
    stream.write("time_s,re,im\n")
    for t, s in zip(pulse.times, pulse.samples):
        stream.write(f"{float(t)!r},{float(s.real)!r},{float(s.imag)!r}\n")


def read_pulse_csv(stream, carrier):
    header = stream.readline().strip()
    if header != "time_s,re,im":
        raise ValueError(f"unexpected pulse header {header!r}")
    rows = [line.split(",") for line in stream if line.strip()]
    t = np.array([float(r[0]) for r in rows])
    s = np.array([complex(float(r[1]), float(r[2])) for r in rows])
    if t.size < 2:
        raise DomainError("a pulse needs at least 16 samples")
    steps = np.diff(t)
    dt = float(np.mean(steps))
    if not np.allclose(steps, dt, rtol=1e-6, atol=0):
        raise DomainError("pulse samples must be uniformly spaced")
    return Pulse(carrier, float(t[0]), dt, s)
