"""Dispersive gain/absorption media built from Lorentzian lines.

Each line contributes

    n(w) - n0 = (c * alpha0 / (2 w)) * gamma / (w - w0 + i gamma)

to the complex refractive index.  Fields propagate as exp(i (n w z / c - w t)),
so Im n < 0 means gain: a line with ``alpha0 > 0`` amplifies and one with
``alpha0 < 0`` absorbs.  At line center the single-pass power transmission of
an isolated line is exactly ``exp(alpha0 * length)``.

All frequencies are angular (rad/s) inside this module.  The text formats and
the command line use ordinary frequency in Hz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError

C = 299_792_458.0  # m/s
TWO_PI = 2.0 * math.pi

#: 85Rb ground-state hyperfine splitting, Hz.
HYPERFINE_SPLITTING_HZ = 3.035e9
#: 85Rb D1 line (5S1/2 F=2 -> 5P1/2), Hz.
RB85_D1_HZ = 377.107e12


@dataclass(frozen=True)
class SpectralLine:
    """One Lorentzian resonance.

    Attributes:
        alpha0: signed strength in 1/m; positive is gain, negative absorption.
        omega0: resonance angular frequency, rad/s.
        gamma: half width at half maximum, rad/s.
    """

    alpha0: float
    omega0: float
    gamma: float

    def __post_init__(self):
        for name in ("alpha0", "omega0", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not math.isfinite(self.alpha0):
            raise DomainError(f"alpha0 must be finite, got {self.alpha0}")
        if not (self.omega0 > 0 and math.isfinite(self.omega0)):
            raise DomainError(f"omega0 must be positive, got {self.omega0}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be positive, got {self.gamma}")

    @classmethod
    def from_hz(cls, alpha0, center_hz, hwhm_hz):
        return cls(float(alpha0), TWO_PI * center_hz, TWO_PI * hwhm_hz)

    @property
    def is_gain(self):
        return self.alpha0 > 0

    @property
    def peak_group_excursion(self):
        """Group-index change at line center, c * alpha0 / (2 gamma)."""
        return C * self.alpha0 / (2.0 * self.gamma)


@dataclass(frozen=True)
class MediumModel:
    n0: float = 1.0
    length: float = 0.017
    lines: tuple[SpectralLine, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "lines", tuple(self.lines))
        if not self.n0 >= 1.0 - 1e-6:
            raise DomainError(f"n0 must be close to or above unity, got {self.n0}")
        if not (self.length > 0 and math.isfinite(self.length)):
            raise DomainError(f"length must be positive, got {self.length}")

    def with_lines(self, lines):
        return MediumModel(self.n0, self.length, tuple(lines))


@dataclass(frozen=True)
class SourceConfig:
    """Pump/probe frequencies of the double-lambda source, all in rad/s.

    The two detunings are carried for bookkeeping; the probe frequency is
    the authoritative value.
    """

    pump_frequency: float
    one_photon_detuning: float
    two_photon_detuning: float
    probe_frequency: float

    def __post_init__(self):
        if not self.pump_frequency > 0:
            raise DomainError("pump_frequency must be positive")
        if not self.probe_frequency > 0:
            raise DomainError("probe_frequency must be positive")

    @classmethod
    def from_hz(cls, pump_hz, one_photon_detuning_hz=0.0, two_photon_detuning_hz=0.0,
                hyperfine_hz=HYPERFINE_SPLITTING_HZ, probe_hz=None):
        """Build from Hz values. The probe sits one hyperfine splitting plus
        the two-photon detuning above the pump unless given explicitly."""
        if probe_hz is None:
            probe_hz = pump_hz + hyperfine_hz + two_photon_detuning_hz
        return cls(TWO_PI * pump_hz, TWO_PI * one_photon_detuning_hz,
                   TWO_PI * two_photon_detuning_hz, TWO_PI * probe_hz)

    @property
    def conjugate_frequency(self):
        return conjugate_frequency(self)


@dataclass(frozen=True)
class ComplexIndexSample:
    omega: float
    n_real: float
    n_imag: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.omega, self.n_real, self.n_imag)):
            raise DomainError("index sample components must be finite")


def _check_omega(omega):
    w = np.asarray(omega, dtype=float)
    if not np.all(w > 0):
        raise DomainError("angular frequency must be positive")
    return w


def _scalar_or_array(x, like):
    return x.item() if np.ndim(like) == 0 else x


def index_shift(medium, omega):
    """Line contribution n(w) - n0.

    Computed without adding ``n0`` so that the ~1e-7 dispersive part keeps
    full relative precision; use this instead of ``complex_index(...) - n0``
    when differencing.
    """
    w = _check_omega(omega)
    total = np.zeros(w.shape, dtype=complex)
    for line in medium.lines:
        total += (C * line.alpha0 / (2.0 * w)) * line.gamma / (w - line.omega0 + 1j * line.gamma)
    return _scalar_or_array(total, omega)


def complex_index(medium, omega):
    """Complex refractive index n(w) of ``medium``; accepts scalars or arrays."""
    return medium.n0 + index_shift(medium, omega)


def group_index(medium, omega):
    """Group index c/v_g = n0 + w dRe(n)/dw from the closed-form derivative.

    The 1/w prefactor of each line is differentiated exactly.
    """
    w = _check_omega(omega)
    total = np.full(w.shape, float(medium.n0))
    for line in medium.lines:
        amp = 0.5 * C * line.alpha0
        d = w - line.omega0
        g2 = line.gamma * line.gamma
        denom = d * d + g2
        disp = line.gamma * d / denom
        ddisp = line.gamma * (g2 - d * d) / (denom * denom)
        total += amp * (ddisp - disp / w)
    return _scalar_or_array(total, omega)


def intensity_transmission(medium, omega):
    """Single-pass power transmission exp(-2 Im(n) w L / c); above 1 means gain."""
    w = _check_omega(omega)
    im = np.imag(np.asarray(index_shift(medium, w)))
    return _scalar_or_array(np.exp(-2.0 * im * w * medium.length / C), omega)


def index_samples(medium, omegas):
    n = np.atleast_1d(complex_index(medium, np.atleast_1d(omegas)))
    return [ComplexIndexSample(float(w), float(v.real), float(v.imag))
            for w, v in zip(np.atleast_1d(omegas), n)]


def conjugate_frequency(config):
    """Frequency of the generated conjugate photon, 2 w_pump - w_probe."""
    return 2.0 * config.pump_frequency - config.probe_frequency


def rb85_preset(length=0.017, transition_hz=RB85_D1_HZ, one_photon_detuning_hz=800e6,
                two_photon_detuning_hz=0.0, hyperfine_hz=HYPERFINE_SPLITTING_HZ,
                absorption_alpha0=-100.0, absorption_hwhm_hz=300e6,
                probe_gain=4.0, conjugate_gain=2.0, gain_hwhm_hz=10e6, n0=1.0):
    """Illustrative double-lambda medium and the matching source setup.

    Two absorption lines sit at the D1 transition and one hyperfine splitting
    below it.  Gain lines are placed on the probe and on the conjugate; their
    strengths are solved so that the *net* power transmission at each center,
    absorption wings included, equals ``probe_gain`` and ``conjugate_gain``.

    Returns:
        (MediumModel, SourceConfig)
    """
    pump_hz = transition_hz + one_photon_detuning_hz
    source = SourceConfig.from_hz(pump_hz, one_photon_detuning_hz,
                                  two_photon_detuning_hz, hyperfine_hz)
    absorbers = [
        SpectralLine.from_hz(absorption_alpha0, transition_hz, absorption_hwhm_hz),
        SpectralLine.from_hz(absorption_alpha0, transition_hz - hyperfine_hz, absorption_hwhm_hz),
    ]
    background = MediumModel(n0, length, absorbers)
    centers = np.array([source.probe_frequency, conjugate_frequency(source)])
    gamma = TWO_PI * gain_hwhm_hz
    # ln T is linear in the strengths: ln T(w) = sum_i alpha_i L gamma_i^2 / (d_i^2 + gamma_i^2)
    shape = np.array([[gamma**2 / ((wi - wj) ** 2 + gamma**2) for wj in centers] for wi in centers])
    needed = np.log([probe_gain, conjugate_gain]) - np.log(intensity_transmission(background, centers))
    alphas = np.linalg.solve(shape * length, needed)
    gain_lines = [SpectralLine(float(a), float(w), gamma) for a, w in zip(alphas, centers)]
    return background.with_lines(absorbers + gain_lines), source


# -- medium definition files ------------------------------------------------

def parse_medium(text, source="<string>"):
    """Parse the ``key = value`` medium format.

    Keys: ``n0``, ``length_m`` and any number of
    ``line = alpha0_per_m, center_hz, hwhm_hz``.  ``#`` starts a comment.
    """
    n0 = 1.0
    length = None
    lines = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        try:
            if key == "line":
                parts = [float(p) for p in value.split(",")]
                if len(parts) != 3:
                    raise ValueError("line needs alpha0_per_m, center_hz, hwhm_hz")
                lines.append(SpectralLine.from_hz(*parts))
                continue
            if key in seen:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}", key)
            seen.add(key)
            if key == "n0":
                n0 = float(value)
            elif key == "length_m":
                length = float(value)
            else:
                raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key)
        except (ValueError, DomainError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}", key) from exc
    if length is None:
        raise ConfigError(f"{source}: missing required key 'length_m'", "length_m")
    try:
        return MediumModel(n0, length, lines)
    except DomainError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_medium(path):
    path = Path(path)
    return parse_medium(path.read_text(), str(path))


def format_medium(medium):
    out = [f"n0 = {medium.n0!r}", f"length_m = {medium.length!r}"]
    for line in medium.lines:
        out.append(f"line = {line.alpha0!r}, {line.omega0 / TWO_PI!r}, {line.gamma / TWO_PI!r}")
    return "\n".join(out) + "\n"
