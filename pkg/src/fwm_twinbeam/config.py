"""Flat ``section.key = value`` run configuration.

Example::

    medium.file = medium.txt
    source.pump_hz = 377.1078e12
    amp.gain = 4
    loss.eta_probe = 0.45
    grid.start_hz = 1e5
    grid.stop_hz = 5e6
    grid.points = 200

Relative paths resolve against the directory of the config file.  Unknown
keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .medium import HYPERFINE_SPLITTING_HZ, SourceConfig
from .twin_beam import AmplifierParams, ChannelLosses

# key -> (type, default); None means no default
_SCHEMA = {
    "medium.file": (Path, None),
    "source.pump_hz": (float, None),
    "source.one_photon_detuning_hz": (float, 0.0),
    "source.two_photon_detuning_hz": (float, 0.0),
    "source.hyperfine_hz": (float, HYPERFINE_SPLITTING_HZ),
    "source.probe_hz": (float, None),
    "amp.gain": (float, 1.0),
    "amp.seed_flux": (float, 1e13),
    "loss.eta_probe": (float, 1.0),
    "loss.eta_conjugate": (float, 1.0),
    "delay.override_s": (float, None),
    "grid.start_hz": (float, None),
    "grid.stop_hz": (float, None),
    "grid.points": (int, None),
    "grid.scale": (str, "linear"),
    "grid.reference_hz": (float, 0.0),
    "pulse.fwhm_s": (float, None),
    "pulse.carrier": (str, "probe"),
    "pulse.center_s": (float, 0.0),
    "pulse.window_s": (float, None),
    "pulse.file": (Path, None),
    "scan.file": (Path, None),
    "scan.reference_hz": (float, None),
    "scan.length_m": (float, None),
    "fit.n_lines": (int, 1),
    "fit.seed_centers_hz": (str, None),
    "fit.kk_edge_fraction": (float, 1e-3),
    "emit.reference_hz": (float, None),
    "emit.noise_fraction": (float, 0.0),
    "output.dir": (Path, None),
}


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    points: int
    scale: str = "linear"
    reference: float = 0.0

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    values: dict
    base_dir: Path

    def get(self, key):
        if key not in _SCHEMA:
            raise KeyError(key)
        return self.values.get(key, _SCHEMA[key][1])

    def require(self, key):
        value = self.get(key)
        if value is None:
            raise ConfigError(f"missing required key {key!r}", key)
        return value

    def path(self, key, required=True):
        value = self.require(key) if required else self.get(key)
        if value is None:
            return None
        path = value if value.is_absolute() else self.base_dir / value
        if not path.exists():
            raise ConfigError(f"{key}: file {str(path)!r} does not exist", key)
        return path

    def source(self):
        try:
            return SourceConfig.from_hz(
                self.require("source.pump_hz"),
                self.get("source.one_photon_detuning_hz"),
                self.get("source.two_photon_detuning_hz"),
                self.get("source.hyperfine_hz"),
                self.get("source.probe_hz"),
            )
        except DomainError as exc:
            raise ConfigError(f"source: {exc}", "source.pump_hz") from exc

    def amplifier(self):
        try:
            return AmplifierParams(self.get("amp.gain"), self.get("amp.seed_flux"))
        except DomainError as exc:
            raise ConfigError(f"amp: {exc}", "amp.gain") from exc

    def losses(self):
        try:
            return ChannelLosses(self.get("loss.eta_probe"), self.get("loss.eta_conjugate"))
        except DomainError as exc:
            raise ConfigError(f"loss: {exc}", "loss.eta_probe") from exc

    def grid(self):
        spec = GridSpec(self.require("grid.start_hz"), self.require("grid.stop_hz"),
                        self.require("grid.points"), self.get("grid.scale"),
                        self.get("grid.reference_hz"))
        if spec.points < 2:
            raise ConfigError("grid.points must be at least 2", "grid.points")
        if not spec.start < spec.stop:
            raise ConfigError("grid.start_hz must be below grid.stop_hz", "grid.start_hz")
        if spec.scale not in ("linear", "log"):
            raise ConfigError("grid.scale must be 'linear' or 'log'", "grid.scale")
        if spec.scale == "log" and spec.start <= 0:
            raise ConfigError("a log grid needs grid.start_hz > 0", "grid.start_hz")
        return spec

    def seed_centers(self):
        raw = self.require("fit.seed_centers_hz")
        try:
            return [float(v) for v in raw.split(",")]
        except ValueError:
            raise ConfigError("fit.seed_centers_hz must be comma-separated numbers",
                              "fit.seed_centers_hz") from None


def _convert(key, kind, raw):
    try:
        if kind is int:
            value = int(raw)
        elif kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
        elif kind is Path:
            value = Path(raw)
        else:
            value = raw
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.__name__}", key) from None
    return value


def parse_config(text, base_dir=Path("."), source="<config>"):
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'section.key = value'")
        key, value = (s.strip() for s in body.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}", key)
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}", key)
        values[key] = _convert(key, _SCHEMA[key][0], value)
    return RunConfig(values, Path(base_dir))


def load_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {str(path)!r} does not exist", "--config")
    return parse_config(path.read_text(), path.parent, str(path))
