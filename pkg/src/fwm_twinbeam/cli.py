"""Command-line front end: ``fwm-twinbeam <command> --config run.cfg --out DIR``.

Every command writes plain CSV / key-value files; plotting is left to
external tools.  Exit status is 0 on success, 2 for configuration or input
errors and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import io
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import pulse as pulse_mod
from . import scan as scan_mod
from . import twin_beam
from .config import load_config
from .errors import ConfigError, DomainError, FitError, LeakageError, ScanFormatError
from .medium import TWO_PI, conjugate_frequency, group_index, load_medium

log = logging.getLogger("fwm_twinbeam")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def write_atomic(path, text):
    """Write ``text`` to ``path`` via a temporary file in the same directory and rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render(writer, obj):
    buf = io.StringIO()
    writer(obj, buf)
    return buf.getvalue()


def _medium(cfg):
    return load_medium(cfg.path("medium.file"))


def cmd_spectrum(cfg, out_dir, seed):
    grid = cfg.grid()
    freqs = grid.values()
    if np.any(freqs < 0):
        raise ConfigError("analysis frequencies must be non-negative", "grid.start_hz")
    state = twin_beam.apply_losses(twin_beam.amplify(cfg.amplifier()), cfg.losses())
    delay = cfg.get("delay.override_s")
    if delay is None:
        source = cfg.source()
        delay = twin_beam.delay_from_media(_medium(cfg), source.probe_frequency,
                                           conjugate_frequency(source))
    spectrum = twin_beam.squeezing_spectrum(state, delay, freqs)
    shot = twin_beam.NoiseSpectrum(freqs, np.zeros_like(freqs))
    write_atomic(out_dir / "spectrum.csv", _render(twin_beam.write_spectrum_csv, spectrum))
    write_atomic(out_dir / "shot_noise.csv", _render(twin_beam.write_spectrum_csv, shot))
    log.info("differential group delay %.6g s", delay)


def cmd_groupindex(cfg, out_dir, seed):
    medium = _medium(cfg)
    grid = cfg.grid()
    x = grid.values()
    absolute = grid.reference + x
    if np.any(absolute <= 0):
        raise ConfigError("grid reaches zero or negative optical frequency", "grid.start_hz")
    profile = scan_mod.GroupIndexProfile(x, group_index(medium, TWO_PI * absolute))
    write_atomic(out_dir / "groupindex.csv", _render(scan_mod.write_profile, profile))


def _carrier(cfg):
    choice = cfg.get("pulse.carrier").strip()
    if choice in ("probe", "conjugate"):
        source = cfg.source()
        return source.probe_frequency if choice == "probe" else conjugate_frequency(source)
    try:
        hz = float(choice)
    except ValueError:
        raise ConfigError("pulse.carrier must be 'probe', 'conjugate' or a frequency in Hz",
                          "pulse.carrier") from None
    if hz <= 0:
        raise ConfigError("pulse.carrier must be positive", "pulse.carrier")
    return TWO_PI * hz


def cmd_propagate(cfg, out_dir, seed):
    medium = _medium(cfg)
    carrier = _carrier(cfg)
    pulse_file = cfg.path("pulse.file", required=False)
    if pulse_file is not None:
        with open(pulse_file) as fh:
            try:
                inp = pulse_mod.read_pulse_csv(fh, carrier)
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"pulse.file: {exc}", "pulse.file") from exc
    else:
        fwhm = cfg.require("pulse.fwhm_s")
        if fwhm <= 0:
            raise ConfigError("pulse.fwhm_s must be positive", "pulse.fwhm_s")
        window = cfg.get("pulse.window_s") or pulse_mod.response_window(medium)
        inp = pulse_mod.gaussian_pulse(fwhm, carrier, center=cfg.get("pulse.center_s"),
                                       window=window)
    out = pulse_mod.propagate(inp, medium)
    report = pulse_mod.measure(inp, out)
    write_atomic(out_dir / "input_pulse.csv", _render(pulse_mod.write_pulse_csv, inp))
    write_atomic(out_dir / "output_pulse.csv", _render(pulse_mod.write_pulse_csv, out))
    write_atomic(out_dir / "report.txt", report.as_text())


def cmd_analyze(cfg, out_dir, seed, scan_path=None):
    path = Path(scan_path) if scan_path else cfg.path("scan.file")
    if not path.exists():
        raise ConfigError(f"scan file {str(path)!r} does not exist", "scan.file")
    scan = scan_mod.load_scan(path)
    length = cfg.require("scan.length_m")
    reference = cfg.require("scan.reference_hz")
    fit = scan_mod.fit_lines(scan, cfg.get("fit.n_lines"), cfg.seed_centers(),
                             length=length, reference_hz=reference)
    profile = scan_mod.profile_from_fit(fit, scan.detunings, length=length, reference_hz=reference)
    write_atomic(out_dir / "fit.txt", fit.as_text())
    write_atomic(out_dir / "profile.csv", _render(scan_mod.write_profile, profile))
    try:
        kk = scan_mod.profile_from_kk(scan, length=length, reference_hz=reference,
                                      edge_fraction=cfg.get("fit.kk_edge_fraction"))
    except LeakageError as exc:
        log.warning("skipping Kramers-Kronig profile: %s", exc)
    else:
        write_atomic(out_dir / "profile_kk.csv", _render(scan_mod.write_profile, kk))


def cmd_emit_scan(cfg, out_dir, seed):
    medium = _medium(cfg)
    grid = cfg.grid()
    if grid.scale != "linear":
        raise ConfigError("scans need a linear grid", "grid.scale")
    reference = cfg.require("emit.reference_hz")
    if reference + grid.start <= 0:
        raise ConfigError("grid reaches zero or negative optical frequency", "grid.start_hz")
    noise = cfg.get("emit.noise_fraction")
    if noise < 0:
        raise ConfigError("emit.noise_fraction must be non-negative", "emit.noise_fraction")
    scan = scan_mod.emit_scan(medium, grid.start, grid.stop, grid.points,
                              reference_hz=reference, noise_fraction=noise, seed=seed)
    write_atomic(out_dir / "scan.csv", _render(scan_mod.write_scan, scan))


COMMANDS = {
    "spectrum": cmd_spectrum,
    "groupindex": cmd_groupindex,
    "propagate": cmd_propagate,
    "analyze": cmd_analyze,
    "emit-scan": cmd_emit_scan,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="fwm-twinbeam", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="run configuration file")
        p.add_argument("--out", help="output directory (default: output.dir or .)")
        p.add_argument("--seed", type=int, default=0, help="RNG seed (unsigned 64-bit)")
        if name == "analyze":
            p.add_argument("--scan", help="scan CSV, overrides scan.file")
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer", "--seed")
        cfg = load_config(args.config)
        out_dir = Path(args.out) if args.out else (cfg.get("output.dir") or Path("."))
        if not out_dir.is_absolute() and not args.out and cfg.get("output.dir"):
            out_dir = cfg.base_dir / out_dir
        out_dir.mkdir(parents=True, exist_ok=True)
        extra = {"scan_path": args.scan} if args.command == "analyze" else {}
        COMMANDS[args.command](cfg, out_dir, args.seed, **extra)
    except (ConfigError, ScanFormatError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (FitError, LeakageError, DomainError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
