"""Transmission scans: ingestion, line fitting, Kramers-Kronig and group-index profiles.

A scan is the intensity transmission of the probe versus its detuning from
a reference frequency.  Transmission must already be normalized to the
off-resonant level; absolute amplitude calibration is not attempted.

Two routes lead from a scan to a group-index profile and both are provided
on purpose:

* parametric: fit Lorentzian lines to ln T, rebuild Re n from the fit;
* model-free: turn ln T into Im n, take the Kramers-Kronig transform.

Comparing the two is the recommended sanity check on measured data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, LeakageError, ScanFormatError
from .medium import C, TWO_PI, MediumModel, SpectralLine, index_shift, intensity_transmission

MIN_SCAN_POINTS = 64
UNIFORM_TOLERANCE = 1e-3


def _check_uniform(x, what):
    steps = np.diff(x)
    if not np.all(steps > 0):
        raise DomainError(f"{what} must be strictly increasing")
    mean = (x[-1] - x[0]) / (x.size - 1)
    if np.max(np.abs(steps - mean)) > UNIFORM_TOLERANCE * mean:
        raise DomainError(f"{what} must be uniformly spaced within 0.1%")
    return mean


@dataclass(frozen=True)
class ScanData:
    """Measured transmission versus probe detuning (Hz, relative to a reference)."""

    detunings: np.ndarray
    transmission: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.detunings, dtype=float)
        t = np.asarray(self.transmission, dtype=float)
        if x.ndim != 1 or x.shape != t.shape:
            raise DomainError("detunings and transmission must be 1-D and equal length")
        if x.size < MIN_SCAN_POINTS:
            raise DomainError(f"a scan needs at least {MIN_SCAN_POINTS} points, got {x.size}")
        if not np.all(np.isfinite(t)) or not np.all(t > 0):
            raise DomainError("transmission must be positive everywhere")
        _check_uniform(x, "detunings")
        object.__setattr__(self, "detunings", x)
        object.__setattr__(self, "transmission", t)

    @property
    def spacing(self):
        return (self.detunings[-1] - self.detunings[0]) / (self.detunings.size - 1)


@dataclass(frozen=True)
class FitResult:
    lines: tuple[SpectralLine, ...]
    residual_rms: float
    iterations: int
    cost_trace: tuple[float, ...] = field(default=(), repr=False)

    def medium(self, length, n0=1.0):
        return MediumModel(n0, length, self.lines)

    def as_text(self):
        out = [f"n_lines={len(self.lines)}",
               f"residual_rms={float(self.residual_rms)!r}",
               f"iterations={self.iterations}"]
        for k, line in enumerate(self.lines):
            out += [f"line{k}.alpha0_per_m={line.alpha0!r}",
                    f"line{k}.center_hz={line.omega0 / TWO_PI!r}",
                    f"line{k}.hwhm_hz={line.gamma / TWO_PI!r}"]
        return "\n".join(out) + "\n"


@dataclass(frozen=True)
class GroupIndexProfile:
    detunings: np.ndarray
    group_index: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.detunings, dtype=float)
        g = np.asarray(self.group_index, dtype=float)
        if x.shape != g.shape:
            raise DomainError("profile arrays must have equal length")
        if not np.all(np.isfinite(g)):
            raise DomainError("group index values must be finite")
        object.__setattr__(self, "detunings", x)
        object.__setattr__(self, "group_index", g)


# -- I/O ----------------------------------------------------------------------

SCAN_HEADER = ["detuning_hz", "transmission"]


def load_scan(path):
    """Read a ``detuning_hz,transmission`` CSV; errors name the file line."""
    detunings, transmission = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != SCAN_HEADER:
            raise ScanFormatError(f"expected header {','.join(SCAN_HEADER)!r}", 1)
        for row in reader:
            lineno = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise ScanFormatError(f"expected 2 columns, got {len(row)}", lineno)
            try:
                x, t = float(row[0]), float(row[1])
            except ValueError:
                raise ScanFormatError(f"non-numeric value in {row!r}", lineno) from None
            if not (math.isfinite(x) and math.isfinite(t)):
                raise ScanFormatError("non-finite value", lineno)
            if t <= 0:
                raise ScanFormatError(f"transmission must be positive, got {t}", lineno)
            if detunings and x <= detunings[-1]:
                raise ScanFormatError("detuning is not strictly increasing", lineno)
            detunings.append(x)
            transmission.append(t)
    try:
        return ScanData(np.array(detunings), np.array(transmission))
    except DomainError as exc:
        raise ScanFormatError(str(exc)) from exc


def write_scan(scan, stream):
    stream.write(",".join(SCAN_HEADER) + "\n")
    for x, t in zip(scan.detunings, scan.transmission):
        stream.write(f"{float(x)!r},{float(t)!r}\n")


def write_profile(profile, stream):
    stream.write("detuning_hz,group_index\n")
    for x, g in zip(profile.detunings, profile.group_index):
        stream.write(f"{float(x)!r},{float(g)!r}\n")


# -- synthetic data -----------------------------------------------------------

def emit_scan(medium, start_hz, stop_hz, points, *, reference_hz, noise_fraction=0.0, seed=0):
    """Synthetic scan of ``medium`` on a uniform detuning grid.

    Multiplicative Gaussian noise of relative size ``noise_fraction`` is drawn
    from ``numpy.random.default_rng(seed)``; the seed is stored on the result.
    """
    x = np.linspace(start_hz, stop_hz, int(points))
    t = intensity_transmission(medium, TWO_PI * (reference_hz + x))
    if noise_fraction > 0:
        rng = np.random.default_rng(seed)
        t = t * (1.0 + noise_fraction * rng.standard_normal(x.size))
    return ScanData(x, t, seed=seed)


# -- fitting ------------------------------------------------------------------

def _basis(u, centers, widths):
    d = u[:, None] - centers[None, :]
    w2 = widths[None, :] ** 2
    return w2 / (d * d + w2), d


class _Projection:
    """Variable projection: strengths are the linear least-squares solution
    for given centers and widths (u-units, log widths)."""

    def __init__(self, u, y):
        self.u, self.y = u, y

    def evaluate(self, p):
        centers, widths = p[0::2], np.exp(p[1::2])
        phi, d = _basis(self.u, centers, widths)
        q, r = np.linalg.qr(phi)
        amps = np.linalg.solve(r, q.T @ self.y)
        resid = self.y - phi @ amps
        return resid, amps, phi, d, q

    def jacobian(self, p, amps, phi, d, q):
        widths = np.exp(p[1::2])
        denom = d * d + widths[None, :] ** 2
        dphi_dc = 2.0 * widths**2 * d / denom**2
        dphi_dlogw = 2.0 * widths**2 * d * d / denom**2
        cols = np.empty((self.u.size, p.size))
        cols[:, 0::2] = dphi_dc * amps
        cols[:, 1::2] = dphi_dlogw * amps
        # Kaufman approximation: J = -(I - Q Q^T) dPhi/dp a
        return -(cols - q @ (q.T @ cols))


def fit_lines(scan, n_lines, seed_centers, *, length, reference_hz, max_iter=500, tol=1e-10):
    """Fit ``n_lines`` Lorentzians to ln(transmission).

    ln T(x) = sum_k alpha_k L w_k^2 / ((x - c_k)^2 + w_k^2) is linear in the
    strengths, which are eliminated by a projection; centers and log widths
    are refined by damped Gauss-Newton (Levenberg-Marquardt).  Each line
    starts at its seed center with a width of five grid spacings.

    Returns a FitResult with lines sorted by center frequency.  Raises
    FitError (carrying the best result so far) if the cost has not settled
    to a relative change below ``tol`` within ``max_iter`` iterations, or if a
    width collapses below the grid spacing.
    """
    if n_lines < 1:
        raise DomainError("n_lines must be at least 1")
    seeds = np.asarray(seed_centers, dtype=float)
    if seeds.shape != (n_lines,):
        raise DomainError("need one seed center per line")
    x = scan.detunings
    if np.any(seeds < x[0]) or np.any(seeds > x[-1]):
        raise DomainError("seed centers must lie inside the scan range")

    mid, scale = 0.5 * (x[0] + x[-1]), 0.5 * (x[-1] - x[0])
    u = (x - mid) / scale
    spacing = scan.spacing / scale
    y = np.log(scan.transmission)
    proj = _Projection(u, y)

    p = np.empty(2 * n_lines)
    p[0::2] = (seeds - mid) / scale
    p[1::2] = math.log(5.0 * spacing)

    def result(params, amps, resid, iterations, trace):
        order = np.argsort(params[0::2])
        lines = tuple(
            SpectralLine(float(amps[k] / length),
                         TWO_PI * (reference_hz + mid + scale * params[2 * k]),
                         TWO_PI * scale * math.exp(params[2 * k + 1]))
            for k in order)
        return FitResult(lines, float(np.sqrt(np.mean(resid**2))), iterations, tuple(trace))

    resid, amps, phi, d, q = proj.evaluate(p)
    cost = 0.5 * float(resid @ resid)
    trace = [cost]
    floor = (1e-15 * float(np.abs(y).max() or 1.0)) ** 2 * y.size
    lam = 1e-3
    converged = cost <= floor
    it = 0
    while not converged and it < max_iter:
        it += 1
        jac = proj.jacobian(p, amps, phi, d, q)
        jtj = jac.T @ jac
        grad = jac.T @ resid
        accepted = False
        while lam < 1e16:
            damped = jtj + lam * np.diag(np.diag(jtj) + 1e-300)
            try:
                step = np.linalg.solve(damped, -grad)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            trial = p + step
            try:
                t_resid, t_amps, t_phi, t_d, t_q = proj.evaluate(trial)
            except np.linalg.LinAlgError:
                lam *= 4.0
                continue
            t_cost = 0.5 * float(t_resid @ t_resid)
            if np.isfinite(t_cost) and t_cost < cost:
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            # no descent direction left at working precision
            converged = True
            break
        rel = (cost - t_cost) / cost
        p, resid, amps, phi, d, q, cost = trial, t_resid, t_amps, t_phi, t_d, t_q, t_cost
        trace.append(cost)
        lam = max(lam / 10.0, 1e-12)
        converged = rel < tol or cost <= floor

    best = result(p, amps, resid, it, trace)
    if np.any(np.exp(p[1::2]) < spacing):
        raise FitError("a fitted line width collapsed below the grid spacing", best)
    if not converged:
        raise FitError(f"no convergence after {max_iter} iterations", best)
    return best


# -- Kramers-Kronig and group index ------------------------------------------

def hilbert_transform(values, pad_factor=4):
    """Discrete Hilbert transform (1/pi) p.v. int u(y)/(x - y) dy, via a zero-padded DFT."""
    v = np.asarray(values, dtype=float)
    if pad_factor < 4:
        raise DomainError("pad factor must be at least 4")
    m = 1 << math.ceil(math.log2(pad_factor * v.size))
    spec = np.fft.fft(v, m)
    spec *= -1j * np.sign(np.fft.fftfreq(m))
    return np.fft.ifft(spec)[: v.size].real


def kramers_kronig(omega, im_n, *, pad_factor=4, edge_fraction=1e-3):
    """Dispersive part Re n - n0 from samples of Im n on a uniform grid.

    For an index that is analytic in the upper half of the complex frequency
    plane (the convention used throughout), Re n - n0 = -H[Im n].  The input
    must have decayed to below ``edge_fraction`` of its peak magnitude at both
    grid ends; otherwise LeakageError is raised.
    """
    w = np.asarray(omega, dtype=float)
    im = np.asarray(im_n, dtype=float)
    if w.shape != im.shape or w.ndim != 1:
        raise DomainError("omega and im_n must be 1-D and equal length")
    _check_uniform(w, "omega grid")
    peak = np.max(np.abs(im))
    if peak == 0.0:
        return np.zeros_like(im)
    edge = max(abs(im[0]), abs(im[-1])) / peak
    if edge >= edge_fraction:
        raise LeakageError(f"Im n at the grid edge is {edge:.2e} of its peak "
                           f"(limit {edge_fraction:.0e}); extend the scan")
    return -hilbert_transform(im, pad_factor)


_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_EDGE = {
    0: np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    1: np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
}


def five_point_derivative(y, h):
    """dy/dx on a uniform grid: 5-point central stencil, one-sided 5-point at the ends."""
    y = np.asarray(y, dtype=float)
    n = y.size
    if n < 5:
        raise DomainError("need at least 5 samples")
    out = np.empty(n)
    out[2:-2] = (y[:-4] * _CENTRAL[0] + y[1:-3] * _CENTRAL[1]
                 + y[3:-1] * _CENTRAL[3] + y[4:] * _CENTRAL[4])
    out[0] = _EDGE[0] @ y[:5]
    out[1] = _EDGE[1] @ y[:5]
    out[-1] = -(_EDGE[0] @ y[-5:][::-1])
    out[-2] = -(_EDGE[1] @ y[-5:][::-1])
    return out / h


def group_index_profile(detunings_hz, re_index, omega_ref, n0=1.0):
    """n0 + w dRe(n)/dw by finite differences, with w = omega_ref + 2 pi detuning.

    ``re_index`` may hold Re n or the shift Re n - n0; only its slope is used.
    """
    x = np.asarray(detunings_hz, dtype=float)
    y = np.asarray(re_index, dtype=float)
    if x.size < 5:
        raise DomainError("group-index profile needs at least 5 samples")
    if x.shape != y.shape:
        raise DomainError("detunings and index samples must have equal length")
    h = _check_uniform(x, "detunings")
    omega = omega_ref + TWO_PI * x
    # differencing y - y[0] keeps a constant offset from leaking in via rounding
    slope = five_point_derivative(y - y[0], TWO_PI * h)
    return GroupIndexProfile(x, n0 + omega * slope)


def index_from_scan(scan, *, length, reference_hz):
    """Im n implied by the transmission, -ln(T) c / (2 w L)."""
    omega = TWO_PI * (reference_hz + scan.detunings)
    return omega, -np.log(scan.transmission) * C / (2.0 * omega * length)


def profile_from_fit(fit, detunings_hz, *, length, reference_hz, n0=1.0):
    """Group-index profile through finite differences of the fitted Re n."""
    medium = fit.medium(length, n0)
    x = np.asarray(detunings_hz, dtype=float)
    omega = TWO_PI * (reference_hz + x)
    shift = np.real(index_shift(medium, omega))
    return group_index_profile(x, shift, TWO_PI * reference_hz, n0)


def profile_from_kk(scan, *, length, reference_hz, n0=1.0, pad_factor=4, edge_fraction=1e-3):
    """Model-free group-index profile: scan -> Im n -> Kramers-Kronig -> slope."""
    omega, im = index_from_scan(scan, length=length, reference_hz=reference_hz)
    shift = kramers_kronig(omega, im, pad_factor=pad_factor, edge_fraction=edge_fraction)
    return group_index_profile(scan.detunings, shift, TWO_PI * reference_hz, n0)
