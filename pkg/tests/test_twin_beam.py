import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwm_twinbeam.errors import DomainError
from fwm_twinbeam.medium import C, TWO_PI, MediumModel, SpectralLine, conjugate_frequency, rb85_preset
from fwm_twinbeam.twin_beam import (
    AmplifierParams,
    ChannelLosses,
    NoiseSpectrum,
    TwinBeamState,
    amplify,
    apply_losses,
    delay_from_media,
    difference_noise_db,
    efficiency_for_target,
    read_spectrum_csv,
    squeezing_spectrum,
    write_spectrum_csv,
)

from oracles import FockTwoModeAmplifier, fd_group_index

FIELDS = ("mean_probe", "mean_conjugate", "var_probe", "var_conjugate", "covar")


@pytest.fixture(scope="module")
def fock():
    return FockTwoModeAmplifier(150)


def coherent(n):
    return TwinBeamState(n, 0.0, n, 0.0, 0.0)


# -- amplify -------------------------------------------------------------------

def test_unity_gain_is_passthrough():
    s = amplify(AmplifierParams(1.0, 3.0))
    assert s.mean_conjugate == 0 and s.covar == 0
    assert s.var_probe == 3.0 and s.mean_probe == 3.0


def test_gain_below_one_rejected():
    with pytest.raises(DomainError):
        AmplifierParams(0.99)
    with pytest.raises(DomainError):
        AmplifierParams(2.0, 0.0)


@pytest.mark.parametrize("gain", [1.0, 1.5, 2.0, 3.0, 4.0, 10.0])
def test_ideal_difference_noise_law(gain):
    s = amplify(AmplifierParams(gain, 7.0))
    assert s.normalized_difference_noise() == pytest.approx(1 / (2 * gain - 1), rel=1e-12)


def test_gain_four_ideal_squeezing_db():
    db = difference_noise_db(amplify(AmplifierParams(4.0)))
    assert db == pytest.approx(10 * math.log10(1 / 7), abs=1e-12)
    assert db == pytest.approx(-8.45, abs=0.005)


@pytest.mark.parametrize("gain", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("seed_mean", [1.0, 4.0])
def test_linearized_moments_match_fock_stimulated_part(fock, gain, seed_mean):
    # the linearized model is the seed-proportional part of the exact moments
    exact = fock.stimulated_moments(gain, seed_mean)
    lin = amplify(AmplifierParams(gain, seed_mean))
    for name in FIELDS:
        assert getattr(lin, name) == pytest.approx(exact[name], rel=1e-6, abs=1e-9)


@pytest.mark.parametrize("gain", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("seed_mean", [0.0, 1.0, 4.0])
def test_fock_oracle_matches_closed_form_with_spontaneous_terms(fock, gain, seed_mean):
    # exact result: difference variance is the seed's Poisson variance,
    # mean total flux carries an extra 2(G-1) spontaneous photons
    m = fock.seeded_moments(gain, seed_mean)
    assert m["mean_probe"] == pytest.approx(gain * seed_mean + gain - 1, rel=1e-6)
    assert m["covar"] == pytest.approx(2 * gain * (gain - 1) * seed_mean + gain * (gain - 1), rel=1e-6)
    diff = m["var_probe"] + m["var_conjugate"] - 2 * m["covar"]
    assert diff == pytest.approx(seed_mean, abs=1e-6)


def test_fock_naive_ratio_converges_like_one_over_seed(fock):
    gain = 2.0
    errors = []
    for seed_mean in (1.0, 2.0, 4.0):
        naive = fock.normalized_difference_noise(gain, seed_mean)
        errors.append(abs(naive * (2 * gain - 1) - 1))
        spontaneous = 2 * (gain - 1) / ((2 * gain - 1) * seed_mean + 2 * (gain - 1))
        assert errors[-1] == pytest.approx(spontaneous, rel=1e-5)
    assert errors[0] > errors[1] > errors[2]


@settings(max_examples=100, deadline=None)
@given(gain=st.floats(1.0, 50.0), seed=st.floats(1e-3, 1e15),
       ep=st.floats(1e-3, 1.0), ec=st.floats(1e-3, 1.0))
def test_cauchy_schwarz_preserved(gain, seed, ep, ec):
    s = amplify(AmplifierParams(gain, seed))
    assert s.covar**2 <= s.var_probe * s.var_conjugate * (1 + 1e-12)
    t = apply_losses(s, ChannelLosses(ep, ec))
    assert t.covar**2 <= t.var_probe * t.var_conjugate * (1 + 1e-12)


@settings(max_examples=50, deadline=None)
@given(g1=st.floats(1.0, 20.0), dg=st.floats(1e-3, 5.0))
def test_ideal_noise_monotone_in_gain(g1, dg):
    a = amplify(AmplifierParams(g1)).normalized_difference_noise()
    b = amplify(AmplifierParams(g1 + dg)).normalized_difference_noise()
    assert b < a


# -- losses --------------------------------------------------------------------

def test_unit_transmittance_is_identity():
    s = amplify(AmplifierParams(3.0, 2.0))
    assert apply_losses(s, ChannelLosses(1.0, 1.0)) == s


@pytest.mark.parametrize("eta", [1e-3, 0.3, 0.8, 1.0])
def test_loss_keeps_coherent_statistics(eta):
    t = apply_losses(coherent(5.0), ChannelLosses(eta, 0.5))
    assert t.var_probe == pytest.approx(eta * 5.0, rel=1e-14)
    assert t.var_probe == pytest.approx(t.mean_probe, rel=1e-14)
    assert difference_noise_db(t) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("bad", [0.0, -0.1, 1.01, math.nan])
def test_invalid_transmittance(bad):
    with pytest.raises(DomainError):
        ChannelLosses(bad, 1.0)


@settings(max_examples=100, deadline=None)
@given(gain=st.floats(1.0, 20.0), a=st.floats(1e-3, 1.0), b=st.floats(1e-3, 1.0),
       c=st.floats(1e-3, 1.0), d=st.floats(1e-3, 1.0))
def test_losses_compose(gain, a, b, c, d):
    s = amplify(AmplifierParams(gain, 10.0))
    two = apply_losses(apply_losses(s, ChannelLosses(a, c)), ChannelLosses(b, d))
    one = apply_losses(s, ChannelLosses(a * b, c * d))
    for name in FIELDS:
        assert getattr(two, name) == pytest.approx(getattr(one, name), rel=1e-12, abs=1e-300)


def test_lossy_state_matches_fock_beam_splitter(fock):
    gain, seed, eta = 4.0, 4.0, 0.8
    # truncation error at G=4, |alpha|^2 = 4 is far below the 1% tolerance
    exact = fock.stimulated_moments(gain, seed, eta, eta)
    lin = apply_losses(amplify(AmplifierParams(gain, seed)), ChannelLosses(eta, eta))
    exact_noise = ((exact["var_probe"] + exact["var_conjugate"] - 2 * exact["covar"])
                   / (exact["mean_probe"] + exact["mean_conjugate"]))
    assert lin.normalized_difference_noise() == pytest.approx(exact_noise, rel=0.01)


@pytest.mark.parametrize("gain", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("eta", [1.0, 0.8])
def test_fock_equivalence_with_losses(fock, gain, eta):
    for seed in (1.0, 4.0):
        exact = fock.stimulated_moments(gain, seed, eta, eta)
        lin = apply_losses(amplify(AmplifierParams(gain, seed)), ChannelLosses(eta, eta))
        for name in FIELDS:
            assert getattr(lin, name) == pytest.approx(exact[name], rel=1e-5, abs=1e-8)


# -- difference noise ------------------------------------------------------------

def test_shot_noise_limit_is_zero_db():
    assert difference_noise_db(amplify(AmplifierParams(1.0, 9.0))) == 0.0


def test_zero_flux_is_domain_error():
    with pytest.raises(DomainError):
        difference_noise_db(TwinBeamState(0, 0, 0, 0, 0))


@settings(max_examples=50, deadline=None)
@given(a=st.floats(1e-6, 1e12), b=st.floats(0, 1e12))
def test_no_squeezing_without_correlation(a, b):
    assert difference_noise_db(TwinBeamState(a, b, a, b, 0.0)) >= -1e-12


@pytest.mark.parametrize("gain", [4.0, 10.0])
def test_efficiency_for_two_point_one_db(gain):
    eta = efficiency_for_target(gain, -2.1)
    assert 0 < eta < 1
    s = apply_losses(amplify(AmplifierParams(gain)), ChannelLosses(eta, eta))
    assert difference_noise_db(s) == pytest.approx(-2.1, abs=0.05)
    # closed form for symmetric loss: 1 - eta (2G-2)/(2G-1)
    assert eta == pytest.approx((1 - 10 ** -0.21) * (2 * gain - 1) / (2 * gain - 2), rel=1e-9)


def test_unreachable_target():
    with pytest.raises(DomainError):
        efficiency_for_target(2.0, -20.0)


# -- spectrum --------------------------------------------------------------------

def ideal(gain=4.0):
    return amplify(AmplifierParams(gain, 1.0))


def test_zero_delay_spectrum_is_flat():
    s = ideal()
    spec = squeezing_spectrum(s, 0.0, np.linspace(0, 5e6, 51))
    np.testing.assert_allclose(spec.noise_db, difference_noise_db(s), rtol=1e-12)


def test_quarter_period_gives_single_beam_noise():
    tau = 200e-9
    spec = squeezing_spectrum(ideal(4.0), tau, [1 / (4 * tau)])
    assert 10 ** (spec.noise_db[0] / 10) == pytest.approx(2 * 4.0 - 1, rel=1e-9)


def test_low_frequency_limit_is_quadratic():
    s, tau = ideal(3.0), 100e-9
    base = s.normalized_difference_noise()
    f = np.array([1e2, 1e3, 1e4])
    excess = 10 ** (squeezing_spectrum(s, tau, f).noise_db / 10) - base
    ratios = excess[1:] / excess[:-1]
    np.testing.assert_allclose(ratios, 100.0, rtol=1e-3)


def test_spectrum_periodic_with_minima_at_multiples():
    s, tau = apply_losses(ideal(4.0), ChannelLosses(0.6, 0.7)), 150e-9
    f = np.linspace(0, 3e6, 301)
    a = squeezing_spectrum(s, tau, f).noise_db
    b = squeezing_spectrum(s, tau, f + 1 / tau).noise_db
    np.testing.assert_allclose(a, b, atol=1e-9)
    minima = squeezing_spectrum(s, tau, np.arange(4) / tau).noise_db
    np.testing.assert_allclose(minima, difference_noise_db(s), atol=1e-9)
    assert np.all(a >= difference_noise_db(s) - 1e-12)


@pytest.mark.parametrize("freqs", [[1.0, 1.0], [2.0, 1.0], [-1.0, 2.0]])
def test_spectrum_rejects_bad_grids(freqs):
    with pytest.raises(ValueError):
        squeezing_spectrum(ideal(), 1e-7, freqs)


def test_spectrum_csv_roundtrip():
    spec = squeezing_spectrum(ideal(), 37e-9, np.linspace(1e5, 5e6, 17))
    buf = io.StringIO()
    write_spectrum_csv(spec, buf)
    assert buf.getvalue().startswith("frequency_hz,noise_db\n")
    again = read_spectrum_csv(io.StringIO(buf.getvalue()))
    np.testing.assert_array_equal(again.frequencies, spec.frequencies)
    np.testing.assert_array_equal(again.noise_db, spec.noise_db)


def test_noise_spectrum_invariants():
    with pytest.raises(ValueError):
        NoiseSpectrum(np.array([1.0, 2.0]), np.array([0.0]))


# -- delay from media -------------------------------------------------------------

def test_delay_identical_frequencies_and_empty_medium():
    medium, source = rb85_preset()
    w = source.probe_frequency
    assert delay_from_media(medium, w, w) == 0.0
    assert delay_from_media(MediumModel(1.0, 0.017), w, conjugate_frequency(source)) == 0.0


def test_delay_probe_on_gain_line_conjugate_off_resonance():
    medium, source = rb85_preset()
    probe_line = [ln for ln in medium.lines if ln.omega0 == source.probe_frequency][0]
    only_probe = MediumModel(1.0, medium.length, [probe_line])
    conj = conjugate_frequency(source)
    tau = delay_from_media(only_probe, source.probe_frequency, conj)
    ng = fd_group_index(lambda w: np.asarray(
        sum(C * ln.alpha0 / (2 * w) * ln.gamma / (w - ln.omega0 + 1j * ln.gamma)
            for ln in only_probe.lines)), 1.0, source.probe_frequency, probe_line.gamma * 1e-6)
    expected = only_probe.length / C * (ng - 1.0)
    assert tau > 0
    assert tau == pytest.approx(expected, rel=1e-4)
