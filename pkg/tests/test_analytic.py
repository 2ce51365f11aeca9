import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afc_raman import analytic, comb
from afc_raman.analytic import PerturbativeWarning, ProtocolError, ProtocolParams
from afc_raman.comb import CombParams, RegimeWarning
from conftest import wide_comb

LN2 = math.log(2.0)
ABAR = comb.TOOTH_AREA_FACTOR * 10 / 5  # preset effective depth, ~2.129
DEPH5 = math.exp(-math.pi ** 2 / (2 * LN2 * 25))

pytestmark = pytest.mark.filterwarnings("ignore::afc_raman.comb.RegimeWarning")


def test_protocol_validation():
    with pytest.raises(ValueError):
        ProtocolParams(theta0_sq=-0.1)
    with pytest.raises(ValueError):
        ProtocolParams(theta0_sq=0.5)
    with pytest.raises(ValueError):
        ProtocolParams(theta0_sq=0.1, read_area=3.0)
    with pytest.raises(ValueError):
        ProtocolParams(theta0_sq=0.1, t_d=-1)
    with pytest.warns(PerturbativeWarning):
        ProtocolParams(theta0_sq=0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ProtocolParams(theta0_sq=0.1)


def test_check_timing(pr_comb):
    ProtocolParams(0.1, t_d=0.99 * pr_comb.echo_time).check_timing(pr_comb)
    with pytest.raises(ProtocolError, match="2\\*pi/delta0"):
        ProtocolParams(0.1, t_d=pr_comb.echo_time).check_timing(pr_comb)


def test_stokes_examples(pr_comb, pr_protocol):
    assert analytic.stokes_photons_per_mode(pr_comb, pr_protocol) == pytest.approx(0.0881, abs=1e-4)
    assert analytic.stokes_probability(1e3, 0.1) == pytest.approx(0.1)
    assert analytic.stokes_photons_per_mode(pr_comb, ProtocolParams(0.0)) == 0.0
    unexp = analytic.stokes_photons_unexpanded(pr_comb, pr_protocol)
    assert unexp == pytest.approx(math.exp(0.1 * (1 - math.exp(-ABAR))) - 1, rel=1e-12)


def test_photons_per_write_attempt():
    c = CombParams(30e3, 150e3, 2e6, 10)
    p = ProtocolParams(0.1)
    n = analytic.photons_per_write_attempt(c, p)
    assert n == pytest.approx(2.946, rel=2e-3)
    assert n / analytic.stokes_photons_per_mode(c, p) == pytest.approx(math.sqrt(2 * math.pi) * 2e6 / 150e3)
    assert analytic.photons_per_write_attempt(c, ProtocolParams(0.0)) == 0.0


def test_saturated_gain():
    assert analytic.saturated_gain_photons(CombParams(30e3, 150e3, 1e6, 10)) == pytest.approx(7.41, abs=0.01)
    assert analytic.saturated_gain_photons(CombParams(30e3, 150e3, 1e6, 0)) == 0.0
    small = CombParams(30e3, 150e3, 1e6, 1e-4)
    assert analytic.saturated_gain_photons(small) == pytest.approx(comb.effective_depth(small), rel=1e-4)


def test_backward_readout(pr_comb):
    assert analytic.readout_efficiency_backward(pr_comb) == pytest.approx(0.663, abs=1e-3)
    assert analytic.readout_efficiency_backward(CombParams(30e3, 150e3, 1e6, 0)) == 0.0
    deep = wide_comb(200, alpha_L=1e5)
    assert analytic.readout_efficiency_backward(deep) > 0.999


def test_forward_readout():
    xs = np.linspace(1e-3, 10, 200001)
    eta = analytic.forward_raman(xs)
    assert eta.max() == pytest.approx(0.648, abs=5e-4)
    assert xs[eta.argmax()] == pytest.approx(1.60, abs=0.01)
    assert analytic.forward_raman(1e-9) < 1e-8
    # closed form at the preset depth and finesse
    assert analytic.forward_raman(ABAR, 5) == pytest.approx(ABAR ** 2 / math.expm1(ABAR) * DEPH5, rel=1e-12)
    assert analytic.forward_raman(ABAR, 5) == pytest.approx(0.4604, abs=1e-4)


def test_forward_below_backward_everywhere():
    xs = np.geomspace(1e-4, 50, 2000)
    assert np.all(analytic.forward_raman(xs) < analytic.backward_raman(xs))


def test_memory_efficiency(pr_comb):
    xs = np.linspace(1e-3, 10, 200001)
    eta = analytic.forward_memory(xs)
    assert eta.max() == pytest.approx(4 * math.exp(-2), abs=1e-6)
    assert xs[eta.argmax()] == pytest.approx(2.0, abs=1e-3)
    assert analytic.forward_memory(0.0) == 0.0
    assert analytic.afc_memory_efficiency(pr_comb) == pytest.approx(0.584, abs=1e-3)
    assert analytic.afc_memory_efficiency(pr_comb, "forward") == pytest.approx(ABAR ** 2 * math.exp(-ABAR) * DEPH5)
    with pytest.raises(ValueError):
        analytic.afc_memory_efficiency(pr_comb, "sideways")


def test_noise(pr_comb, pr_protocol):
    assert analytic.noise_per_mode(pr_comb, pr_protocol) == pytest.approx(0.0493, abs=1e-4)
    assert analytic.noise_per_mode(pr_comb, ProtocolParams(0.0)) == 0.0
    assert analytic.noise_level(1e3, 0.1) == pytest.approx(0.05)


def test_snr(pr_comb, pr_protocol):
    snr = analytic.snr_bound(pr_comb, pr_protocol)
    assert snr == pytest.approx(13.4, abs=0.1)
    explicit = 2 * (1 - math.exp(-ABAR)) * DEPH5 / (0.1 * (1 - math.exp(-2 * ABAR)))
    assert snr == pytest.approx(explicit, rel=1e-13)
    assert analytic.snr_asymptotic(pr_protocol) == pytest.approx(20)
    assert analytic.snr_asymptotic(1.0) == 2.0
    with pytest.raises(ValueError):
        analytic.snr_bound(pr_comb, ProtocolParams(0.0))


def test_mode_capacity(pr_comb):
    assert analytic.mode_capacity(pr_comb) == 13
    c = CombParams(30e3, 150e3, 75e3, 10)
    assert analytic.mode_capacity(c) == 1
    base = wide_comb(5)
    doubled = CombParams(base.gamma_fwhm, base.delta0, 2 * base.big_gamma, base.alpha_L)
    assert analytic.mode_capacity(doubled) == 2 * analytic.mode_capacity(base)


def test_full_report(pr_comb, pr_protocol):
    r = analytic.full_report(pr_comb, pr_protocol)
    assert r.p_stokes == analytic.stokes_photons_per_mode(pr_comb, pr_protocol)
    assert r.eta_readout == analytic.readout_efficiency_backward(pr_comb)
    assert r.noise_per_mode == analytic.noise_per_mode(pr_comb, pr_protocol)
    assert r.snr_lower_bound == analytic.snr_bound(pr_comb, pr_protocol)
    assert r.echo_time == pytest.approx(1 / 150e3)
    assert r.eta_readout == pytest.approx(0.66, abs=0.01) and r.snr_lower_bound >= 13
    zero = analytic.full_report(pr_comb, ProtocolParams(0.0))
    assert zero.p_stokes == zero.noise_per_mode == zero.photons_per_write_attempt == 0.0
    assert zero.snr_lower_bound is None and zero.eta_readout == r.eta_readout
    assert set(r.to_dict()) == {"p_stokes", "eta_readout", "noise_per_mode", "snr_lower_bound",
                                "echo_time", "mode_capacity", "photons_per_write_attempt"}


def test_regime_warning_from_readout(pr_comb):
    with pytest.warns(RegimeWarning):
        analytic.readout_efficiency_backward(pr_comb)


def test_unique_interior_maximum_in_finesse():
    fs = np.linspace(1.5, 50, 5000)
    for aL in (0.1, 1, 10, 100):
        eta = analytic.backward_raman(comb.TOOTH_AREA_FACTOR * aL / fs, fs)
        i = int(np.argmax(eta))
        assert 0 < i < fs.size - 1
        assert np.all(np.diff(eta[: i + 1]) >= 0) and np.all(np.diff(eta[i:]) <= 0)


@settings(max_examples=60, deadline=None)
@given(f=st.floats(1.2, 100), a=st.floats(0, 500), b=st.floats(0, 500),
       th=st.floats(1e-4, 0.3))
def test_properties(f, a, b, th):
    lo, hi = sorted((a, b))
    c_lo, c_hi = wide_comb(f, lo), wide_comb(f, hi)
    assert analytic.readout_efficiency_backward(c_lo) <= analytic.readout_efficiency_backward(c_hi)
    for c in (c_lo, c_hi):
        x = comb.effective_depth(c)
        for fn in (analytic.backward_raman, analytic.forward_raman,
                   analytic.backward_memory, analytic.forward_memory):
            assert 0.0 <= fn(x, f) <= 1.0
        if x > 1e-6:
            ratio = analytic.backward_raman(x, f) / analytic.backward_memory(x, f)
            assert ratio == pytest.approx(1 / -math.expm1(-x), rel=1e-12)
            assert ratio >= 1
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", PerturbativeWarning)
                p = ProtocolParams(th)
            assert analytic.snr_bound(c, p) == pytest.approx(
                analytic.readout_efficiency_backward(c) / analytic.noise_per_mode(c, p), rel=1e-15)
            assert analytic.snr_bound(c, p) <= analytic.snr_asymptotic(p) * (1 + 1e-12)
