import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pairwise import opo


def _four_line(gamma=1.0, d1=0.5):
    d2 = math.sqrt(d1**2 + math.pi / gamma)
    return opo.LineSpectrum.from_pairs([d1, d2], [0.25, 0.25])


# --- spectra ----------------------------------------------------------------


def test_line_spectrum_twins_enforced():
    with pytest.raises(ValueError):
        opo.LineSpectrum(np.array([-1.0, 1.0]), np.array([1.0, 0.9]))
    with pytest.raises(ValueError):
        opo.LineSpectrum(np.array([-1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        opo.LineSpectrum(np.array([-1.0, 1.0]), np.array([0.0, 0.0]))
    s = opo.LineSpectrum(np.array([1.0, -1.0]), np.array([2.0, 2.0]))
    assert list(s.detunings) == [-1.0, 1.0]
    assert list(s.columns()) == ["detuning_rad_s", "power"]


def test_f_at_zero_is_total_power():
    s = opo.LineSpectrum.from_pairs([0.3, 0.9, 1.4], [0.1, 0.5, 0.2])
    f = opo.loss_amplitude(s, 0.0)
    assert f.imag == 0 and f.real == pytest.approx(s.total_power, rel=1e-15)


def test_pi_relation_cancels_f():
    s = _four_line(1.7, 0.4)
    assert abs(opo.loss_amplitude(s, 1.7)) < 1e-12 * s.total_power


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 10**6), gamma=st.floats(-50, 50))
def test_property_f_bounded_by_f0(seed, gamma):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 8))
    s = opo.LineSpectrum.from_pairs(rng.uniform(0, 3, k), rng.uniform(0, 1, k) + 1e-3)
    assert abs(opo.loss_amplitude(s, gamma)) <= opo.loss_amplitude(s, 0.0).real * (1 + 1e-12)


def test_detuning_form_equals_pair_phase_form():
    # per-field phase gamma w^2 / 2 on absolute frequency, summed over each pair
    wo, gamma = 40.0, 0.37
    s = opo.LineSpectrum.from_pairs([0.2, 0.7, 1.3], [0.3, 0.1, 0.6])
    d, p = s.detunings, s.powers
    phi = lambda w: 0.5 * gamma * w**2  # noqa: E731
    pair = np.sum(p * np.exp(1j * (phi(wo + d) + phi(wo - d))))
    assert abs(pair) == pytest.approx(abs(opo.loss_amplitude(s, gamma)), rel=1e-12)


def test_f_depends_only_on_powers():
    # an antisymmetric phase on the fields leaves every |A|^2, hence F, unchanged
    rng = np.random.default_rng(4)
    d = np.array([0.4, 1.1, 1.6])
    amp = rng.uniform(0.2, 1.0, 3)
    phase = rng.uniform(-3, 3, 3)
    a_sig = amp * np.exp(1j * phase)
    a_idl = np.conj(a_sig)  # twin amplitudes
    s1 = opo.LineSpectrum.from_pairs(d, np.abs(a_sig) ** 2)
    s2 = opo.LineSpectrum.from_pairs(d, np.abs(a_idl * np.exp(1j * 0.9 * d)) ** 2)
    assert opo.loss_amplitude(s1, 0.8) == pytest.approx(opo.loss_amplitude(s2, 0.8), rel=1e-14)


# --- efficiency ----------------------------------------------------------------


def test_efficiency_anchors():
    assert opo.efficiency(4, 1.0) == 0.5
    assert opo.efficiency(4, 0.0) == 1.0
    assert opo.efficiency(1, 0.3) == 0.0
    with pytest.raises(ValueError):
        opo.efficiency(0.9, 0.5)
    with pytest.raises(ValueError):
        opo.efficiency(4, 1.2)


def test_efficiency_equals_sqrt_form():
    N = np.linspace(1, 40, 397)
    for r in (0.0, 0.3, 0.77, 1.0):
        ref = 4 / (1 + r * r) * (np.sqrt(N) - 1) / N
        assert np.allclose(opo.efficiency(N, r), ref, rtol=1e-12, atol=1e-15)


def test_efficiency_curve_shapes():
    N = np.linspace(1, 16, 1501)
    t = opo.efficiency_curve(N, r_practical=0.53)
    step = N[1] - N[0]
    for curve in (t.eta_narrow, t.eta_ideal, t.eta_practical):
        assert abs(N[np.argmax(curve)] - 4.0) <= step
    assert np.all(t.eta_narrow <= t.eta_practical) and np.all(t.eta_practical <= t.eta_ideal)
    ratio = t.eta_ideal[1:] / t.eta_narrow[1:]
    assert np.allclose(ratio, 2.0, rtol=1e-12)
    assert list(t.columns()) == ["N", "eta_narrow", "eta_ideal", "eta_practical"]


def test_practical_r_from_optimizer_is_partial():
    r = opo.practical_r(seed=0)
    assert 0.0 < r < 1.0


def test_config_validation():
    with pytest.raises(ValueError):
        opo.OpoConfig((1.0,), 0.05, 1.0, pump_ratio=0.5)
    with pytest.raises(ValueError):
        opo.OpoConfig((1.0,), 1.0, 1.0)


def test_threshold_scaling():
    t = opo.threshold(0.02, 1.5, 0.01)
    assert t == pytest.approx(0.02**2 / (4 * 1.5**2 * 0.01**2), rel=1e-15)
    assert opo.threshold(0.04, 1.5, 0.01) == pytest.approx(4 * t, rel=1e-15)
    assert opo.threshold(0.02, 1.5, 0.02) == pytest.approx(t / 4, rel=1e-15)
    with pytest.raises(ValueError):
        opo.threshold(0.02, 0.0, 0.01)


# --- tax -------------------------------------------------------------------------


def test_single_pair_tax_is_maximal():
    s = opo.LineSpectrum.from_pairs([0.8], [0.5])
    gammas = [0.1, 1.0, 2.5]
    assert opo.total_tax(s, gammas) == pytest.approx(3 * s.total_power**2, rel=1e-14)
    assert opo.total_tax(s, gammas, normalized=True) == pytest.approx(3.0, rel=1e-14)


def test_four_line_tax_is_zero():
    assert opo.total_tax(_four_line(), [1.0], normalized=True) < 1e-24


def test_continuum_tax_riemann_convergence():
    s = opo.LineSpectrum.from_pairs([0.3, 1.0], [0.4, 0.1])
    d, p = s.detunings, s.powers
    G = 5.0
    diff = d[:, None] ** 2 - d[None, :] ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        kern = np.where(diff == 0, G, (np.exp(1j * G * diff) - 1) / (1j * diff))
    exact = float(np.real(p @ kern @ p))
    errs = []
    for n in (50, 100, 200, 400):
        g = (np.arange(n) + 0.5) * G / n
        errs.append(abs(opo.total_tax(s, g) * G / n - exact))
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-4 * exact


# --- optimizer ---------------------------------------------------------------------


def test_optimizer_single_gamma_two_pairs():
    res = opo.optimize_spectrum([1.0], 2, 2.0, seed=0)
    assert res.tax < 1e-10
    d = res.spectrum.detunings[res.spectrum.detunings > 0]
    assert d.size == 2
    assert 1.0 * (d[1] ** 2 - d[0] ** 2) == pytest.approx(math.pi, abs=1e-5)


def test_optimizer_two_gammas_needs_four_pairs():
    # the band must let gamma * d^2 span 4 pi / 3 for the three-phase solution
    two = opo.optimize_spectrum([1.0, 2.0], 2, 3.6, seed=0)
    assert two.tax > 0.1
    four = opo.optimize_spectrum([1.0, 2.0], 4, 3.6, seed=0)
    assert four.tax < 1e-6


def test_narrow_band_blocks_cancellation():
    res = opo.optimize_spectrum([1.0, 2.0], 4, 2.0, seed=0)
    assert res.tax > 1e-3


def test_optimizer_no_gammas():
    res = opo.optimize_spectrum([], 3, 2.0)
    assert res.tax == 0.0


def test_optimizer_invariants_and_determinism():
    a = opo.optimize_spectrum([1.0, 2.0, 3.0], 3, 2.0, seed=5, starts=4)
    b = opo.optimize_spectrum([1.0, 2.0, 3.0], 3, 2.0, seed=5, starts=4)
    assert np.array_equal(a.spectrum.detunings, b.spectrum.detunings)
    assert a.tax == b.tax
    s = a.spectrum
    assert np.allclose(s.detunings, -s.detunings[::-1]) and np.allclose(s.powers, s.powers[::-1])
    assert all(x >= y for x, y in zip(a.history, a.history[1:]))
    assert a.spectrum.total_power == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("args", [([1.0], 0, 2.0), ([1.0], 2, 0.0)])
def test_optimizer_rejects(args):
    with pytest.raises(ValueError):
        opo.optimize_spectrum(*args)
