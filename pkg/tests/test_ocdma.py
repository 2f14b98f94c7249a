import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pairwise import ocdma, response, spectral

DELTA = 1e12


def _budget(ratio=64, K=1):
    return ocdma.LinkBudget(ratio * DELTA, DELTA, 10.0, K)


def _key(ratio=64, seed=3):
    b = _budget(ratio)
    return b, ocdma.gen_keys(b.grid(), seed)


def _unit_key(b, seed=0):
    g = b.grid()
    ph = np.random.default_rng(seed).uniform(0, 2 * math.pi, g.n_points // 2)
    return spectral.mean_pair(g, b.envelope(), ph)


# --- budget ---------------------------------------------------------------------


@pytest.mark.parametrize("args", [(2e12, 1e12), (64e12, 0.0), (63e12, 1e12)])
def test_budget_rejects(args):
    with pytest.raises(ValueError):
        ocdma.LinkBudget(*args)
    with pytest.raises(ValueError):
        ocdma.LinkBudget(64e12, 1e12, 10.0, 0)


def test_budget_bookkeeping():
    b = _budget(64)
    assert b.gain == 32
    assert b.grid().n_points == 64 and b.grid().spacing == pytest.approx(DELTA)
    assert b.slot > b.coherence_time
    assert np.allclose(np.diff(b.delays(5)), b.slot)


def test_channel_rejects_modulation():
    with pytest.raises(ValueError):
        ocdma.Channel(0, 0.0, "fsk")


def test_link_config(tmp_path):
    p = tmp_path / "link.json"
    p.write_text(json.dumps({"Delta": 64e12, "delta": 1e12, "K": 8, "modulation": "ook",
                             "frames": 200, "seed": 4}))
    b, run = ocdma.load_link_config(p)
    assert b.n_channels == 8 and b.gain == 32
    assert run == {"modulation": "ook", "frames": 200, "seed": 4}


# --- encode ------------------------------------------------------------------------


def test_encode_examples():
    _, key = _key()
    assert np.all(ocdma.encode(key.signal, 0, "ook").amp == 0)
    assert np.array_equal(ocdma.encode(key.signal, 1, "ook").amp, key.signal.amp)
    assert np.array_equal(ocdma.encode(key.signal, 0, "psk").amp, key.signal.amp)
    assert np.array_equal(ocdma.encode(key.signal, 1, "psk").amp, -key.signal.amp)


def test_psk_flips_statistic_phase_only():
    b, key = _key()
    s0 = ocdma.decode(ocdma.mux([ocdma.Channel(0, 0.0)], key, bits=[0]), 0, 0.0)
    s1 = ocdma.decode(ocdma.mux([ocdma.Channel(0, 0.0)], key, bits=[1]), 0, 0.0)
    assert abs(s1) == pytest.approx(abs(s0), rel=1e-14)
    assert abs(np.angle(s1 / s0)) == pytest.approx(math.pi, abs=1e-12)


# --- mux / decode --------------------------------------------------------------------


def test_single_channel_reduces_to_conjugate_pair():
    b, key = _key()
    comb = ocdma.mux([ocdma.Channel(0, 0.0)], key, bits=[0])
    assert np.array_equal(comb.amp, key.combined().amp)
    s = ocdma.decode(comb, 0, 0.0)
    assert abs(s) ** 2 == pytest.approx(response.coherent_peak(key), rel=1e-12)


def test_collisions_rejected():
    b, key = _key()
    chans = [ocdma.Channel(0, 0.0), ocdma.Channel(1, 0.5 * b.coherence_time)]
    with pytest.raises(ValueError):
        ocdma.mux(chans, key)
    # circular distance: tau and tau + grid period are the same signature
    period = 2 * math.pi / b.grid().spacing
    with pytest.raises(ValueError):
        ocdma.mux([ocdma.Channel(0, 0.0), ocdma.Channel(1, period)], key)


def test_power_linearity_for_unit_key():
    b = _budget(64)
    key = _unit_key(b)
    per = key.signal.power
    for K in (1, 3, 8):
        chans = [ocdma.Channel(c, t) for c, t in enumerate(b.delays(K))]
        comb = ocdma.mux(chans, key, bits=[0] * K)
        assert comb.power == pytest.approx(K * per + key.idler.power, rel=1e-9)


def test_mismatched_decode_is_background():
    b = _budget(64)
    g = b.grid()
    tau = b.slot * 3
    peaks, mism = [], []
    for seed in range(400):
        key = ocdma.gen_keys(g, seed)
        comb = ocdma.mux([ocdma.Channel(0, tau)], key, bits=[0])
        peaks.append(abs(ocdma.decode(comb, 0, tau)) ** 2)
        mism.append(abs(ocdma.decode(comb, 0, 0.0)) ** 2)
    # background = ensemble mean peak / G, with G = n / 2 modes
    ref = np.mean(peaks) / b.gain
    assert np.mean(mism) == pytest.approx(ref, rel=0.2)


def test_decode_then_redelay_leaves_others_unchanged():
    b, key = _key()
    delays = b.delays(6)
    chans = [ocdma.Channel(c, t) for c, t in enumerate(delays)]
    comb = ocdma.mux(chans, key, bits=[1, 0, 1, 1, 0, 0])
    before = ocdma.decode_all(comb, delays)
    back = ocdma.apply_delay(ocdma.apply_delay(comb, -delays[2]), delays[2])
    after = ocdma.decode_all(back, delays)
    scale = np.abs(before).max()
    assert np.max(np.abs(after - before)) < 1e-9 * scale


def test_decode_all_matches_decode():
    b, key = _key()
    comb = ocdma.mux([ocdma.Channel(c, t) for c, t in enumerate(b.delays(4))], key, bits=[1, 0, 0, 1])
    all_ = ocdma.decode_all(comb, b.delays(4))
    for c, t in enumerate(b.delays(4)):
        assert ocdma.decode(comb, c, t) == pytest.approx(all_[c], rel=1e-14)


def test_secret_mask_required():
    b, key = _key()
    g = b.grid()
    secret = ocdma.secret_mask(g, 9)
    comb = ocdma.mux([ocdma.Channel(0, 0.0)], key, bits=[0], secret=secret)
    ok = abs(ocdma.decode(comb, 0, 0.0, secret)) ** 2
    assert ok == pytest.approx(response.coherent_peak(key), rel=1e-12)
    blind = np.mean([abs(ocdma.decode(
        ocdma.mux([ocdma.Channel(0, 0.0)], ocdma.gen_keys(g, s), bits=[0],
                  secret=ocdma.secret_mask(g, 100 + s)), 0, 0.0)) ** 2 for s in range(300)])
    # random phases leave sum E|a|^4 = 2 m v^2 against a peak of (m^2 + m) v^2
    m = g.n_points // 2
    peak = np.mean([response.coherent_peak(ocdma.gen_keys(g, s)) for s in range(300)])
    assert blind == pytest.approx(2 * peak / (m + 1), rel=0.25)


# --- statistics ------------------------------------------------------------------


def test_statistics_match_direct_mux():
    b = _budget(64)
    g = b.grid()
    delays = b.delays(5)
    bits = np.array([[1, 0, 1, 1, 0]])
    keys = ocdma._keys(g, b.envelope(), 11, 1, "gaussian")
    S, _ = ocdma._statistics(keys, np.where(bits == 1, -1.0, 1.0), delays, g)
    # rebuild the same key as a conjugate pair and go through mux/decode
    sig = np.zeros(g.n_points, complex)
    sig[g.positive] = keys[0]
    idl = np.zeros(g.n_points, complex)
    idl[g.negative] = np.conj(keys[0])[::-1]
    key = spectral.ConjugatePair(spectral.SpectralField(g, sig), spectral.SpectralField(g, idl))
    comb = ocdma.mux([ocdma.Channel(c, t) for c, t in enumerate(delays)], key, bits=list(bits[0]))
    assert np.allclose(S[0], ocdma.decode_all(comb, delays), rtol=1e-12, atol=0)


def test_sir_exact_oracle_and_prediction():
    b = _budget(64)
    for K in (2, 4, 8, 16):
        # Gaussian key: E|S_self|^2 / E|interference|^2 = (G + 1) / (K - 1)
        exact = ocdma.sir_monte_carlo(b, 20000, seed=1, K=K)
        assert exact.sir == pytest.approx((b.gain + 1) / (K - 1), rel=0.03)
        est = ocdma.sir_monte_carlo(b, 300, seed=1, K=K)
        assert est.sir == pytest.approx(est.predicted, rel=0.25)
        assert est.predicted == b.gain / (K - 1)
    with pytest.raises(ValueError):
        ocdma.sir_monte_carlo(b, 10, K=1)


def test_interference_variance_slope():
    b = _budget(64)
    Ks = np.array([2, 4, 8, 16])
    var = np.array([b.gain / ocdma.sir_monte_carlo(b, 300, seed=2, K=int(k)).sir for k in Ks])
    slope = np.polyfit(np.log(Ks - 1), np.log(var), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.15)


def test_matched_second_moment():
    b = _budget(64)
    g = b.grid()
    keys = ocdma._keys(g, b.envelope(), 0, 4000, "gaussian")
    mc = np.mean((np.sum(np.abs(keys) ** 2, axis=1) * g.spacing) ** 2)
    assert mc == pytest.approx(ocdma.matched_second_moment(b), rel=0.03)


# --- BER ----------------------------------------------------------------------------


def test_ber_single_channel_noiseless():
    b = _budget(64)
    for mod in ("psk", "ook"):
        r = ocdma.ber_monte_carlo(b, mod, 200, seed=0, K=1, key="unit")
        assert r.errors == 0 and r.ber == 0.0


@pytest.mark.parametrize("K", [8, 16])
def test_psk_beats_ook(K):
    b = _budget(64)
    psk = ocdma.ber_monte_carlo(b, "psk", 1000, seed=5, K=K)
    ook = ocdma.ber_monte_carlo(b, "ook", 1000, seed=5, K=K)
    assert psk.ber < ook.ber


def test_ber_nondecreasing_in_k():
    b = _budget(64)
    prev = None
    for K in (2, 4, 8, 16):
        r = ocdma.ber_monte_carlo(b, "ook", 1000, seed=6, K=K)
        if prev is not None:
            assert r.ci_high >= prev.ci_low
        prev = r


def test_ber_result_fields():
    r = ocdma.ber_monte_carlo(_budget(64), "psk", 100, seed=0, K=4)
    assert r.ci_low <= r.ber <= r.ci_high
    assert set(r.row()) == {"K", "ber", "ci_low", "ci_high", "frames"}
    assert r.bits == 100 * 3
    with pytest.raises(ValueError):
        ocdma.ber_monte_carlo(_budget(64), "psk", 99)
    with pytest.raises(ValueError):
        ocdma.ber_monte_carlo(_budget(64), "qam", 100)


def test_ber_deterministic():
    a = ocdma.ber_monte_carlo(_budget(64), "ook", 300, seed=8, K=8)
    b = ocdma.ber_monte_carlo(_budget(64), "ook", 300, seed=8, K=8)
    assert a == b


def test_psk_phase_relative_to_reference():
    b = _budget(256)
    g = b.grid()
    delays = b.delays(3)
    keys = ocdma._keys(g, b.envelope(), 0, 200, "gaussian")
    factors = np.tile([1.0, -1.0, 1.0], (200, 1))
    S, _ = ocdma._statistics(keys, factors, delays, g)
    rel = np.angle(S[:, 1:] * np.conj(S[:, :1]))
    assert np.median(np.abs(np.abs(rel[:, 0]) - math.pi)) < 0.2
    assert np.median(np.abs(rel[:, 1])) < 0.2


def test_ber_model_overlay():
    assert ocdma.ber_model("psk", 32, 1) == 0.0
    assert ocdma.ber_model("psk", 32, 2) == pytest.approx(
        0.5 * math.erfc(math.sqrt(32)), rel=1e-12)
    for K in (4, 8, 16):
        assert ocdma.ber_model("psk", 32, K) < ocdma.ber_model("ook", 32, K)
    assert ocdma.ber_model("ook", 32, 16) > ocdma.ber_model("ook", 32, 8)
    with pytest.raises(ValueError):
        ocdma.ber_model("qam", 32, 4)


# --- capacity -------------------------------------------------------------------------


def test_capacity():
    assert ocdma.capacity(4000, 1, 10) == pytest.approx(200, rel=1e-15)
    assert ocdma.capacity(4000, 1, 20) == pytest.approx(100, rel=1e-15)
    with pytest.raises(ValueError):
        ocdma.capacity(4000, 0, 10)


@settings(max_examples=50)
@given(D=st.floats(1e10, 1e15), ratio=st.floats(2.5, 1e4), snr=st.floats(0.1, 100))
def test_property_spectral_efficiency(D, ratio, snr):
    assert ocdma.spectral_efficiency(D, D / ratio, snr) == pytest.approx(0.5 / snr, rel=1e-12)


# --- dispersion -----------------------------------------------------------------------


def test_odd_dispersion_invariance():
    b, key = _key(64)
    D = b.total_bandwidth
    base = response.coherent_peak(key)
    tr = ocdma.dispersion_sensitivity(key, 3, np.linspace(-50, 50, 11) / D**3)
    assert np.max(np.abs(tr.values - base)) < 1e-9 * base


def test_even_dispersion_reduces_peak():
    b, key = _key(256)
    D = b.total_bandwidth
    base = response.coherent_peak(key)
    tr = ocdma.dispersion_sensitivity(key, 2, np.array([0.0, 30.0, 100.0]) / D**2)
    assert tr.values[0] == pytest.approx(base, rel=1e-15)
    assert tr.values[0] == tr.values.max()
    assert tr.values[2] < base / 10
