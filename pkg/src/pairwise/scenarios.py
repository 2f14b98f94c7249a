"""Registry of reproducible experiments run by the command line.

Each scenario takes a dict of typed parameters plus a seed and returns
data tables (name -> columns) and a small JSON-able summary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import constants

from . import biphoton, crystal, litho, ocdma, opo, response, spectral, twm

C = constants.c


@dataclass(frozen=True)
class Result:
    tables: dict
    summary: dict


@dataclass(frozen=True)
class Scenario:
    name: str
    module: str
    description: str
    defaults: dict
    run: Callable[[dict, int], Result]


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text) -> list[int]:
    return [int(round(v)) for v in _floats(text)]


def _band_grid(center_nm, width_nm, n, span=3.0):
    width = spectral.angular_bandwidth(center_nm * 1e-9, width_nm * 1e-9)
    pump = 2 * 2 * math.pi * C / (center_nm * 1e-9)
    return spectral.make_grid(pump, span * width, n), width


# ---------------------------------------------------------------------------


def _tpa_delay_scan(p, seed):
    # each beam carries the full band; the signal band sits signal_offset
    # FWHMs above degeneracy and the idler mirrors it
    g, width = _band_grid(p["center_nm"], p["bandwidth_nm"], p["n_points"],
                          span=p["signal_offset"] + 2.5)
    env = spectral.gaussian_envelope(width, spectral.BandwidthDefinition.FWHM,
                                     center=p["signal_offset"] * width)
    pair = spectral.sample_down_converted(g, env, seed)
    mean = spectral.mean_pair(g, env)
    window = min(p["max_delay_fs"] * 1e-15, math.pi / g.spacing)
    taus = np.linspace(-window, window, p["n_delays"])
    sampled = response.delay_scan(pair, taus)
    ideal = response.delay_scan(mean, taus)
    peak = response.coherent_peak(pair)
    d = g.detunings
    fwhm = response.equivalent_pulse_duration(d, env(d))
    return Result(
        {"delay_scan": {"delay_s": taus, "sampled": sampled.values / peak,
                        "mean_envelope": ideal.values / ideal.values.max()}},
        {"equivalent_pulse_fwhm_fs": fwhm * 1e15})


def _tpa_pump_scan(p, seed):
    line = response.LineModel(p["pump_width_nm"], p["final_width_nm"], p["pump_shape"])
    det = np.linspace(-p["range_nm"], p["range_nm"], p["n_points"])
    trace = response.pump_detuning_scan(line, det)
    return Result({"pump_scan": {"pump_detuning_nm": det, "response": trace.values}},
                  {"combined_width_nm": response.scan_width(trace),
                   "pump_shape": p["pump_shape"]})


def _coherent_control(p, seed):
    g, width = _band_grid(p["center_nm"], p["bandwidth_nm"], p["n_points"], span=0.6)
    env = spectral.flat_envelope(2 * g.half_span)
    phases = np.random.default_rng(seed).uniform(0, 2 * math.pi, g.n_points // 2)
    pair = spectral.mean_pair(g, env, phases)
    period = 2 * g.half_span / p["periods"]
    amps = np.linspace(0, p["max_amplitude_pi"] * math.pi, p["n_amplitudes"])
    trace = response.control_transfer(pair, amps, period)
    model = np.cos(amps / 2) ** 2
    return Result({"transfer": {"amplitude_rad": amps, "peak": trace.values, "cos2_half": model}},
                  {"max_deviation_from_cos2": float(np.max(np.abs(trace.values - model)))})


def _ocdma_ber(p, seed):
    ratio = p["delta_ratio"]
    budget = ocdma.LinkBudget(ratio * 1e12, 1e12)
    ks = _ints(p["channels"])
    tables, summary = {}, {"gain": budget.gain}
    for mod in ("psk", "ook"):
        rows = [ocdma.ber_monte_carlo(budget, mod, p["frames"], seed, K=k).row() for k in ks]
        tables[f"ber_{mod}"] = {key: np.array([r[key] for r in rows], float) for key in rows[0]}
    tables["ber_model"] = {"K": np.array(ks, float),
                           "psk_model": np.array([ocdma.ber_model("psk", budget.gain, k) for k in ks]),
                           "ook_model": np.array([ocdma.ber_model("ook", budget.gain, k) for k in ks])}
    sk = [k for k in ks if k >= 2]
    if sk:
        est = [ocdma.sir_monte_carlo(budget, p["sir_frames"], seed, K=k) for k in sk]
        tables["sir"] = {"K": np.array(sk, float), "sir": np.array([e.sir for e in est]),
                         "predicted": np.array([e.predicted for e in est])}
    summary["capacity_4000_snr10"] = ocdma.capacity(4000, 1, 10)
    return Result(tables, summary)


def _ocdma_dispersion(p, seed):
    ratio = p["delta_ratio"]
    budget = ocdma.LinkBudget(ratio * 1e12, 1e12)
    g = budget.grid()
    pair = ocdma.gen_keys(g, seed)
    D = budget.total_bandwidth
    units = np.linspace(0, p["max_coefficient"], p["n_points"])
    cols = {"coefficient_delta_units": units}
    summary = {}
    base = response.coherent_peak(pair)
    for k in _ints(p["orders"]):
        tr = ocdma.dispersion_sensitivity(pair, k, units / D**k)
        cols[f"peak_order{k}"] = tr.values / base
        summary[f"order{k}_min_relative_peak"] = float(tr.values.min() / base)
    return Result({"dispersion": cols}, summary)


def _opo_efficiency(p, seed):
    N = np.linspace(1, p["n_max"], p["n_points"])
    table = opo.efficiency_curve(N, seed=seed)
    return Result({"efficiency": table.columns()},
                  {"eta_narrow_N4": opo.efficiency(4, 1.0), "eta_ideal_N4": opo.efficiency(4, 0.0),
                   "r_practical": table.r_practical, "practical_label": "qualitative"})


def _opo_spectrum(p, seed):
    gammas = _floats(p["gammas"])
    res = opo.optimize_spectrum(gammas, p["pairs"], p["band"], seed=seed, starts=p["starts"])
    return Result({"spectrum": res.spectrum.columns(),
                   "history": {"start": np.arange(len(res.history), dtype=float),
                               "best_tax": np.array(res.history)}},
                  {"tax": res.tax, "lines": int(res.spectrum.detunings.size)})


def _twm_phase_lock(p, seed):
    th = p["seed_phase"]
    s0 = twm.TwmState(p["seed_amplitude"], p["seed_amplitude"] * np.exp(1j * th), 1.0)
    tr = twm.integrate_twm(s0, p["kappa"], p["z_span"], points=p["n_points"])
    ph = twm.phase_sum(tr)
    gain = np.abs(tr.A_s) / abs(s0.A_s)
    d = twm.conserved_drift(tr)
    return Result({"trajectory": tr.columns(),
                   "phase": {"z_m": tr.z, "delta_theta_rad": ph.filled(np.nan), "gain": gain}},
                  {"final_delta_theta_minus_half_pi": float(ph[-1] - math.pi / 2),
                   "gain_efoldings": float(math.log(gain[-1])),
                   "drift_c1": d.c1, "drift_signal_idler": d.signal_idler,
                   "drift_signal_pump": d.signal_pump})


def _phasematch_threshold(p, seed):
    xtal, lam_p = crystal.load_configuration(p["crystal"])
    lo, hi = crystal.pm_band(xtal, lam_p, p["criterion"])
    lam = np.linspace(lo, hi, p["n_points"])
    curve = crystal.threshold_curve(xtal, lam_p, lam)
    mm = crystal.mismatch_curve(xtal, lam_p, lam)
    band = crystal.flat_band(curve, p["flat_ratio"])
    return Result({"threshold": curve.columns(), "mismatch": mm.columns()},
                  {"pump_m": lam_p, "pm_bandwidth_m": hi - lo,
                   "flatness_over_band": curve.flatness(),
                   "flat_band_m": band[1] - band[0], "provenance": xtal.provenance})


def _litho_spot(p, seed):
    lens = litho.Lens(p["wavelength_nm"] * 1e-9, p["focal_mm"] * 1e-3, p["diameter_mm"] * 1e-3)
    xf = lens.grid(p["half_width_spots"], p["points_per_spot"])
    N = p["N"]
    one = litho.two_segment_spot(1, 0.0, lens, xf)
    bright = litho.two_segment_spot(N, p["phase"], lens, xf)
    dark = litho.two_segment_spot(N, p["phase"] + math.pi, lens, xf)
    supp = litho.suppress_sidelobes(N, lens, xf)
    m1, mb = litho.spot_metrics(one), litho.spot_metrics(bright)
    return Result({"pattern": {"x_m": xf, "one_photon": one.intensity, "bright": bright.intensity,
                               "dark": dark.intensity, "suppressed": supp.suppressed.intensity}},
                  {"fwhm_ratio": mb.fwhm / m1.fwhm, "sidelobe_before": supp.ratio_before,
                   "sidelobe_after": supp.ratio_after, "third_pulse_amplitude": supp.amplitude,
                   "third_pulse_phase": supp.phase})


def _biphoton_power(p, seed):
    f = np.geomspace(p["n_min"] / p["n_max"], 1.0, p["n_points"])
    att = biphoton.power_dependence("attenuate", p["n_max"], f)
    pump = biphoton.power_dependence("pump_scale", p["n_max"], f)
    bw = spectral.angular_bandwidth(p["center_nm"] * 1e-9, p["bandwidth_nm"] * 1e-9)
    return Result({"power": {"n": pump.power, "rate_pump_scale": pump.rate,
                             "rate_attenuate": att.rate, "local_slope": pump.local_slopes}},
                  {"attenuation_slope": att.slope, "pump_low_slope": pump.low_slope,
                   "pump_high_slope": pump.high_slope, "crossover_flux_per_s": biphoton.crossover_flux(bw)})


def _biphoton_js(p):
    g, width = _band_grid(p["center_nm"], p["bandwidth_nm"], p["n_points"], span=p["span"])
    return biphoton.gaussian_joint_spectrum(g, width)


def _biphoton_mz(p, seed):
    js = _biphoton_js(p)
    tau0 = p["delay_fs"] * 1e-15
    lam_p = 2 * math.pi * C / js.grid.pump_freq
    taus = tau0 + np.linspace(-1.5, 1.5, p["n_delays"]) * lam_p / C
    r2 = biphoton.mz_interference(js, taus)
    r1 = biphoton.one_photon_interference(js, taus)
    return Result({"mz": {"delay_s": taus, "two_photon": r2, "one_photon": r1}},
                  {"two_photon_visibility": biphoton.visibility(r2),
                   "one_photon_visibility": biphoton.visibility(r1)})


def _biphoton_shape(p, seed):
    js = _biphoton_js(p)
    g = js.grid
    t = np.linspace(-p["window_fs"], p["window_fs"], p["n_times"]) * 1e-15
    step = js.with_filters(theta_s=biphoton.step_filter(g, biphoton.signal_median(js)))
    delayed = js.with_filters(theta_s=biphoton.delay_filter(g, p["delay_fs"] * 1e-15))
    pw = spectral.angular_bandwidth(p["center_nm"] * 1e-9 / 2, p["pump_width_nm"] * 1e-9)
    wf = biphoton.two_photon_wavefunction(step, pw, t)
    fixed = wf.gauge_fixed()
    g2 = np.abs(biphoton.correlation_amplitude(delayed, t)) ** 2
    return Result({"wavefunction": {"t_minus_s": t, "re_F": fixed.real, "im_F": fixed.imag},
                   "delayed_g2": {"t_minus_s": t, "g2": g2}},
                  {"g2_peak_fs": float(t[np.argmax(g2)] * 1e15)})


_BIPHOTON_BAND = {"center_nm": 1064.0, "bandwidth_nm": 31.0, "n_points": 1024, "span": 2.5}

REGISTRY: dict[str, Scenario] = {s.name: s for s in [
    Scenario("tpa-delay-scan", "response", "coherent two-photon response vs signal delay",
             {"center_nm": 1033.0, "bandwidth_nm": 100.0, "signal_offset": 1.5,
              "n_points": 2048, "n_delays": 401, "max_delay_fs": 200.0}, _tpa_delay_scan),
    Scenario("tpa-pump-scan", "response", "two-photon absorption vs pump detuning",
             {"pump_width_nm": 0.04, "final_width_nm": 0.08, "pump_shape": "lorentzian",
              "range_nm": 0.5, "n_points": 2001}, _tpa_pump_scan),
    Scenario("coherent-control", "response", "square-wave phase mask transfer curve",
             {"center_nm": 1064.0, "bandwidth_nm": 60.0, "n_points": 512, "periods": 16,
              "max_amplitude_pi": 6.0, "n_amplitudes": 121}, _coherent_control),
    Scenario("ocdma-ber", "ocdma", "PSK and OOK bit error rate vs channel count",
             {"delta_ratio": 64, "channels": "1,2,4,8,16", "frames": 1000, "sir_frames": 300},
             _ocdma_ber),
    Scenario("ocdma-dispersion", "ocdma", "coherent peak vs even and odd dispersion",
             {"delta_ratio": 64, "orders": "2,3", "max_coefficient": 30.0, "n_points": 61},
             _ocdma_dispersion),
    Scenario("opo-efficiency", "opo", "conversion efficiency vs pump ratio",
             {"n_max": 16.0, "n_points": 151}, _opo_efficiency),
    Scenario("opo-spectrum", "opo", "two-photon-tax minimizing line spectrum",
             {"gammas": "1,2", "pairs": 4, "band": 3.6, "starts": 8}, _opo_spectrum),
    Scenario("twm-phase-lock", "twm", "three-wave mixing from tiny seeds; phase locking",
             {"seed_amplitude": 1e-8, "seed_phase": 0.7, "kappa": 1.0, "z_span": 10.0,
              "n_points": 2001}, _twm_phase_lock),
    Scenario("phasematch-threshold", "crystal", "phase mismatch and threshold vs signal wavelength",
             {"crystal": "bbo_eimerl1987", "criterion": "first_zero", "n_points": 2001,
              "flat_ratio": 1.15}, _phasematch_threshold),
    Scenario("litho-spot", "litho", "N-photon two-segment focal spots and side-lobe suppression",
             {"wavelength_nm": 800.0, "focal_mm": 100.0, "diameter_mm": 10.0, "N": 2,
              "phase": 0.0, "half_width_spots": 4.0, "points_per_spot": 100}, _litho_spot),
    Scenario("biphoton-power", "biphoton", "sum-frequency rate vs IR power at low flux",
             {"n_min": 0.002, "n_max": 0.185, "n_points": 60, "center_nm": 1064.0,
              "bandwidth_nm": 31.0}, _biphoton_power),
    Scenario("biphoton-mz", "biphoton", "two-photon vs one-photon Mach-Zehnder fringes",
             dict(_BIPHOTON_BAND, delay_fs=550.0, n_delays=301), _biphoton_mz),
    Scenario("biphoton-shape", "biphoton", "shaped two-photon wave function",
             dict(_BIPHOTON_BAND, window_fs=600.0, n_times=1201, delay_fs=200.0,
                  pump_width_nm=0.01), _biphoton_shape),
]}


def names() -> list[str]:
    return sorted(REGISTRY)


def resolve(name: str, overrides: dict) -> dict:
    """Defaults updated by string overrides, each parsed to its default's type."""
    sc = REGISTRY[name]
    out = dict(sc.defaults)
    for key, raw in overrides.items():
        if key not in out:
            raise ValueError(f"unknown parameter {key!r} for {name}")
        out[key] = _coerce(out[key], raw, key)
    return out


def _coerce(default, raw, key):
    if not isinstance(raw, str):
        return raw
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError
            return low in ("true", "1", "yes")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise ValueError(f"parameter {key!r} expects {type(default).__name__}, got {raw!r}") from None
    return raw
