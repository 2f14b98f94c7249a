"""Sum-frequency / two-photon-absorption response of shaped broadband fields."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate, optimize, signal

from ._numerics import crossing_width
from .spectral import (
    BandwidthDefinition,
    ConjugatePair,
    Envelope,
    FieldPair,
    PhaseMask,
    SpectralField,
    SpectralGrid,
    apply_mask,
    bandwidth_of,
    sample_down_converted,
    sample_incoherent,
    substream,
)


@dataclass(frozen=True)
class ResponseTrace:
    axis: np.ndarray
    values: np.ndarray
    n_realizations: int = 1
    stderr: np.ndarray | None = None
    axis_name: str = "axis"

    def __post_init__(self):
        vals = np.asarray(self.values, float)
        if np.any(vals < 0):
            raise ValueError("response values must be nonnegative")
        object.__setattr__(self, "axis", np.asarray(self.axis, float))
        object.__setattr__(self, "values", vals)
        err = np.zeros_like(vals) if self.stderr is None else np.asarray(self.stderr, float)
        object.__setattr__(self, "stderr", err)

    def columns(self) -> dict:
        n = np.full(self.values.shape, float(self.n_realizations))
        return {"axis_value": self.axis, "mean": self.values, "stderr": self.stderr, "n": n}


def _as_field(field) -> SpectralField:
    return field.combined() if isinstance(field, FieldPair) else field


def autoconvolution(field) -> tuple[np.ndarray, np.ndarray]:
    """Return (m, S_m) with S_m = (1/2) sum_{j+k -> m} A_j A_k dw.

    ``m`` indexes Omega = omega_p + m dw.  The factor 1/2 makes S count each
    unordered frequency pair once, so S_0 of a conjugate pair is exactly the
    signal power sum_{delta>0} |A_s|^2 dw.
    """
    f = _as_field(field)
    n = f.grid.n_points
    conv = signal.fftconvolve(f.amp, f.amp)
    m = np.arange(2 * n - 1) + 1 - n
    return m, 0.5 * f.grid.spacing * conv


def sfg_spectrum(field, omegas=None) -> ResponseTrace:
    """R(Omega) = |(1/2) sum A(w) A(Omega - w) dw|^2 on the lattice Omega = omega_p + m dw.

    ``omegas`` (absolute, rad/s) selects lattice points; each must lie on
    the lattice and inside twice the input support.
    """
    f = _as_field(field)
    g = f.grid
    m, s = autoconvolution(f)
    # The m = 0 bin is re-evaluated as a direct pair sum so the coherent
    # peak does not carry FFT round-off.
    s[g.n_points - 1] = np.sum(f.amp[g.positive] * f.amp[g.negative][::-1]) * g.spacing
    values = np.abs(s) ** 2
    axis = g.pump_freq + m * g.spacing
    if omegas is not None:
        om = np.atleast_1d(np.asarray(omegas, float))
        idx = np.rint((om - g.pump_freq) / g.spacing).astype(int)
        if np.any(np.abs(idx) > g.n_points - 1):
            raise ValueError("requested frequency outside twice the input support")
        off = np.abs(om - (g.pump_freq + idx * g.spacing))
        if np.any(off > 1e-6 * g.spacing):
            raise ValueError("requested frequency is not on the sum-frequency lattice")
        sel = idx + g.n_points - 1
        axis, values = axis[sel], values[sel]
    return ResponseTrace(axis, values, axis_name="omega_rad_s")


def pair_amplitude(pair: FieldPair) -> complex:
    """sum_{delta>0} A_s(delta) A_i(-delta) dw, the amplitude at Omega = omega_p."""
    return complex(np.sum(pair.signal_half * pair.idler_twins) * pair.grid.spacing)


def coherent_peak(pair: FieldPair, mask: PhaseMask | None = None) -> float:
    """|sum |A_s|^2 exp(i[phi(w) + phi(w_p - w)]) dw|^2 after applying ``mask``."""
    if mask is not None:
        pair = apply_mask(pair, mask)
    return abs(pair_amplitude(pair)) ** 2


def delay_scan(pair: FieldPair, taus) -> ResponseTrace:
    """Coherent peak with the signal delayed by tau: |sum |A_s|^2 e^{i delta tau} dw|^2."""
    g = pair.grid
    taus = np.atleast_1d(np.asarray(taus, float))
    window = math.pi / g.spacing
    if np.any(np.abs(taus) > window):
        raise ValueError(f"delays must lie within +-{window:.3e} s (grid unambiguity window)")
    d = g.detunings[g.positive]
    prod = pair.signal_half * pair.idler_twins
    amps = np.exp(1j * np.outer(taus, d)) @ prod * g.spacing
    return ResponseTrace(taus, np.abs(amps) ** 2, axis_name="delay_s")


# ---------------------------------------------------------------------------
# Pump detuning


@dataclass(frozen=True)
class LineModel:
    """Pump spectrum and final-state line, both as FWHM in rad/s.

    ``pump_shape`` is 'lorentzian' or 'gaussian'; the final-state line is
    always Lorentzian.
    """

    pump_width: float
    final_state_width: float
    pump_shape: str = "lorentzian"

    def __post_init__(self):
        if not (self.pump_width > 0 and self.final_state_width > 0):
            raise ValueError("line widths must be positive")
        if self.pump_shape not in ("lorentzian", "gaussian"):
            raise ValueError("pump_shape must be 'lorentzian' or 'gaussian'")

    def pump(self, x):
        w = self.pump_width
        if self.pump_shape == "gaussian":
            return np.exp(-4.0 * math.log(2.0) * (x / w) ** 2)
        return 1.0 / (1.0 + (2.0 * x / w) ** 2)

    def line(self, x):
        return 1.0 / (1.0 + (2.0 * x / self.final_state_width) ** 2)


def pump_detuning_scan(line: LineModel, detunings, bandwidth: float | None = None,
                       photon_number: float = math.inf) -> ResponseTrace:
    """Coherent TPA vs. pump detuning plus a flat incoherent pedestal.

    The coherent part is the numerical convolution of the pump spectrum with
    the final-state line, normalized to 1 on resonance.  With ``bandwidth``
    (rad/s) the pedestal is 1/ratio of :func:`pairwise.biphoton.coherent_incoherent_ratio`.
    """
    from .biphoton import RateModel, coherent_incoherent_ratio

    det = np.atleast_1d(np.asarray(detunings, float))
    wsum = line.pump_width + line.final_state_width
    step = min(line.pump_width, line.final_state_width) / 40.0
    n = int(math.ceil((400.0 * wsum + np.max(np.abs(det))) / step))
    u = np.arange(-n, n + 1) * step
    # both shapes are even, so the correlation is a plain convolution; it is
    # sampled on the lattice u and splined onto the requested detunings
    conv = signal.fftconvolve(line.pump(u), line.line(u), mode="same")
    coh = interpolate.CubicSpline(u, conv)(det) / conv[n]
    pedestal = 0.0
    if bandwidth is not None:
        model = RateModel(n=photon_number, bandwidth=bandwidth,
                          pump_width=line.pump_width, final_state_width=line.final_state_width)
        pedestal = 1.0 / coherent_incoherent_ratio(model)
    return ResponseTrace(det, coh + pedestal, axis_name="pump_detuning_rad_s")


def scan_width(trace: ResponseTrace, pedestal: float = 0.0) -> float:
    """FWHM of the coherent part of a detuning scan (pedestal removed)."""
    return crossing_width(trace.axis, trace.values - pedestal, 0.5)


# ---------------------------------------------------------------------------
# Coherent control


def square_wave_balance(pair: FieldPair, period: float, offset: float = 0.0) -> float:
    """Relative power imbalance (P0 - P1)/(P0 + P1) between the two square-wave phases."""
    g = pair.grid
    mask = PhaseMask.square_wave(period, 1.0, "signal", offset)
    on = mask.phase(g)[g.positive] != 0
    p = np.abs(pair.signal_half) ** 2
    p0, p1 = p[~on].sum(), p[on].sum()
    return float((p0 - p1) / (p0 + p1))


def control_transfer(pair: FieldPair, amplitudes, period: float, offset: float = 0.0,
                     tolerance: float = 0.01) -> ResponseTrace:
    """Normalized coherent peak vs. square-wave phase amplitude on the signal."""
    imbalance = square_wave_balance(pair, period, offset)
    if abs(imbalance) > tolerance:
        raise ValueError(
            f"square wave splits the signal power unequally (imbalance {imbalance:.3g})")
    base = coherent_peak(pair)
    amps = np.atleast_1d(np.asarray(amplitudes, float))
    vals = [coherent_peak(pair, PhaseMask.square_wave(period, a, "signal", offset)) / base
            for a in amps]
    return ResponseTrace(amps, vals, axis_name="mask_amplitude_rad")


# ---------------------------------------------------------------------------
# Enhancement


@dataclass(frozen=True)
class EnhancementEstimate:
    ratio: float
    ci_low: float
    ci_high: float
    analytic: float
    bandwidth: float
    n_realizations: int


def _window_sums(values: np.ndarray, center: int, width: int, count: int):
    h = width // 2
    peak = values[..., center - h:center - h + width].sum(axis=-1)
    bgs = []
    for k in range(1, count + 1):
        for sgn in (1, -1):
            lo = center - h + sgn * k * width
            bgs.append(values[..., lo:lo + width].sum(axis=-1))
    return peak, np.mean(bgs, axis=0)


def enhancement_ratio(grid: SpectralGrid, envelope: Envelope, pump_width: float,
                      n_realizations: int, seed: int, incoherent: bool = False,
                      z: float = 1.96) -> EnhancementEstimate:
    """Monte Carlo estimate of R(omega_p) / <R(Omega != omega_p)>.

    The detection window is the pump width rounded to whole bins; a pump
    narrower than one bin is a delta (one bin).  ``analytic`` is
    Delta/(2 delta) with Delta the participation bandwidth of the envelope.
    """
    if n_realizations < 100:
        raise ValueError("n_realizations must be at least 100")
    env = grid.envelope_values(envelope)
    bw = bandwidth_of(grid, env, BandwidthDefinition.EQUIVALENT)
    if bw / pump_width < 4:
        raise ValueError("bandwidth / pump width must be at least 4")
    width = max(1, int(round(pump_width / grid.spacing)))
    count = max(1, (grid.n_points // 20) // width)
    center = grid.n_points - 1
    peaks = np.empty(n_realizations)
    backs = np.empty(n_realizations)
    for r in range(n_realizations):
        s = substream(seed, r)
        f = sample_incoherent(grid, envelope, s) if incoherent else \
            sample_down_converted(grid, envelope, s).combined()
        vals = sfg_spectrum(f).values
        peaks[r], backs[r] = _window_sums(vals, center, width, count)
    a, b = peaks.mean(), backs.mean()
    ratio = a / b
    n = n_realizations
    cov = np.cov(peaks, backs)
    var = (cov[0, 0] / b**2 + a**2 * cov[1, 1] / b**4 - 2 * a * cov[0, 1] / b**3) / n
    se = math.sqrt(max(var, 0.0))
    analytic = enhancement_factor(bw, width * grid.spacing)
    return EnhancementEstimate(ratio, ratio - z * se, ratio + z * se, analytic, bw, n)


def enhancement_factor(bandwidth: float, pump_width: float) -> float:
    """G = Delta / (2 delta)."""
    return bandwidth / (2.0 * pump_width)


# ---------------------------------------------------------------------------
# Equivalent pulse


def coherent_time_response(detunings, power, times) -> np.ndarray:
    """|sum S(delta) exp(-i delta t) d delta|^2 normalized to 1 at t = 0."""
    d = np.asarray(detunings, float)
    s = np.asarray(power, float)
    t = np.atleast_1d(np.asarray(times, float))
    amp = np.exp(-1j * np.outer(t, d)) @ s
    return np.abs(amp) ** 2 / s.sum() ** 2


def equivalent_pulse_duration(detunings, power) -> float:
    """FWHM (s) of the pulse that reproduces the coherent two-photon response.

    The pair light drives the two-photon transition like a transform-limited
    pulse whose spectral amplitude follows the pair spectrum S(delta); its
    intensity is |FT S|^2, which is also the coherent response versus
    signal-idler delay.
    """
    d = np.asarray(detunings, float)
    s = np.asarray(power, float)
    if not np.sum(s) > 0:
        raise ValueError("envelope must have positive total power")
    centroid = np.sum(d * s) / np.sum(s)
    spread = math.sqrt(max(np.sum((d - centroid) ** 2 * s) / np.sum(s), 0.0))
    if spread == 0:
        raise ValueError("envelope has zero width")

    def f(t):
        return coherent_time_response(d, s, [t])[0] - 0.5

    t = 0.0
    step = 0.05 / spread
    while f(t + step) > 0:
        t += step
        if t > 1e3 / spread:
            raise ValueError("response never falls to half maximum")
    half = optimize.brentq(f, t, t + step, xtol=1e-12 * step)
    return 2.0 * half


def gaussian_band_pulse(center_wavelength: float, wavelength_width: float,
                        definition: BandwidthDefinition = BandwidthDefinition.FWHM,
                        n_points: int = 4096) -> float:
    """:func:`equivalent_pulse_duration` for a Gaussian band given in wavelength."""
    from .spectral import angular_bandwidth, gaussian_envelope

    width = angular_bandwidth(center_wavelength, wavelength_width)
    env = gaussian_envelope(width, definition)
    d = np.linspace(-4 * width, 4 * width, n_points)
    return equivalent_pulse_duration(d, env(d))
