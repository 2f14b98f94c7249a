"""Entangled-pair (low-flux) regime: rates, power laws, two-photon wave function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import loglog_slope
from .spectral import SpectralGrid

# ---------------------------------------------------------------------------
# Rates


@dataclass(frozen=True)
class BandwidthSet:
    """Bandwidths in rad/s: down-converted, up-conversion acceptance, pump, input phase matching."""

    down_converted: float
    up_conversion: float
    pump: float
    input_phase_matched: float

    def __post_init__(self):
        if min(self.down_converted, self.up_conversion, self.pump, self.input_phase_matched) <= 0:
            raise ValueError("all bandwidths must be positive")


@dataclass(frozen=True)
class RateModel:
    """Mean spectral photon number ``n`` and the widths entering the TPA ratio.

    ``bandwidth`` is the down-converted bandwidth B; ``pump_width`` and
    ``final_state_width`` are gamma_p and gamma_f (all rad/s).
    """

    n: float
    bandwidth: float = 1.0
    pump_width: float = 1.0
    final_state_width: float = 0.0

    def __post_init__(self):
        if not self.n >= 0:
            raise ValueError("photon number must be nonnegative")


def crossover_flux(down_converted: float) -> float:
    """Pair flux (photons/s) at which n = 1: the bandwidth in ordinary Hz."""
    if not down_converted > 0:
        raise ValueError("bandwidth must be positive")
    return down_converted / (2.0 * math.pi)


def sfg_rate_terms(model: RateModel, bands: BandwidthSet) -> tuple[float, float, float]:
    """(uncorrelated, coherent quadratic, entangled linear) SFG rates, shared constant."""
    dc, uc, n = bands.down_converted, bands.up_conversion, model.n
    return dc * uc * n**2, dc * dc * n**2, dc * dc * n


def correlated_ratio(model: RateModel, bands: BandwidthSet) -> float:
    """(coherent + linear) / uncorrelated = (Delta_DC / delta_UC) (n + 1) / n."""
    unc, quad, lin = sfg_rate_terms(model, bands)
    if unc == 0:
        raise ValueError("ratio undefined at n = 0")
    return (quad + lin) / unc


def coherent_incoherent_ratio(model: RateModel) -> float:
    """I_c / I_ic = [B / (gamma_p + gamma_f)] (n^2 + n) / n^2."""
    width = model.pump_width + model.final_state_width
    if not width > 0:
        raise ValueError("gamma_p + gamma_f must be positive")
    if model.n == 0:
        raise ValueError("ratio undefined at n = 0")
    base = model.bandwidth / width
    if math.isinf(model.n):
        return base
    return base * (1.0 + 1.0 / model.n)


# ---------------------------------------------------------------------------
# Power dependence


@dataclass(frozen=True)
class PowerCurve:
    mode: str
    power: np.ndarray          # IR power axis, units of n
    rate: np.ndarray           # arbitrary, shared constant
    slope: float               # global least-squares log-log slope
    local_slopes: np.ndarray   # analytic d ln R / d ln P at each point
    low_slope: float           # fit over the lowest factor-of-two of power
    high_slope: float          # fit over the highest factor-of-two of power


def local_slope(n) -> np.ndarray:
    """d ln(n + n^2) / d ln n = 1 + n / (1 + n)."""
    n = np.asarray(n, float)
    return 1.0 + n / (1.0 + n)


def power_dependence(mode: str, n0: float, factors) -> PowerCurve:
    """SFG rate versus IR power.

    ``attenuate``: both photons attenuated by ``a`` after generation, so
    R = a^2 (n0 + n0^2) against power a n0.  ``pump_scale``: n = a n0 and
    R = n + n^2.
    """
    a = np.sort(np.asarray(factors, float))
    if a.size < 2 or np.any(a <= 0) or np.any(a > 1):
        raise ValueError("need at least two factors in (0, 1]")
    if not 0 < n0 <= 0.2:
        raise ValueError("n0 must lie in (0, 0.2]")
    power = a * n0
    if mode == "attenuate":
        rate = a**2 * (n0 + n0**2)
        local = np.full_like(a, 2.0)
    elif mode == "pump_scale":
        rate = power + power**2
        local = local_slope(power)
    else:
        raise ValueError("mode must be 'attenuate' or 'pump_scale'")
    lo = power <= 2 * power[0]
    hi = power >= power[-1] / 2
    return PowerCurve(mode, power, rate, loglog_slope(power, rate), local,
                      loglog_slope(power[lo], rate[lo]), loglog_slope(power[hi], rate[hi]))


# ---------------------------------------------------------------------------
# Joint spectrum and wave function


@dataclass(frozen=True)
class JointSpectrum:
    """Pair amplitude g(delta) with signal/idler filters on a detuning grid.

    The signal is the higher-energy photon (delta > 0); its partner sits at
    -delta.  ``theta_s`` and ``theta_i`` are complex filters over the full
    grid, evaluated at delta and -delta respectively.
    """

    grid: SpectralGrid
    g: np.ndarray
    theta_s: np.ndarray | None = None
    theta_i: np.ndarray | None = None
    symmetric: bool = True
    reference_detuning: float | None = None

    def __post_init__(self):
        n = self.grid.n_points
        g = np.asarray(self.g, complex)
        if g.shape != (n,):
            raise ValueError("g must be sampled on the full grid")
        if self.symmetric and not np.allclose(g, g[::-1], rtol=1e-12, atol=0):
            raise ValueError("g must be symmetric about the degenerate frequency")
        object.__setattr__(self, "g", g)
        for name in ("theta_s", "theta_i"):
            val = getattr(self, name)
            val = np.ones(n, complex) if val is None else np.asarray(val, complex)
            if val.shape != (n,):
                raise ValueError(f"{name} must be sampled on the full grid")
            object.__setattr__(self, name, val)

    def filtered(self) -> np.ndarray:
        """g(delta) Theta_s(delta) Theta_i(-delta) on the signal half."""
        pos = self.grid.positive
        return self.g[pos] * self.theta_s[pos] * self.theta_i[self.grid.negative][::-1]

    def with_filters(self, theta_s=None, theta_i=None) -> "JointSpectrum":
        return JointSpectrum(self.grid, self.g, theta_s, theta_i, self.symmetric,
                             self.reference_detuning)

    @property
    def reference(self) -> float:
        """Frame for F: ``reference_detuning`` or the power centroid of the signal half."""
        if self.reference_detuning is not None:
            return float(self.reference_detuning)
        d = self.grid.detunings[self.grid.positive]
        w = np.abs(self.g[self.grid.positive]) ** 2
        return float(np.sum(d * w) / np.sum(w))


def gaussian_joint_spectrum(grid: SpectralGrid, full_width: float) -> JointSpectrum:
    """Symmetric Gaussian g whose power |g|^2 has ``full_width`` at 1/e."""
    d = grid.detunings
    return JointSpectrum(grid, np.exp(-0.5 * (2 * d / full_width) ** 2).astype(complex))


def phase_filter(grid: SpectralGrid, phase) -> np.ndarray:
    return np.exp(1j * np.asarray(phase, float) * np.ones(grid.n_points))


def delay_filter(grid: SpectralGrid, tau: float) -> np.ndarray:
    return np.exp(1j * grid.detunings * tau)


def step_filter(grid: SpectralGrid, position: float, amplitude: float = math.pi) -> np.ndarray:
    """Phase ``amplitude`` for detunings above ``position``."""
    return np.exp(1j * np.where(grid.detunings > position, amplitude, 0.0))


def signal_median(js: JointSpectrum) -> float:
    """Detuning splitting the signal-half amplitude |g| into equal parts."""
    d = js.grid.detunings[js.grid.positive]
    c = np.cumsum(np.abs(js.g[js.grid.positive]))
    return float(np.interp(c[-1] / 2, c, d))


@dataclass(frozen=True)
class WaveFunction:
    t_minus: np.ndarray
    F: np.ndarray
    plus_width: float   # 1/e full width of |psi| along t_+ (s)

    def envelope_plus(self, t_plus) -> np.ndarray:
        return np.exp(-((2.0 * np.asarray(t_plus, float) / self.plus_width) ** 2))

    def psi(self, t_s, t_i) -> np.ndarray:
        """Dense psi(t_s, t_i) for small grids (relative to the carrier phases)."""
        ts, ti = np.meshgrid(np.asarray(t_s, float), np.asarray(t_i, float), indexing="ij")
        fm = np.interp(ts - ti, self.t_minus, self.F.real) + 1j * np.interp(
            ts - ti, self.t_minus, self.F.imag)
        return self.envelope_plus(ts + ti) * fm

    def gauge_fixed(self) -> np.ndarray:
        """F times the constant phase that makes it as real as possible.

        psi is defined up to a global phase; choosing chi = arg(sum F^2) / 2
        maximizes sum (Re F e^{-i chi})^2, so signs of Re are meaningful.
        """
        chi = 0.5 * np.angle(np.sum(self.F**2))
        return self.F * np.exp(-1j * chi)

    def columns(self) -> dict:
        return {"t_minus_s": self.t_minus, "re_F": self.F.real, "im_F": self.F.imag}


def correlation_amplitude(js: JointSpectrum, t_minus) -> np.ndarray:
    """F(t_-) = (1/2pi) sum_{delta>0} g Theta_s Theta_i exp(-i (delta - ref) t_-) d delta."""
    g = js.grid
    d = g.detunings[g.positive] - js.reference
    t = np.atleast_1d(np.asarray(t_minus, float))
    return np.exp(-1j * np.outer(t, d)) @ js.filtered() * g.spacing / (2 * math.pi)


def two_photon_wavefunction(js: JointSpectrum, pump_width: float, t_minus) -> WaveFunction:
    """Factorized psi = exp(-delta_p^2 t_+^2 / 32) F(t_-).

    ``pump_width`` is the 1/e full width of the pump power spectrum.  The
    t_+ factor reaches 1/e at |t_+| = sqrt(32) / delta_p; its full width is
    stored as :attr:`WaveFunction.plus_width`.
    """
    t = np.atleast_1d(np.asarray(t_minus, float))
    width = 2.0 * math.sqrt(32.0) / pump_width
    return WaveFunction(t, correlation_amplitude(js, t), width)


def sfg_delay_response(js: JointSpectrum, taus) -> np.ndarray:
    """G2(tau) = |F(tau)|^2 normalized by the bound (sum |g| d delta / 2pi)^2."""
    g = js.grid
    bound = np.sum(np.abs(js.g[g.positive])) * g.spacing / (2 * math.pi)
    return np.abs(correlation_amplitude(js, taus)) ** 2 / bound**2


def mz_interference(js: JointSpectrum, taus) -> np.ndarray:
    """R(tau) / R(0) with R = |sum g (cos(w_o tau) + cos(delta tau)) d delta|^2."""
    if not np.allclose(js.g, js.g[::-1], rtol=1e-12, atol=0):
        raise ValueError("Mach-Zehnder formula needs g symmetric about the degenerate frequency")
    grid = js.grid
    t = np.atleast_1d(np.asarray(taus, float))
    wo = grid.pump_freq / 2.0
    total = js.g.sum()
    amp = np.cos(wo * t) * total + np.cos(np.outer(t, grid.detunings)) @ js.g
    return np.abs(amp) ** 2 / abs(2.0 * total) ** 2


def one_photon_interference(js: JointSpectrum, taus) -> np.ndarray:
    """Normalized IR intensity at one output: sum S (1 + cos((w_o + delta) tau)) / (2 sum S)."""
    grid = js.grid
    s = np.abs(js.g) ** 2
    t = np.atleast_1d(np.asarray(taus, float))
    phase = np.outer(t, grid.frequencies)
    return (s.sum() + np.cos(phase) @ s) / (2.0 * s.sum())


def visibility(values) -> float:
    v = np.asarray(values, float)
    return float((v.max() - v.min()) / (v.max() + v.min()))


# ---------------------------------------------------------------------------
# Coincidence condition


@dataclass(frozen=True)
class CoincidenceReport:
    ok: bool
    checks: dict = field(default_factory=dict)


def coincidence_condition(bands: BandwidthSet, entangled: bool) -> CoincidenceReport:
    """Whether SFG acts as a coincidence detector for the given bandwidths."""
    checks = {"input_accepts_band": bands.input_phase_matched >= bands.down_converted}
    if entangled:
        checks["acceptance_exceeds_pump"] = bands.up_conversion > bands.pump
    else:
        checks["acceptance_exceeds_twice_band"] = bands.up_conversion >= 2 * bands.down_converted
    # A pump wider than the acceptance window fails in every regime.
    checks["acceptance_not_below_pump"] = bands.up_conversion >= bands.pump
    return CoincidenceReport(all(checks.values()), checks)
