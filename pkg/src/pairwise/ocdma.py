"""Spread-spectrum optical CDMA with conjugate keys and delay signatures.

All channels share one down-converted key.  Channel ``c`` sends its
modulated copy of the signal half delayed by ``tau_c``; the receiver undoes
that delay and measures the sum-frequency amplitude at the pump frequency
against the undelayed idler.  Frames are quasi-static: one bit per frame and
a fresh key realization per frame.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .response import ResponseTrace, coherent_peak
from .spectral import (ConjugatePair, FieldPair, PhaseMask, SpectralField, SpectralGrid,
                       flat_envelope, make_grid, sample_down_converted)

MODULATIONS = ("ook", "psk")


@dataclass(frozen=True)
class Channel:
    id: int
    delay: float
    modulation: str = "psk"
    bits: tuple = ()

    def __post_init__(self):
        if self.modulation not in MODULATIONS:
            raise ValueError(f"modulation must be one of {MODULATIONS}")


@dataclass(frozen=True)
class LinkBudget:
    """Delta: total key bandwidth (rad/s); delta: pump / data bandwidth (rad/s)."""

    total_bandwidth: float
    pump_bandwidth: float
    snr_min: float = 10.0
    n_channels: int = 1
    pump_freq: float = 2 * math.pi * 2.9e14

    def __post_init__(self):
        if not self.total_bandwidth > 2 * self.pump_bandwidth > 0:
            raise ValueError("need Delta > 2 delta > 0")
        if self.n_channels < 1:
            raise ValueError("need at least one channel")
        n = self.total_bandwidth / self.pump_bandwidth
        if abs(n - round(n)) > 1e-9 * n or round(n) % 2:
            raise ValueError("Delta / delta must be an even integer for the simulation grid")

    @property
    def gain(self) -> float:
        """G = Delta / (2 delta)."""
        return self.total_bandwidth / (2 * self.pump_bandwidth)

    @property
    def coherence_time(self) -> float:
        return 2 / self.total_bandwidth

    @property
    def slot(self) -> float:
        """Delay lattice step 4 pi / Delta; distinct slots have zero mean leakage."""
        return 4 * math.pi / self.total_bandwidth

    def grid(self) -> SpectralGrid:
        """One mode per detection bin: dw = delta across the full band Delta."""
        n = int(round(self.total_bandwidth / self.pump_bandwidth))
        return make_grid(self.pump_freq, self.total_bandwidth / 2, n)

    def envelope(self):
        return flat_envelope(self.total_bandwidth)

    def delays(self, k: int | None = None) -> np.ndarray:
        k = self.n_channels if k is None else k
        return np.arange(k) * self.slot


def load_link_config(path) -> tuple[LinkBudget, dict]:
    """JSON with Delta, delta, K, modulation, frames, seed (extra keys pass through)."""
    d = json.loads(Path(path).read_text())
    budget = LinkBudget(float(d["Delta"]), float(d["delta"]), float(d.get("snr_min", 10.0)),
                        int(d.get("K", 1)))
    run = {"modulation": d.get("modulation", "psk"), "frames": int(d.get("frames", 1000)),
           "seed": int(d.get("seed", 0))}
    return budget, run


# ---------------------------------------------------------------------------
# Link primitives


def gen_keys(grid: SpectralGrid, seed, envelope=None) -> ConjugatePair:
    env = envelope or flat_envelope(2 * grid.half_span)
    return sample_down_converted(grid, env, seed)


def _modulation_factor(bit, modulation):
    if modulation == "ook":
        return float(bit)
    if modulation == "psk":
        return -1.0 if bit else 1.0
    raise ValueError(f"modulation must be one of {MODULATIONS}")


def encode(signal: SpectralField, bit: int, modulation: str,
           secret: PhaseMask | None = None) -> SpectralField:
    """OOK multiplies by the bit; PSK multiplies by exp(i pi bit)."""
    amp = signal.amp * _modulation_factor(bit, modulation)
    if secret is not None:
        amp = amp * np.exp(1j * secret.applied_phase(signal.grid))
    return SpectralField(signal.grid, amp, signal.envelope)


def _circular_gap(a, b, period):
    d = abs(a - b) % period
    return min(d, period - d)


def check_delays(delays, grid: SpectralGrid, coherence_time: float) -> None:
    period = 2 * math.pi / grid.spacing
    ds = list(delays)
    for i in range(len(ds)):
        for j in range(i + 1, len(ds)):
            if _circular_gap(ds[i], ds[j], period) <= coherence_time:
                raise ValueError(
                    f"delay collision: channels {i} and {j} closer than {coherence_time:.3e} s")


def mux(channels, key: ConjugatePair, bits=None, secret: PhaseMask | None = None,
        coherence_time: float | None = None) -> SpectralField:
    """Sum of delayed, encoded signal copies plus the undelayed conjugate idler.

    ``bits`` overrides each channel's first bit; ``coherence_time`` defaults
    to 2 / (full band width of the grid).
    """
    g = key.grid
    tc = coherence_time if coherence_time is not None else 2 / (2 * g.half_span)
    check_delays([c.delay for c in channels], g, tc)
    total = np.zeros(g.n_points, complex)
    for k, ch in enumerate(channels):
        b = bits[k] if bits is not None else (ch.bits[0] if ch.bits else 1)
        enc = encode(key.signal, b, ch.modulation, secret)
        total += enc.amp * np.exp(1j * g.detunings * ch.delay)
    total += key.idler.amp
    return SpectralField(g, total, None)


def apply_delay(field: SpectralField, tau: float) -> SpectralField:
    """Delay the signal half (delta > 0) of a combined field by ``tau``."""
    return SpectralField(field.grid, field.amp * np.exp(1j * PhaseMask.delay(tau).applied_phase(field.grid)),
                         field.envelope)


def decode_all(combined: SpectralField, delays, secret: PhaseMask | None = None) -> np.ndarray:
    """Decision statistics sum_{delta>0} A(delta) e^{-i delta tau_c} A(-delta) dw for every tau_c."""
    g = combined.grid
    sig = combined.amp[g.positive]
    if secret is not None:
        sig = sig * np.exp(-1j * secret.applied_phase(g)[g.positive])
    idl = combined.amp[g.negative][::-1]
    d = g.detunings[g.positive]
    taus = np.atleast_1d(np.asarray(delays, float))
    return np.exp(-1j * np.outer(taus, d)) @ (sig * idl) * g.spacing


def decode(combined: SpectralField, channel_id: int, delay: float,
           secret: PhaseMask | None = None) -> complex:
    return complex(decode_all(combined, [delay], secret)[0])


# ---------------------------------------------------------------------------
# Monte Carlo


def _keys(grid, envelope, seed, frames, key_kind):
    """Signal halves, one row per frame; frame f uses substream (seed, f)."""
    m = grid.n_points // 2
    env = grid.envelope_values(envelope)[grid.positive]
    var = env * grid.spacing
    out = np.empty((frames, m), complex)
    for f in range(frames):
        rng = np.random.default_rng((seed, f))
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        if key_kind == "unit":
            z = np.exp(1j * np.angle(z)) * math.sqrt(2)
        elif key_kind != "gaussian":
            raise ValueError("key must be 'gaussian' or 'unit'")
        out[f] = z * np.sqrt(var / 2)
    return out


def _statistics(keys, factors, delays, grid):
    """S[f, c] for frames f, channels c; factors[f, c] is the modulation factor.

    With a shared key s, idler conj(s) and signal sum_c' b_c' s e^{i d tau_c'},
    S_c = sum_c' b_c' sum_d |s|^2 e^{i d (tau_c' - tau_c)} dw.
    """
    d = grid.detunings[grid.positive]
    p = np.abs(keys) ** 2                                        # (F, m)
    dt = np.subtract.outer(delays, delays)                       # (c', c)
    kern = np.exp(1j * d[None, None, :] * dt[:, :, None])        # (c', c, m)
    cross = np.einsum("fm,abm->fab", p, kern) * grid.spacing     # (F, c', c)
    return np.einsum("fa,fab->fb", factors, cross), cross


@dataclass(frozen=True)
class SirEstimate:
    K: int
    sir: float
    predicted: float
    frames: int


def sir_monte_carlo(budget: LinkBudget, n_frames: int = 300, seed: int = 0,
                    K: int | None = None) -> SirEstimate:
    """mean |S_self|^2 / mean |S - S_self|^2 with every channel transmitting."""
    K = budget.n_channels if K is None else K
    if K < 2:
        raise ValueError("SIR needs at least two channels")
    g = budget.grid()
    delays = budget.delays(K)
    check_delays(delays, g, budget.coherence_time)
    keys = _keys(g, budget.envelope(), seed, n_frames, "gaussian")
    S, cross = _statistics(keys, np.ones((n_frames, K)), delays, g)
    self_ = np.einsum("faa->fa", cross)
    sir = np.mean(np.abs(self_) ** 2) / np.mean(np.abs(S - self_) ** 2)
    return SirEstimate(K, float(sir), budget.gain / (K - 1), n_frames)


@dataclass(frozen=True)
class BerResult:
    K: int
    modulation: str
    ber: float
    ci_low: float
    ci_high: float
    frames: int
    errors: int
    bits: int

    def row(self) -> dict:
        return {"K": self.K, "ber": self.ber, "ci_low": self.ci_low,
                "ci_high": self.ci_high, "frames": self.frames}


def matched_second_moment(budget: LinkBudget) -> float:
    """E|S_self|^2 for a Gaussian key: (sum v)^2 + sum v^2, times dw^2."""
    g = budget.grid()
    v = g.envelope_values(budget.envelope())[g.positive] * g.spacing
    return float((v.sum() ** 2 + (v * v).sum()) * g.spacing**2)


def ber_monte_carlo(budget: LinkBudget, modulation: str, n_frames: int = 1000,
                    seed: int = 0, K: int | None = None, key: str = "gaussian",
                    z: float | None = None) -> BerResult:
    """Bit error rate with a Wilson 95% interval.

    OOK decides bit 1 when |S|^2 exceeds half the matched mean |S|^2.  PSK
    with K >= 2 reserves channel 0 as an unmodulated reference and decides
    bit 1 when Re(S_c conj(S_ref)) < 0; with K = 1 the pump phase is the
    reference.  Equal ``seed`` gives equal keys and bits for either format.
    """
    if modulation not in MODULATIONS:
        raise ValueError(f"modulation must be one of {MODULATIONS}")
    if n_frames < 100:
        raise ValueError("need at least 100 frames")
    K = budget.n_channels if K is None else K
    g = budget.grid()
    delays = budget.delays(K)
    check_delays(delays, g, budget.coherence_time)
    keys = _keys(g, budget.envelope(), seed, n_frames, key)
    bits = np.random.default_rng((seed, n_frames, 7)).integers(0, 2, size=(n_frames, K))
    if modulation == "psk" and K >= 2:
        bits[:, 0] = 0
        data = slice(1, K)
    else:
        data = slice(0, K)
    if modulation == "ook":
        factors = bits.astype(float)
    else:
        factors = np.where(bits == 1, -1.0, 1.0)
    S, _ = _statistics(keys, factors, delays, g)
    if modulation == "ook":
        thr = 0.5 * (matched_second_moment(budget) if key == "gaussian"
                     else float(np.mean(np.abs(np.sum(np.abs(keys) ** 2, axis=1) * g.spacing) ** 2)))
        decided = (np.abs(S) ** 2 > thr).astype(int)
    else:
        ref = S[:, :1] if K >= 2 else np.ones((n_frames, 1))
        decided = (np.real(S * np.conj(ref)) < 0).astype(int)
    err = int(np.sum(decided[:, data] != bits[:, data]))
    total = int(bits[:, data].size)
    ci = stats.binomtest(err, total).proportion_ci(confidence_level=0.95, method="wilson")
    return BerResult(K, modulation, err / total, float(ci.low), float(ci.high),
                     n_frames, err, total)


# ---------------------------------------------------------------------------
# Closed-form overlays (labelled "model")


def ber_model(modulation: str, gain: float, K: int) -> float:
    """White-interference estimates; not fits to the Monte Carlo.

    PSK: Q(sqrt(2 SIR)), SIR = G / (K - 1).
    OOK: about (K - 1) / 2 interferers are on, SIR = 2 G / (K - 1); with the
    threshold at half the signal power, errors are
    (1/2)[exp(-SIR/2) + P(ncx2(2, 2 SIR) < SIR)].
    """
    if K < 2:
        return 0.0
    if modulation == "psk":
        sir = gain / (K - 1)
        return float(stats.norm.sf(math.sqrt(2 * sir)))
    if modulation == "ook":
        sir = 2 * gain / (K - 1)
        return float(0.5 * (math.exp(-sir / 2) + stats.ncx2.cdf(sir, 2, 2 * sir)))
    raise ValueError(f"modulation must be one of {MODULATIONS}")


def capacity(total_bandwidth: float, pump_bandwidth: float, snr: float) -> float:
    """N = (1/2) (1 / (s/n)) (Delta / delta)."""
    if min(total_bandwidth, pump_bandwidth, snr) <= 0:
        raise ValueError("inputs must be positive")
    return 0.5 / snr * total_bandwidth / pump_bandwidth


def spectral_efficiency(total_bandwidth: float, pump_bandwidth: float, snr: float) -> float:
    return capacity(total_bandwidth, pump_bandwidth, snr) * pump_bandwidth / total_bandwidth


def dispersion_sensitivity(pair: FieldPair, order: int, coefficients) -> ResponseTrace:
    """Coherent peak versus the coefficient of a delta^order phase on the whole band."""
    cs = np.asarray(coefficients, float)
    vals = np.array([coherent_peak(pair, PhaseMask.dispersion(order, c, "both")) for c in cs])
    return ResponseTrace(cs, vals, axis_name=f"order{order}_coefficient")


def secret_mask(grid: SpectralGrid, seed) -> PhaseMask:
    """Random tabulated phase on the signal half, shared only by sender and receiver."""
    phi = np.random.default_rng(seed).uniform(0, 2 * math.pi, grid.n_points)
    return PhaseMask.tabulated(np.where(grid.detunings > 0, phi, 0.0), target="signal")
