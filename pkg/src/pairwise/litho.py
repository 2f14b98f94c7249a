"""1-D paraxial focusing and N-photon interference of non-overlapping pulses.

The focal field of a lens-plane amplitude A(x) is taken as
E(x_f) = int A(x) exp(-i 2 pi x x_f / (lambda f)) dx; constant prefactors
drop out of every ratio used here.  A pulse k contributes E_k^N to the
N-photon amplitude; different pulses never mix within one N-photon event,
so I = |sum_k exp(i phi_k) E_k^N|^2.  The quantum phase of a pulse delayed
by tau is phi = omega_A tau.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import crossing_width, local_maxima, refine_peak


@dataclass(frozen=True)
class Lens:
    wavelength: float
    focal_length: float
    diameter: float

    def __post_init__(self):
        if min(self.wavelength, self.focal_length, self.diameter) <= 0:
            raise ValueError("lens parameters must be positive")

    @property
    def spot(self) -> float:
        """lambda f / D, the first-zero half-width of the full-aperture spot."""
        return self.wavelength * self.focal_length / self.diameter

    def grid(self, half_width: float = 4.0, points_per_spot: int = 200) -> np.ndarray:
        """Symmetric focal grid in units of ``spot``; includes x_f = 0."""
        n = int(round(half_width * points_per_spot))
        return np.arange(-n, n + 1) * (self.spot / points_per_spot)


@dataclass(frozen=True)
class Segment:
    """Uniform strip [start, stop] with a linear phase that shifts its focus by ``focal_shift``."""

    start: float
    stop: float
    amplitude: complex = 1.0
    pulse: int = 0
    focal_shift: float = 0.0

    def __post_init__(self):
        if not self.stop > self.start:
            raise ValueError("segment needs stop > start")

    def field(self, lens: Lens, xf: np.ndarray) -> np.ndarray:
        q = 2 * math.pi * (xf - self.focal_shift) / (lens.wavelength * lens.focal_length)
        w = self.stop - self.start
        mid = 0.5 * (self.start + self.stop)
        return self.amplitude * w * np.exp(-1j * q * mid) * np.sinc(q * w / (2 * math.pi))


@dataclass(frozen=True)
class TabulatedSegment:
    """Arbitrary amplitude profile sampled at ``x`` (trapezoid quadrature)."""

    x: np.ndarray
    values: np.ndarray
    pulse: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, float)
        v = np.asarray(self.values, complex)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2 or np.any(np.diff(x) <= 0):
            raise ValueError("tabulated segment needs increasing x and matching values")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "values", v)

    @property
    def start(self):
        return float(self.x[0])

    @property
    def stop(self):
        return float(self.x[-1])

    def field(self, lens: Lens, xf: np.ndarray) -> np.ndarray:
        dx = np.diff(self.x)
        w = np.zeros(self.x.size)
        w[:-1] += dx / 2
        w[1:] += dx / 2
        k = 2 * math.pi / (lens.wavelength * lens.focal_length)
        out = np.empty(xf.size, complex)
        for lo in range(0, xf.size, 512):
            blk = xf[lo:lo + 512]
            out[lo:lo + 512] = np.exp(-1j * k * np.outer(blk, self.x)) @ (w * self.values)
        return out


@dataclass(frozen=True)
class Aperture:
    lens: Lens
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        half = self.lens.diameter / 2 * (1 + 1e-12)
        for s in self.segments:
            if s.start < -half or s.stop > half:
                raise ValueError("segment extends beyond the lens diameter")
        for p in self.pulses:
            segs = sorted((s for s in self.segments if s.pulse == p), key=lambda s: s.start)
            for a, b in zip(segs, segs[1:]):
                if b.start < a.stop:
                    raise ValueError(f"segments of pulse {p} overlap")

    @property
    def pulses(self) -> list[int]:
        return sorted({s.pulse for s in self.segments})


def check_sampling(lens: Lens, xf: np.ndarray) -> None:
    xf = np.asarray(xf, float)
    if xf.size < 2:
        raise ValueError("focal grid needs at least two points")
    if np.max(np.diff(xf)) > lens.spot / 8 * (1 + 1e-9):
        raise ValueError("focal grid undersamples lambda f / D (need >= 8 points per spot)")


def focal_field(aperture: Aperture, xf, pulse: int | None = None) -> np.ndarray:
    xf = np.asarray(xf, float)
    check_sampling(aperture.lens, xf)
    out = np.zeros(xf.size, complex)
    for s in aperture.segments:
        if pulse is None or s.pulse == pulse:
            out += s.field(aperture.lens, xf)
    return out


@dataclass(frozen=True)
class PulseTrain:
    aperture: Aperture
    phases: dict = field(default_factory=dict)    # pulse index -> quantum phase (rad)
    N: int = 1
    omega_A: float | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("photon order N must be an integer >= 1")


def phase_from_delay(omega_A: float, tau: float) -> float:
    return omega_A * tau


@dataclass(frozen=True)
class Pattern:
    x: np.ndarray
    intensity: np.ndarray

    def columns(self) -> dict:
        return {"x_m": self.x, "intensity": self.intensity}


def _pulse_fields(train: PulseTrain, xf) -> dict:
    return {p: focal_field(train.aperture, xf, p) for p in train.aperture.pulses}


def n_photon_pattern(train: PulseTrain, xf) -> Pattern:
    """I(x) = |sum_k exp(i phi_k) E_k(x)^N|^2."""
    xf = np.asarray(xf, float)
    amp = np.zeros(xf.size, complex)
    for p, e in _pulse_fields(train, xf).items():
        amp += np.exp(1j * train.phases.get(p, 0.0)) * e ** train.N
    return Pattern(xf, np.abs(amp) ** 2)


def incoherent_spot(lens: Lens, N: int, xf) -> Pattern:
    """Single full-aperture pulse; its N-photon response is |E|^(2N)."""
    ap = Aperture(lens, (Segment(-lens.diameter / 2, lens.diameter / 2),))
    return n_photon_pattern(PulseTrain(ap, {}, N), xf)


def two_segment_aperture(lens: Lens, geometry: str = "half", width: float = 0.005) -> Aperture:
    """Two pulses: left and right strips.

    ``half``: the two half apertures.  ``narrow``: strips of ``width * D`` at
    the aperture edges, whose envelope is broad enough that fringe positions
    follow the two-point law.
    """
    r = lens.diameter / 2
    if geometry == "half":
        segs = (Segment(-r, 0.0, pulse=0), Segment(0.0, r, pulse=1))
    elif geometry == "narrow":
        w = width * lens.diameter
        segs = (Segment(-r, -r + w, pulse=0), Segment(r - w, r, pulse=1))
    else:
        raise ValueError("geometry must be 'half' or 'narrow'")
    return Aperture(lens, segs)


def two_segment_spot(N: int, phi: float, lens: Lens, xf=None, geometry: str = "half",
                     width: float = 0.005) -> Pattern:
    """phi = 0 gives the bright spot, phi = pi the dark one."""
    xf = lens.grid() if xf is None else xf
    ap = two_segment_aperture(lens, geometry, width)
    return n_photon_pattern(PulseTrain(ap, {1: phi}, N), xf)


def four_segment_spot(N: int, phi: float, lens: Lens, xf=None) -> Pattern:
    """Four quarters, each its own pulse; quarter k is delayed by k steps (phase k phi)."""
    xf = lens.grid() if xf is None else xf
    r = lens.diameter / 2
    edges = np.linspace(-r, r, 5)
    segs = tuple(Segment(edges[k], edges[k + 1], pulse=k) for k in range(4))
    phases = {k: k * phi for k in range(4)}
    return n_photon_pattern(PulseTrain(Aperture(lens, segs), phases, N), xf)


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class SpotMetrics:
    fwhm: float
    lobe_spacing: float
    sidelobe_ratio: float


def spot_metrics(pattern: Pattern) -> SpotMetrics:
    x, y = pattern.x, pattern.intensity
    if not np.ptp(y) > 0:
        raise ValueError("flat pattern")
    i0 = int(np.argmax(y))
    if i0 in (0, y.size - 1):
        raise ValueError("global maximum lies on the grid edge")
    fwhm = crossing_width(x, y, 0.5)
    peaks = local_maxima(y)
    # symmetric patterns: rank on rounded heights, break ties by position
    order = sorted(peaks, key=lambda i: (-round(y[i] / y[i0], 9), x[i]))
    if len(order) >= 2:
        a, b = (refine_peak(x, y, i)[0] for i in order[:2])
        spacing = abs(b - a)
    else:
        spacing = float("nan")
    main = y[i0]
    others = [y[i] for i in peaks if i != i0 and not np.isclose(y[i], main, rtol=1e-9, atol=0.0)]
    side = max(others) / main if others else 0.0
    return SpotMetrics(float(fwhm), float(spacing), float(side))


# ---------------------------------------------------------------------------
# Side-lobe suppression


def two_foci_pulse(lens: Lens, offset: float, amplitude: float, pulse: int,
                   samples: int = 4001) -> TabulatedSegment:
    """Full-aperture pulse focused at +-offset: profile 2 a cos(2 pi x offset / (lambda f))."""
    r = lens.diameter / 2
    x = np.linspace(-r, r, samples)
    k = 2 * math.pi * offset / (lens.wavelength * lens.focal_length)
    return TabulatedSegment(x, 2 * amplitude * np.cos(k * x), pulse)


@dataclass(frozen=True)
class SuppressionResult:
    baseline: Pattern
    suppressed: Pattern
    amplitude: float
    phase: float
    ratio_before: float
    ratio_after: float

    @property
    def improvement(self) -> float:
        return self.ratio_before / self.ratio_after


def suppress_sidelobes(N: int, lens: Lens, xf=None, offset: float | None = None,
                       amplitudes=None, phases=None) -> SuppressionResult:
    """Grid search over amplitude and phase of a third, two-focus pulse.

    The third pulse's foci sit at +-``offset`` (default lambda f / D), where
    its own field vanishes at the centre, so the main peak is untouched.
    """
    xf = lens.grid() if xf is None else np.asarray(xf, float)
    offset = lens.spot if offset is None else offset
    base_ap = two_segment_aperture(lens, "half")
    base_fields = _pulse_fields(PulseTrain(base_ap, {}, N), xf)
    base_amp = sum(e ** N for e in base_fields.values())
    baseline = Pattern(xf, np.abs(base_amp) ** 2)
    before = spot_metrics(baseline).sidelobe_ratio
    unit = two_foci_pulse(lens, offset, 1.0, 2).field(lens, xf) ** N
    amplitudes = np.linspace(0.0, 1.0, 41) if amplitudes is None else np.asarray(amplitudes)
    phases = np.linspace(0.0, 2 * math.pi, 72, endpoint=False) if phases is None else np.asarray(phases)
    best = (before, 0.0, 0.0, baseline)
    for a, ph in itertools.product(amplitudes, phases):
        inten = np.abs(base_amp + a**N * np.exp(1j * ph) * unit) ** 2
        pat = Pattern(xf, inten)
        try:
            r = spot_metrics(pat).sidelobe_ratio
        except ValueError:
            continue
        if abs(inten[np.argmin(np.abs(xf))] - baseline.intensity[np.argmin(np.abs(xf))]) > \
                1e-6 * baseline.intensity.max():
            continue
        if r < best[0]:
            best = (r, float(a), float(ph), pat)
    return SuppressionResult(baseline, best[3], best[1], best[2], before, best[0])
