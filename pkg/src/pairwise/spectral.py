"""Discretized spectra with signal/idler conjugate symmetry.

Frequencies are stored as detunings ``delta`` from the degenerate frequency
``pump_freq / 2``.  The grid is cell-centred, ``delta_j = (j + 1/2 - n/2) * dw``,
so every mode has an exact partner at ``-delta_j`` with index ``n - 1 - j``;
negation of a float is exact, hence the twin relation carries no rounding.

Time-domain convention (public contract)::

    A(t) = (1 / 2 pi) * sum_j A_j exp(-i delta_j t) dw

evaluated on ``t_k = (k - n/2) * dt`` with ``dt = 2 pi / (n dw)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np
from scipy import constants

from ._numerics import crossing_width

Envelope = Callable[[np.ndarray], np.ndarray]
Seed = Union[int, Sequence[int], None]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr)
    arr.flags.writeable = False
    return arr


def substream(seed: int, index: int) -> tuple[int, int]:
    """Seed for realization ``index`` of a run seeded with ``seed``."""
    return (int(seed), int(index))


# ---------------------------------------------------------------------------
# Bandwidth conventions


class BandwidthDefinition(enum.Enum):
    """How a scalar bandwidth maps onto an envelope.

    FWHM       full width at half maximum of the power density
    FULL_1E    full width at 1/e of the power density
    SUPPORT    full width of the support (top-hat envelopes only)
    EQUIVALENT participation width (sum S)^2 / sum S^2 * dw, definition-free
    """

    FWHM = "fwhm"
    FULL_1E = "full_1e"
    SUPPORT = "support"
    EQUIVALENT = "equivalent"


def angular_bandwidth(center_wavelength: float, wavelength_width: float) -> float:
    """Convert a wavelength width (m) at ``center_wavelength`` to rad/s."""
    return 2.0 * math.pi * constants.c * wavelength_width / center_wavelength**2


def gaussian_envelope(
    width: float,
    definition: BandwidthDefinition = BandwidthDefinition.FULL_1E,
    center: float = 0.0,
    peak: float = 1.0,
) -> Envelope:
    """Gaussian power density ``peak * exp(-(delta - center)^2 / w^2)``.

    ``width`` is interpreted through ``definition``; ``w`` is the 1/e
    half width of the power density.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    if definition is BandwidthDefinition.FULL_1E:
        w = width / 2.0
    elif definition is BandwidthDefinition.FWHM:
        w = width / (2.0 * math.sqrt(math.log(2.0)))
    elif definition is BandwidthDefinition.EQUIVALENT:
        # (int S)^2 / int S^2 = sqrt(2 pi) w for a Gaussian
        w = width / math.sqrt(2.0 * math.pi)
    else:
        raise ValueError(f"{definition} is not defined for a Gaussian envelope")

    def env(delta):
        d = np.asarray(delta, dtype=float) - center
        return peak * np.exp(-(d / w) ** 2)

    return env


def flat_envelope(width: float, center: float = 0.0, peak: float = 1.0) -> Envelope:
    """Top-hat power density of full width ``width``.

    For a top hat every entry of :class:`BandwidthDefinition` gives the
    same width, which is why it is the convention-free reference shape.
    """
    if width <= 0:
        raise ValueError("width must be positive")

    def env(delta):
        d = np.asarray(delta, dtype=float) - center
        return np.where(np.abs(d) <= width / 2.0, peak, 0.0)

    return env


# ---------------------------------------------------------------------------
# Grid and fields


@dataclass(frozen=True)
class SpectralGrid:
    pump_freq: float
    half_span: float
    n_points: int

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_span / self.n_points

    @property
    def detunings(self) -> np.ndarray:
        j = np.arange(self.n_points)
        return (j + 0.5 - self.n_points / 2) * self.spacing

    @property
    def frequencies(self) -> np.ndarray:
        return self.pump_freq / 2.0 + self.detunings

    @property
    def positive(self) -> slice:
        """Index range of the signal half (delta > 0)."""
        return slice(self.n_points // 2, self.n_points)

    @property
    def negative(self) -> slice:
        return slice(0, self.n_points // 2)

    def twin(self, j):
        return self.n_points - 1 - np.asarray(j)

    @property
    def dt(self) -> float:
        return 2.0 * math.pi / (self.n_points * self.spacing)

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points / 2) * self.dt

    def envelope_values(self, envelope: Envelope) -> np.ndarray:
        vals = np.asarray(envelope(self.detunings), dtype=float)
        if vals.shape != (self.n_points,):
            vals = np.broadcast_to(vals, (self.n_points,)).copy()
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("envelope must be finite and nonnegative")
        return vals


def make_grid(pump_freq: float, half_span: float, n_points: int) -> SpectralGrid:
    if int(n_points) != n_points or n_points % 2:
        raise ValueError("n_points must be an even integer")
    if n_points < 8:
        raise ValueError("n_points must be at least 8")
    if not half_span > 0:
        raise ValueError("half_span must be positive")
    if not pump_freq > 0:
        raise ValueError("pump_freq must be positive")
    return SpectralGrid(float(pump_freq), float(half_span), int(n_points))


def bandwidth_of(grid: SpectralGrid, density: np.ndarray,
                 definition: BandwidthDefinition) -> float:
    """Measure the full bandwidth of a sampled power density."""
    s = np.asarray(density, dtype=float)
    d = grid.detunings
    if definition is BandwidthDefinition.EQUIVALENT:
        return float(s.sum() ** 2 / np.sum(s * s) * grid.spacing)
    if definition is BandwidthDefinition.SUPPORT:
        idx = np.flatnonzero(s > 0)
        return float((idx[-1] - idx[0] + 1) * grid.spacing)
    level = 0.5 if definition is BandwidthDefinition.FWHM else math.exp(-1.0)
    return crossing_width(d, s, level)


@dataclass(frozen=True)
class SpectralField:
    """Complex amplitudes on a full grid (zeros where a half is absent)."""

    grid: SpectralGrid
    amp: np.ndarray
    envelope: np.ndarray | None = None

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=complex)
        if amp.shape != (self.grid.n_points,):
            raise ValueError("amplitude length does not match grid")
        object.__setattr__(self, "amp", _frozen(amp))
        if self.envelope is not None:
            object.__setattr__(self, "envelope", _frozen(np.asarray(self.envelope, float)))

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.amp) ** 2) * self.grid.spacing)


@dataclass(frozen=True)
class FieldPair:
    """Signal (delta > 0) and idler (delta < 0) fields on a common grid."""

    signal: SpectralField
    idler: SpectralField
    seed: Seed = None

    @property
    def grid(self) -> SpectralGrid:
        return self.signal.grid

    def combined(self) -> SpectralField:
        env = None
        if self.signal.envelope is not None and self.idler.envelope is not None:
            env = self.signal.envelope + self.idler.envelope
        return SpectralField(self.grid, self.signal.amp + self.idler.amp, env)

    @property
    def signal_half(self) -> np.ndarray:
        return self.signal.amp[self.grid.positive]

    @property
    def idler_twins(self) -> np.ndarray:
        """Idler amplitudes reordered to align with :attr:`signal_half`."""
        return self.idler.amp[self.grid.negative][::-1]


@dataclass(frozen=True)
class ConjugatePair(FieldPair):
    """A pair obeying amp_i(-delta) == conj(amp_s(delta)) exactly."""

    def __post_init__(self):
        g = self.grid
        if np.any(self.signal.amp[g.negative] != 0) or np.any(self.idler.amp[g.positive] != 0):
            raise ValueError("signal must live on delta > 0 and idler on delta < 0")
        if not np.array_equal(self.idler_twins, np.conj(self.signal_half)):
            raise ValueError("idler is not the exact conjugate of the signal twins")


def _pair_from_signal(grid: SpectralGrid, sig_half: np.ndarray,
                      envelope: np.ndarray | None, seed: Seed) -> ConjugatePair:
    n = grid.n_points
    sig = np.zeros(n, complex)
    idl = np.zeros(n, complex)
    sig[grid.positive] = sig_half
    idl[grid.negative] = np.conj(sig_half)[::-1]
    env_s = env_i = None
    if envelope is not None:
        env_s = np.where(grid.detunings > 0, envelope, 0.0)
        env_i = np.where(grid.detunings < 0, envelope, 0.0)
    return ConjugatePair(SpectralField(grid, sig, env_s), SpectralField(grid, idl, env_i), seed)


def sample_down_converted(grid: SpectralGrid, envelope: Envelope, seed: Seed) -> ConjugatePair:
    """Draw a conjugate pair with circular Gaussian signal modes.

    Each signal mode has variance ``envelope(delta) * dw``; the idler is the
    exact conjugate of its twin.
    """
    env = grid.envelope_values(envelope)
    rng = np.random.default_rng(seed)
    m = grid.n_points // 2
    var = env[grid.positive] * grid.spacing
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return _pair_from_signal(grid, z * np.sqrt(var / 2.0), env, seed)


def mean_pair(grid: SpectralGrid, envelope: Envelope, phases: np.ndarray | None = None) -> ConjugatePair:
    """Deterministic pair with |amp|^2 equal to the mean power per mode."""
    env = grid.envelope_values(envelope)
    mag = np.sqrt(env[grid.positive] * grid.spacing)
    if phases is not None:
        mag = mag * np.exp(1j * np.asarray(phases, float))
    return _pair_from_signal(grid, mag.astype(complex), env, None)


def sample_incoherent(grid: SpectralGrid, envelope: Envelope, seed: Seed) -> SpectralField:
    """Independent circular Gaussian modes over the whole band (no twin relation)."""
    env = grid.envelope_values(envelope)
    rng = np.random.default_rng(seed)
    n = grid.n_points
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return SpectralField(grid, z * np.sqrt(env * grid.spacing / 2.0), env)


# ---------------------------------------------------------------------------
# Phase masks

_TARGETS = ("signal", "idler", "both")


@dataclass(frozen=True)
class PhaseMask:
    kind: str
    params: tuple
    target: str = "both"

    def __post_init__(self):
        if self.target not in _TARGETS:
            raise ValueError(f"target must be one of {_TARGETS}")

    @classmethod
    def delay(cls, tau: float, target: str = "signal") -> "PhaseMask":
        return cls("delay", (float(tau),), target)

    @classmethod
    def dispersion(cls, order: int, coefficient: float, target: str = "both") -> "PhaseMask":
        if int(order) != order or order < 2:
            raise ValueError("dispersion order must be an integer >= 2")
        return cls("dispersion", (int(order), float(coefficient)), target)

    @classmethod
    def square_wave(cls, period: float, amplitude: float, target: str = "signal",
                    offset: float = 0.0) -> "PhaseMask":
        if not period > 0:
            raise ValueError("period must be positive")
        return cls("square_wave", (float(period), float(amplitude), float(offset)), target)

    @classmethod
    def step(cls, position: float, amplitude: float, target: str = "both") -> "PhaseMask":
        return cls("step", (float(position), float(amplitude)), target)

    @classmethod
    def tabulated(cls, values, target: str = "both") -> "PhaseMask":
        return cls("tabulated", tuple(float(v) for v in np.ravel(values)), target)

    def phase(self, grid: SpectralGrid) -> np.ndarray:
        """Phase in radians at every grid mode, before target selection.

        Square waves and steps depend on |delta| so that ``target='both'``
        acts symmetrically on the two halves.
        """
        d = grid.detunings
        k = self.kind
        if k == "delay":
            return d * self.params[0]
        if k == "dispersion":
            order, coef = self.params
            return coef * d**order
        if k == "square_wave":
            period, amp, offset = self.params
            cell = np.floor((np.abs(d) - offset) / (period / 2.0))
            return amp * (np.mod(cell, 2) == 1)
        if k == "step":
            pos, amp = self.params
            return np.where(np.abs(d) > pos, amp, 0.0)
        if k == "tabulated":
            vals = np.asarray(self.params, float)
            if vals.shape != (grid.n_points,):
                raise ValueError(
                    f"tabulated mask has {vals.size} values, grid has {grid.n_points}")
            return vals
        raise ValueError(f"unknown mask kind {k!r}")

    def selector(self, grid: SpectralGrid) -> np.ndarray:
        d = grid.detunings
        if self.target == "signal":
            return d > 0
        if self.target == "idler":
            return d < 0
        return np.ones_like(d, dtype=bool)

    def applied_phase(self, grid: SpectralGrid) -> np.ndarray:
        return np.where(self.selector(grid), self.phase(grid), 0.0)


def apply_mask(obj, mask: PhaseMask):
    """Multiply by ``exp(i phi)`` on the targeted modes.

    A :class:`FieldPair` (or :class:`ConjugatePair`) comes back as a plain
    :class:`FieldPair`, since a mask generally breaks conjugate symmetry.
    """
    if isinstance(obj, FieldPair):
        return FieldPair(apply_mask(obj.signal, mask), apply_mask(obj.idler, mask), obj.seed)
    if isinstance(obj, SpectralField):
        phi = mask.applied_phase(obj.grid)
        return SpectralField(obj.grid, obj.amp * np.exp(1j * phi), obj.envelope)
    raise TypeError(f"cannot apply a mask to {type(obj).__name__}")


# ---------------------------------------------------------------------------
# Time domain


@dataclass(frozen=True)
class TimeEnvelope:
    times: np.ndarray
    values: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def _phases(n: int):
    k = np.arange(n)
    alt = np.where(k % 2 == 0, 1.0, -1.0)
    return k, alt


def to_time_domain(field: SpectralField | FieldPair) -> TimeEnvelope:
    if isinstance(field, FieldPair):
        field = field.combined()
    g = field.grid
    n = g.n_points
    k, alt = _phases(n)
    spec = np.fft.fft(field.amp * alt)
    pre = np.exp(1j * math.pi * (0.5 - n / 2)) * np.exp(-1j * math.pi * k / n) * alt
    return TimeEnvelope(g.times, g.spacing / (2 * math.pi) * pre * spec)


def from_time_domain(env: TimeEnvelope, grid: SpectralGrid) -> SpectralField:
    """Inverse of :func:`to_time_domain` on the same grid."""
    n = grid.n_points
    k, alt = _phases(n)
    vals = np.asarray(env.values) * np.exp(1j * math.pi * k / n) * alt
    amp = grid.dt * n * np.exp(-1j * math.pi * (0.5 - n / 2)) * alt * np.fft.ifft(vals)
    return SpectralField(grid, amp)


# ---------------------------------------------------------------------------
# Serialization


def save_field(path, field: SpectralField) -> None:
    from .io import write_columns

    write_columns(path, {"detuning_rad_s": field.grid.detunings,
                         "re": field.amp.real, "im": field.amp.imag})


def load_field(path, grid: SpectralGrid) -> SpectralField:
    from .io import read_columns

    cols = read_columns(path)
    if not np.allclose(cols["detuning_rad_s"], grid.detunings, rtol=1e-12, atol=0):
        raise ValueError("file detunings do not match the grid")
    return SpectralField(grid, cols["re"] + 1j * cols["im"])
