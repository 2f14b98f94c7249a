"""Collinear phase matching from tabulated dispersion data.

Dispersion coefficients live in JSON files under ``data/crystals``; each
file must name its source in a ``provenance`` string or it is refused.
Wavelengths are in metres at the API and in micrometres inside formulas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import constants, optimize

C = constants.c

# ---------------------------------------------------------------------------
# Index formulas.  Each takes wavelength in micrometres.


def _constant(lam, p):
    return np.full_like(lam, p["n0"], dtype=float)


def _polynomial(lam, p):
    x = lam - p.get("center_um", 0.0)
    return np.polynomial.polynomial.polyval(x, p["c"])


def _sellmeier_pole(lam, p):
    # n^2 = A + B lam^2 / (lam^2 - C) - D lam^2
    l2 = lam * lam
    return np.sqrt(p["A"] + p["B"] * l2 / (l2 - p["C"]) - p["D"] * l2)


def _sellmeier_eimerl(lam, p):
    # n^2 = A + B / (lam^2 - C) - D lam^2
    l2 = lam * lam
    return np.sqrt(p["A"] + p["B"] / (l2 - p["C"]) - p["D"] * l2)


def _frequency_poly(lam, p):
    # k(w) = sum_k beta_k (w - w0)^k / k!  (SI), so n = c k / w
    w = 2 * math.pi * C / (lam * 1e-6)
    x = w - p["omega0"]
    betas = p["beta"]
    k = sum(b * x**i / math.factorial(i) for i, b in enumerate(betas))
    return C * k / w


FORMULAS = {
    "constant": _constant,
    "polynomial": _polynomial,
    "sellmeier_pole": _sellmeier_pole,
    "sellmeier_eimerl": _sellmeier_eimerl,
    "frequency_poly": _frequency_poly,
}


@dataclass(frozen=True)
class Dispersion:
    formula: str
    coefficients: dict
    validity: tuple[float, float]   # metres

    def __post_init__(self):
        if self.formula not in FORMULAS:
            raise ValueError(f"unknown formula id {self.formula!r}")
        lo, hi = self.validity
        if not 0 < lo < hi:
            raise ValueError("validity range must be 0 < lo < hi")

    def index(self, lam) -> np.ndarray:
        lam = np.asarray(lam, float)
        lo, hi = self.validity
        if np.any(lam < lo * (1 - 1e-12)) or np.any(lam > hi * (1 + 1e-12)):
            raise ValueError(
                f"wavelength outside validity range [{lo:.4g}, {hi:.4g}] m")
        return FORMULAS[self.formula](lam * 1e6, self.coefficients)


@dataclass(frozen=True)
class CrystalModel:
    name: str
    axes: dict
    provenance: str
    length: float
    qpm_period: float | None = None   # signed; grating vector 2 pi / period
    chi: float = 1.0
    loss: float = 0.01
    pump_axis: str = ""
    signal_axis: str = ""

    def __post_init__(self):
        if not str(self.provenance).strip():
            raise ValueError("crystal data must carry a provenance string")
        if not self.length > 0:
            raise ValueError("crystal length must be positive")
        if not self.axes:
            raise ValueError("crystal needs at least one dispersion axis")
        first = next(iter(self.axes))
        if not self.pump_axis:
            object.__setattr__(self, "pump_axis", first)
        if not self.signal_axis:
            object.__setattr__(self, "signal_axis", first)
        for ax in (self.pump_axis, self.signal_axis):
            if ax not in self.axes:
                raise ValueError(f"axis {ax!r} not defined")

    @property
    def grating_vector(self) -> float:
        return 0.0 if self.qpm_period is None else 2 * math.pi / self.qpm_period

    def with_(self, **kw) -> "CrystalModel":
        return replace(self, **kw)


def _data_dir():
    return resources.files("pairwise") / "data" / "crystals"


def available_crystals() -> list[str]:
    return sorted(p.name[:-5] for p in _data_dir().iterdir() if p.name.endswith(".json"))


def _read_json(name_or_path) -> dict:
    path = Path(str(name_or_path))
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        res = _data_dir() / f"{name_or_path}.json"
        if not res.is_file():
            raise FileNotFoundError(f"no crystal file {name_or_path!r}")
        text = res.read_text()
    return json.loads(text)


def crystal_from_dict(d: dict) -> CrystalModel:
    prov = d.get("provenance")
    if not isinstance(prov, str) or not prov.strip():
        raise ValueError("crystal file is missing its provenance string")
    axes = {}
    for ax, spec in d["axes"].items():
        axes[ax] = Dispersion(spec["formula"], dict(spec["coefficients"]),
                              tuple(float(v) for v in spec["validity_m"]))
    return CrystalModel(
        name=d.get("name", "crystal"), axes=axes, provenance=prov,
        length=float(d["length_m"]), qpm_period=d.get("qpm_period_m"),
        chi=float(d.get("chi", 1.0)), loss=float(d.get("loss", 0.01)),
        pump_axis=d.get("pump_axis", ""), signal_axis=d.get("signal_axis", ""))


def load_crystal(name_or_path) -> CrystalModel:
    return crystal_from_dict(_read_json(name_or_path))


def load_configuration(name_or_path) -> tuple[CrystalModel, float]:
    """Crystal plus its operating pump wavelength, phase matched at degeneracy.

    The file's ``pump_m`` is a number or ``"zero_dispersion"``.
    """
    d = _read_json(name_or_path)
    crystal = crystal_from_dict(d)
    pump = d.get("pump_m")
    if pump is None:
        raise ValueError("configuration needs pump_m")
    lam_p = find_zero_dispersion_pump(crystal) if pump == "zero_dispersion" else float(pump)
    return phase_matched(crystal, lam_p), lam_p


# ---------------------------------------------------------------------------
# Phase mismatch


def refractive_index(crystal: CrystalModel, lam, axis: str | None = None) -> np.ndarray:
    return crystal.axes[axis or crystal.signal_axis].index(lam)


def _k(crystal, lam, axis):
    return 2 * math.pi * refractive_index(crystal, lam, axis) / lam


def delta_k_detuning(crystal: CrystalModel, lam_p: float, detuning) -> np.ndarray:
    """Delta k for signal at w_o + delta and idler at w_o - delta, w_o = w_p / 2.

    The two daughter terms are added symmetrically, so delta -> -delta gives
    a bit-identical result.
    """
    wo = math.pi * C / lam_p
    d = np.asarray(detuning, float)
    if np.any(np.abs(d) >= wo):
        raise ValueError("nonphysical idler: |detuning| must be below omega_p / 2")
    lam_a = 2 * math.pi * C / (wo + d)
    lam_b = 2 * math.pi * C / (wo - d)
    ka = _k(crystal, lam_a, crystal.signal_axis)
    kb = _k(crystal, lam_b, crystal.signal_axis)
    kp = _k(crystal, lam_p, crystal.pump_axis)
    return kp - (ka + kb) - crystal.grating_vector


def delta_k(crystal: CrystalModel, lam_s, lam_p: float) -> np.ndarray:
    """Delta k = 2 pi [n_p/l_p - n_s/l_s - n_i/l_i] - 2 pi / period (rad/m)."""
    lam_s = np.asarray(lam_s, float)
    inv_i = 1.0 / lam_p - 1.0 / lam_s
    if np.any(inv_i <= 0):
        raise ValueError("nonphysical idler: signal wavelength must exceed the pump's")
    lam_i = 1.0 / inv_i
    return (_k(crystal, lam_p, crystal.pump_axis) - _k(crystal, lam_s, crystal.signal_axis)
            - _k(crystal, lam_i, crystal.signal_axis) - crystal.grating_vector)


def phase_matched(crystal: CrystalModel, lam_p: float) -> CrystalModel:
    """Copy with the grating period chosen so Delta k = 0 at degeneracy."""
    bare = crystal.with_(qpm_period=None)
    dk0 = float(delta_k_detuning(bare, lam_p, 0.0))
    if dk0 == 0:
        return bare
    return crystal.with_(qpm_period=2 * math.pi / dk0)


@dataclass(frozen=True)
class MismatchCurve:
    wavelengths: np.ndarray
    delta_k: np.ndarray

    def columns(self) -> dict:
        return {"signal_wavelength_m": self.wavelengths, "delta_k_rad_m": self.delta_k}


def mismatch_curve(crystal: CrystalModel, lam_p: float, lam_s) -> MismatchCurve:
    lam_s = np.asarray(lam_s, float)
    return MismatchCurve(lam_s, delta_k(crystal, lam_s, lam_p))


# ---------------------------------------------------------------------------
# Bandwidth


def _criterion_fn(crystal, criterion):
    half_l = crystal.length / 2
    if criterion == "first_zero":
        return lambda dk: math.pi - abs(dk) * half_l
    if criterion == "fwhm":
        return lambda dk: float(np.sinc(dk * half_l / math.pi) ** 2) - 0.5
    raise ValueError("criterion must be 'first_zero' or 'fwhm'")


def pm_half_width(crystal: CrystalModel, lam_p: float, criterion: str = "first_zero") -> float:
    """Detuning (rad/s) at which the phase-matching criterion first fails."""
    f = _criterion_fn(crystal, criterion)

    def g(d):
        return f(float(delta_k_detuning(crystal, lam_p, d)))

    if g(0.0) < 0:
        raise ValueError("no phase-matched point at degeneracy")
    wo = math.pi * C / lam_p
    # largest detuning keeping both daughters inside the validity range
    ax = crystal.axes[crystal.signal_axis]
    lo, hi = ax.validity
    dmax = min(2 * math.pi * C / lo - wo, wo - 2 * math.pi * C / hi)
    if dmax <= 0:
        raise ValueError("degenerate wavelength outside validity range")
    step = dmax / 4000
    d = 0.0
    while True:
        nxt = min(d + step, dmax)
        if g(nxt) < 0:
            return optimize.brentq(g, d, nxt, xtol=1e-14 * wo)
        if nxt >= dmax:
            raise ValueError("phase-matching region reaches the validity limit")
        d = nxt


def pm_bandwidth(crystal: CrystalModel, lam_p: float, criterion: str = "first_zero") -> float:
    """Full width (m, signal wavelength) of the contiguous phase-matched region."""
    d = pm_half_width(crystal, lam_p, criterion)
    wo = math.pi * C / lam_p
    return 2 * math.pi * C / (wo - d) - 2 * math.pi * C / (wo + d)


def pm_band(crystal: CrystalModel, lam_p: float, criterion: str = "first_zero") -> tuple[float, float]:
    d = pm_half_width(crystal, lam_p, criterion)
    wo = math.pi * C / lam_p
    return 2 * math.pi * C / (wo + d), 2 * math.pi * C / (wo - d)


# ---------------------------------------------------------------------------
# Zero dispersion


def second_derivative(crystal: CrystalModel, lam, axis: str | None = None,
                      step_um: float = 1e-3) -> np.ndarray:
    """Central-difference d^2 n / d lam^2 in 1/um^2 (exact for cubics)."""
    disp = crystal.axes[axis or crystal.signal_axis]
    f = FORMULAS[disp.formula]
    lu = np.asarray(lam, float) * 1e6
    h = step_um
    p = disp.coefficients
    return (f(lu + h, p) - 2 * f(lu, p) + f(lu - h, p)) / (h * h)


def find_zero_dispersion_pump(crystal: CrystalModel, axis: str | None = None,
                              samples: int = 2000) -> float:
    """Pump wavelength putting degeneracy where d^2 n / d lam^2 = 0."""
    disp = crystal.axes[axis or crystal.signal_axis]
    lo, hi = disp.validity
    h = 1e-9
    lam = np.linspace(lo + 2 * h, hi - 2 * h, samples)
    d2 = second_derivative(crystal, lam, axis)
    sign = np.sign(d2)
    idx = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    exact = np.flatnonzero(d2 == 0)
    if exact.size:
        return float(lam[exact[0]] / 2)
    if idx.size == 0:
        raise ValueError("d2n/dlam2 has no sign change inside the validity range")
    i = idx[0]
    root = optimize.brentq(lambda x: float(second_derivative(crystal, x, axis)),
                           lam[i], lam[i + 1], xtol=1e-18)
    return root / 2


def dispersion_coefficients(crystal: CrystalModel, lam_p: float, half_span: float,
                            points: int = 201) -> tuple[float, float, float]:
    """Least-squares fit Delta k(delta) = c0 + c2 delta^2 + c4 delta^4 over |delta| <= half_span."""
    d = np.linspace(-half_span, half_span, points)
    dk = delta_k_detuning(crystal, lam_p, d)
    x = d / half_span
    a = np.column_stack([np.ones_like(x), x**2, x**4])
    c, *_ = np.linalg.lstsq(a, dk, rcond=None)
    return float(c[0]), float(c[1] / half_span**2), float(c[2] / half_span**4)


# ---------------------------------------------------------------------------
# Threshold


def base_threshold(loss: float, chi: float, length: float) -> float:
    """T^2 / (4 chi^2 l^2)."""
    if min(loss, chi, length) <= 0:
        raise ValueError("loss, chi and length must be positive")
    return loss**2 / (4 * chi**2 * length**2)


@dataclass(frozen=True)
class ThresholdCurve:
    wavelengths: np.ndarray
    absolute: np.ndarray
    base: float

    @property
    def relative(self) -> np.ndarray:
        return self.absolute / self.absolute.min()

    def flatness(self, band: tuple[float, float] | None = None) -> float:
        """max / min of the threshold over ``band`` (whole curve if None)."""
        sel = np.ones_like(self.wavelengths, dtype=bool)
        if band is not None:
            sel = (self.wavelengths >= band[0]) & (self.wavelengths <= band[1])
        vals = self.absolute[sel]
        return float(vals.max() / vals.min())

    def columns(self) -> dict:
        return {"signal_wavelength_m": self.wavelengths, "threshold_relative": self.relative}


def threshold_curve(crystal: CrystalModel, lam_p: float, lam_s) -> ThresholdCurve:
    """I_th = [T^2 / (4 chi^2 l^2)] / sinc^2(Delta k l / 2), sinc x = sin x / x."""
    lam_s = np.asarray(lam_s, float)
    base = base_threshold(crystal.loss, crystal.chi, crystal.length)
    x = delta_k(crystal, lam_s, lam_p) * crystal.length / 2
    eff = np.sinc(x / math.pi) ** 2
    with np.errstate(divide="ignore"):
        absolute = np.where(eff > 0, base / eff, np.inf)
    return ThresholdCurve(lam_s, absolute, base)


def flat_band(curve: ThresholdCurve, ratio: float = 1.15) -> tuple[float, float]:
    """Contiguous wavelength span around the minimum where I_th <= ratio * min."""
    rel = curve.relative
    i0 = int(np.argmin(rel))
    i = i0
    while i > 0 and rel[i - 1] <= ratio:
        i -= 1
    j = i0
    while j < len(rel) - 1 and rel[j + 1] <= ratio:
        j += 1
    return float(curve.wavelengths[i]), float(curve.wavelengths[j])
