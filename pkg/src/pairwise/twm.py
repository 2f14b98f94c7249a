"""Coupled three-wave-mixing amplitude equations along z.

dA_s/dz = -i k A_i* A_p e^{i dk z}
dA_i/dz = -i k A_s* A_p e^{i dk z}
dA_p/dz = -i k A_s A_i e^{-i dk z}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class TwmState:
    A_s: complex
    A_i: complex
    A_p: complex
    z: float = 0.0

    def __post_init__(self):
        if not all(np.isfinite(complex(a)) for a in (self.A_s, self.A_i, self.A_p)):
            raise ValueError("amplitudes must be finite")

    def vector(self) -> np.ndarray:
        return np.array([self.A_s, self.A_i, self.A_p], dtype=complex)

    def conjugate(self) -> "TwmState":
        return TwmState(np.conj(self.A_s), np.conj(self.A_i), np.conj(self.A_p), self.z)


@dataclass(frozen=True)
class TwmTrajectory:
    z: np.ndarray
    amplitudes: np.ndarray      # shape (len(z), 3): s, i, p
    kappa: float
    delta_k: float = 0.0

    def __post_init__(self):
        if self.z.ndim != 1 or self.amplitudes.shape != (self.z.size, 3):
            raise ValueError("amplitudes must be (len(z), 3)")
        if self.z.size > 1 and np.any(np.diff(self.z) <= 0):
            raise ValueError("z must be strictly increasing")

    @property
    def A_s(self):
        return self.amplitudes[:, 0]

    @property
    def A_i(self):
        return self.amplitudes[:, 1]

    @property
    def A_p(self):
        return self.amplitudes[:, 2]

    def state(self, k: int = -1) -> TwmState:
        a = self.amplitudes[k]
        return TwmState(a[0], a[1], a[2], float(self.z[k]))

    def columns(self) -> dict:
        out = {"z_m": self.z}
        for name, col in zip("sip", self.amplitudes.T):
            out[f"re_A{name}"] = col.real
            out[f"im_A{name}"] = col.imag
        return out


def _rhs(kappa, dk):
    def f(z, y):
        s, i, p = y[0] + 1j * y[3], y[1] + 1j * y[4], y[2] + 1j * y[5]
        ph = np.exp(1j * dk * z) if dk else 1.0
        ds = -1j * kappa * np.conj(i) * p * ph
        di = -1j * kappa * np.conj(s) * p * ph
        dp = -1j * kappa * s * i * np.conj(ph)
        return np.array([ds.real, di.real, dp.real, ds.imag, di.imag, dp.imag])
    return f


def _pack(v):
    return np.concatenate([v.real, v.imag])


def _unpack(y):
    return y[:3] + 1j * y[3:]


def _rk4(f, y0, z):
    ys = np.empty((z.size, y0.size))
    ys[0] = y0
    y = y0
    for k in range(z.size - 1):
        h = z[k + 1] - z[k]
        k1 = f(z[k], y)
        k2 = f(z[k] + h / 2, y + h / 2 * k1)
        k3 = f(z[k] + h / 2, y + h / 2 * k2)
        k4 = f(z[k] + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        ys[k + 1] = y
    return ys


def integrate_twm(initial: TwmState, kappa: float, z_span: float, *,
                  rtol: float = 1e-10, atol: float | None = None,
                  delta_k: float = 0.0, points: int = 2001,
                  steps: int | None = None) -> TwmTrajectory:
    """Integrate from ``initial.z`` to ``initial.z + z_span``.

    Adaptive DOP853 by default; pass ``steps`` for fixed-step classical RK4.
    ``atol`` defaults per field to ``rtol * 1e-3`` of that field's start magnitude.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if not z_span > 0:
        raise ValueError("z_span must be positive")
    y0 = _pack(initial.vector())
    f = _rhs(kappa, delta_k)
    z0 = initial.z
    if steps is not None:
        if steps < 1:
            raise ValueError("steps must be >= 1")
        z = np.linspace(z0, z0 + z_span, steps + 1)
        ys = _rk4(f, y0, z)
    else:
        if atol is None:
            # per-field absolute floor: a small fraction of that field's own start
            mags = np.abs(initial.vector())
            ref = mags[mags > 0].min() if np.any(mags > 0) else 1.0
            per = rtol * 1e-3 * np.where(mags > 0, mags, ref)
            atol = np.concatenate([per, per])
        z = np.linspace(z0, z0 + z_span, points)
        sol = solve_ivp(f, (z0, z0 + z_span), y0, method="DOP853", t_eval=z,
                        rtol=rtol, atol=atol)
        if sol.status != 0:
            raise RuntimeError(f"integration failed: {sol.message}")
        ys = sol.y.T
    amps = np.array([_unpack(y) for y in ys])
    return TwmTrajectory(z, amps, float(kappa), float(delta_k))


def small_signal(initial: TwmState, kappa: float, z) -> tuple[np.ndarray, np.ndarray]:
    """Undepleted-pump solution, pump taken as real and positive."""
    g = kappa * abs(initial.A_p) * np.asarray(z, float)
    u = initial.A_p / abs(initial.A_p)
    s = initial.A_s * np.cosh(g) - 1j * u * np.conj(initial.A_i) * np.sinh(g)
    i = initial.A_i * np.cosh(g) - 1j * u * np.conj(initial.A_s) * np.sinh(g)
    return s, i


def phase_sum(traj: TwmTrajectory, floor: float = 0.0) -> np.ma.MaskedArray:
    """theta_p - theta_s - theta_i wrapped to (-pi, pi]; masked where any |A| <= floor."""
    a = traj.amplitudes
    dead = np.any(np.abs(a) <= floor, axis=1)
    prod = a[:, 2] * np.conj(a[:, 0]) * np.conj(a[:, 1])
    ang = np.angle(prod)
    ang = np.where(ang <= -np.pi, ang + 2 * np.pi, ang)
    return np.ma.array(ang, mask=dead)


def invariant_c1(traj: TwmTrajectory) -> np.ndarray:
    """C1 = R_s R_i R_p cos(dtheta) = Re(A_p A_s* A_i*)."""
    a = traj.amplitudes
    return np.real(a[:, 2] * np.conj(a[:, 0]) * np.conj(a[:, 1]))


@dataclass(frozen=True)
class Drift:
    signal_idler: float     # |A_s|^2 - |A_i|^2
    signal_pump: float      # |A_s|^2 + |A_p|^2
    c1: float

    def max(self) -> float:
        return max(self.signal_idler, self.signal_pump, self.c1)


def conserved_drift(traj: TwmTrajectory) -> Drift:
    """Maximum excursion of each invariant from its start value.

    Each drift is relative to the largest magnitude its constituents reach
    along z, so a quantity that starts near zero (e.g. C1 from tiny seeds)
    is still judged on a meaningful scale.
    """
    a = traj.amplitudes
    ps, pi_, pp = (np.abs(a) ** 2).T
    mr1 = ps - pi_
    mr2 = ps + pp
    c1 = invariant_c1(traj)

    def rel(q, scale):
        if scale == 0:
            return 0.0 if np.all(q == q[0]) else np.inf
        return float(np.max(np.abs(q - q[0])) / scale)

    return Drift(
        rel(mr1, float(np.max(ps + pi_))),
        rel(mr2, float(np.max(mr2))),
        rel(c1, float(np.max(np.sqrt(ps * pi_ * pp)))),
    )


def time_reversal_error(traj: TwmTrajectory, **kw) -> float:
    """Integrate the conjugated end state forward over the same span.

    The equations are invariant under (A, z) -> (A*, -z) at dk = 0, so the
    conjugate of the result must equal the start state.
    """
    if traj.delta_k != 0:
        raise ValueError("time reversal check requires delta_k = 0")
    span = float(traj.z[-1] - traj.z[0])
    end = traj.state().conjugate()
    back = integrate_twm(TwmState(end.A_s, end.A_i, end.A_p, 0.0), traj.kappa, span,
                         points=2, **kw)
    start = traj.amplitudes[0]
    got = np.conj(back.amplitudes[-1])
    scale = np.max(np.abs(traj.amplitudes))
    return float(np.max(np.abs(got - start)) / scale)
