"""Flow of the linear system J z' = S(t) z.

Three objects are produced:

* the fundamental matrix M(t), solving M' = -J S(t) M with M(0) = I;
* the clockwise angle theta(t; omega) and radius r(t; omega) of the solution
  starting at exp(-i omega) = (cos omega, -sin omega), integrated directly from
  their own scalar equations (log r instead of r, so positivity is structural);
* :class:`AngleMap`, the lift omega -> theta(kT; omega) reconstructed in closed
  form from M(kT) and a single integrated anchor value. It is what makes
  sweeps over omega and iterates over many periods cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffs import CoeffPath
from .errors import LiftStepTooLarge, ToleranceNotMet
from .integrate import Trajectory, integrate
from .sp1 import polar_decompose, symplectic_residual

DEFAULT_TOL = 1e-11
TWO_PI = 2.0 * math.pi


def _matrix_rhs(S: CoeffPath):
    def rhs(t, y):
        a, b, c = S.entries(t)
        m11, m12, m21, m22 = y
        return np.array(
            [b * m11 + c * m21, b * m12 + c * m22, -a * m11 - b * m21, -a * m12 - b * m22]
        )

    return rhs


def _angle_rates(a, b, c, theta):
    c2, s2 = np.cos(2.0 * theta), np.sin(2.0 * theta)
    half = 0.5 * (a - c)
    dtheta = 0.5 * (a + c) + half * c2 - b * s2
    dlogr = half * s2 + b * c2
    return dtheta, dlogr


def _angle_rhs(S: CoeffPath):
    def rhs(t, y):
        a, b, c = S.entries(t)
        dtheta, dlogr = _angle_rates(a, b, c, y[0])
        return np.stack([dtheta, dlogr])

    return rhs


@dataclass
class FundamentalPath:
    """Dense record of M(t) on [0, t_end]."""

    coeffs: CoeffPath
    traj: Trajectory
    tol: float

    @property
    def t_end(self) -> float:
        return self.traj.t_end

    @property
    def times(self) -> np.ndarray:
        return self.traj.t

    @property
    def matrices(self) -> np.ndarray:
        return self.traj.y.reshape(-1, 2, 2)

    @property
    def terminal(self) -> np.ndarray:
        return self.traj.y_end.reshape(2, 2)

    def __call__(self, t: float) -> np.ndarray:
        return self.traj(t).reshape(2, 2)


def integrate_fundamental(S: CoeffPath, t_end: float, tol: float = DEFAULT_TOL) -> FundamentalPath:
    if not t_end > 0 or not tol > 0:
        raise ValueError("t_end and tol must be positive")
    traj = integrate(_matrix_rhs(S), 0.0, np.eye(2).ravel(), t_end, rtol=tol, atol=tol, dense=True)
    path = FundamentalPath(S, traj, tol)
    m = path.terminal
    scale = max(1.0, abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0]))
    # the step controller bounds local errors only; the determinant drifts with the step count
    budget = 10.0 * tol * scale * max(1.0, len(traj.t) / 100.0)
    if symplectic_residual(m) > budget:
        raise ToleranceNotMet(f"terminal symplectic residual {symplectic_residual(m):.2e}")
    return path


def monodromy(S: CoeffPath, periods: int = 1, tol: float = DEFAULT_TOL) -> np.ndarray:
    return integrate_fundamental(S, periods * S.period, tol).terminal


@dataclass
class AngularSolution:
    omega0: float
    traj: Trajectory

    @property
    def t_end(self) -> float:
        return self.traj.t_end

    def theta(self, t: float) -> float:
        return float(self.traj(t)[0])

    def radius(self, t: float) -> float:
        return float(math.exp(self.traj(t)[1]))

    @property
    def theta_end(self) -> float:
        return float(self.traj.y_end[0])

    @property
    def radius_end(self) -> float:
        return float(math.exp(self.traj.y_end[1]))


def angle_lift(S: CoeffPath, omega: float, t_end: float, tol: float = DEFAULT_TOL) -> AngularSolution:
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    y0 = np.array([float(omega), 0.0])
    traj = integrate(_angle_rhs(S), 0.0, y0, t_end, rtol=tol, atol=tol, dense=True)
    return AngularSolution(float(omega), traj)


def angle_lift_batch(
    S: CoeffPath, omegas, t_end: float, tol: float = DEFAULT_TOL
) -> tuple[np.ndarray, np.ndarray]:
    """theta(t_end; omega) and r(t_end; omega) for many initial angles at once."""
    omegas = np.asarray(omegas, dtype=float)
    y0 = np.stack([omegas, np.zeros_like(omegas)])
    traj = integrate(_angle_rhs(S), 0.0, y0, t_end, rtol=tol, atol=tol)
    return traj.y_end[0], np.exp(traj.y_end[1])


def winding(S: CoeffPath, k: int, omega: float, tol: float = DEFAULT_TOL) -> float:
    if k < 1:
        raise ValueError("k must be a positive integer")
    sol = angle_lift(S, omega, k * S.period, tol)
    return (sol.theta_end - omega) / TWO_PI


def winding_derivative(S: CoeffPath, omega: float, tol: float = DEFAULT_TOL, k: int = 1) -> float:
    sol = angle_lift(S, omega, k * S.period, tol)
    return (1.0 / sol.radius_end**2 - 1.0) / TWO_PI


def clockwise_angle(u1, u2):
    return np.arctan2(-np.asarray(u2), np.asarray(u1))


class AngleMap:
    """omega -> theta(t1; omega) for the flow over [0, t1], rebuilt from M(t1).

    A linear map with positive determinant turns a half-turn of initial
    directions into a half-turn of images, so for omega in [0, pi) the lifted
    angle exceeds theta(t1; 0) by the clockwise angle between the images, a
    number in [0, pi). One integrated anchor theta(t1; 0) therefore fixes the
    whole lift; the translation law theta(omega + pi) = theta(omega) + pi
    extends it to all omega.
    """

    def __init__(self, m: np.ndarray, anchor: float):
        self.m = np.asarray(m, dtype=float)
        self.anchor = float(anchor)
        self._arg0 = float(clockwise_angle(self.m[0, 0], self.m[1, 0]))

    def images(self, omega):
        w = np.asarray(omega, dtype=float)
        c, s = np.cos(w), -np.sin(w)
        return self.m[0, 0] * c + self.m[0, 1] * s, self.m[1, 0] * c + self.m[1, 1] * s

    def theta(self, omega):
        w = np.asarray(omega, dtype=float)
        n = np.floor(w / math.pi)
        red = w - n * math.pi
        u1, u2 = self.images(red)
        d = clockwise_angle(u1, u2) - self._arg0
        d = np.mod(d + 0.5 * math.pi, TWO_PI) - 0.5 * math.pi
        out = self.anchor + n * math.pi + d
        return float(out) if np.ndim(out) == 0 else out

    def eta(self, omega):
        return (self.theta(omega) - np.asarray(omega, dtype=float)) / TWO_PI

    def radius_sq(self, omega):
        u1, u2 = self.images(omega)
        return u1 * u1 + u2 * u2

    def eta_derivative(self, omega):
        r2 = self.radius_sq(omega)
        with np.errstate(divide="ignore"):  # r^2 can underflow along a contracting direction
            return (1.0 / r2 - 1.0) / TWO_PI

    def iterate(self, omega: float, k: int) -> float:
        """theta after k applications (the flow over [0, k t1] for T-periodic S)."""
        w = float(omega)
        for _ in range(k):
            w = self.theta(w)
        return w


def angle_map(S: CoeffPath, periods: int = 1, tol: float = DEFAULT_TOL) -> tuple[AngleMap, np.ndarray]:
    """Integrate M and theta(.; 0) jointly over [0, periods*T]."""
    t_end = periods * S.period
    mrhs = _matrix_rhs(S)
    arhs = _angle_rhs(S)

    def rhs(t, y):
        return np.concatenate([mrhs(t, y[:4]), arhs(t, y[4:6])])

    y0 = np.array([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    traj = integrate(rhs, 0.0, y0, t_end, rtol=tol, atol=tol)
    m = traj.y_end[:4].reshape(2, 2)
    return AngleMap(m, traj.y_end[4]), m


def lift_polar_angle(path: FundamentalPath, max_refine: int = 12) -> np.ndarray:
    """Continuous clockwise polar angle -theta_O(t) of M(t), starting at 0.

    Returns an array of (t, angle) rows. Consecutive samples are refined with
    the continuous extension until they differ by less than pi/2.
    """
    times = list(path.times)
    rows = [(times[0], 0.0)]
    prev = 0.0
    for t0, t1 in zip(times[:-1], times[1:]):
        stack = [t1]
        lo = t0
        depth = 0
        while stack:
            t = stack[-1]
            raw = -polar_decompose(path(t)).theta
            cand = raw + TWO_PI * round((prev - raw) / TWO_PI)
            if abs(cand - prev) >= 0.5 * math.pi:
                depth += 1
                if depth > max_refine:
                    raise LiftStepTooLarge(f"polar angle jumps by {abs(cand - prev):.3f} near t={t}")
                stack.append(0.5 * (lo + t))
                continue
            stack.pop()
            rows.append((t, cand))
            prev = cand
            lo = t
    return np.array(rows)
