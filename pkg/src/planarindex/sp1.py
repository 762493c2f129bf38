"""Linear algebra on Sp(1), the group of real 2x2 matrices with unit determinant.

Matrices are plain ``(2, 2)`` numpy arrays. Everything here is closed form:
no iterative eigensolvers are used, so results are reproducible to the last
bit and cheap enough to call inside integration loops.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DegenerateKrein, NotSymplectic

J = np.array([[0.0, -1.0], [1.0, 0.0]])
I2 = np.eye(2)

SYMPLECTIC_TOL = 1e-6
RESONANCE_BAND = 1e-9
KREIN_TOL = 1e-12


class MultiplierClass(str, Enum):
    HYPERBOLIC = "hyperbolic"
    PARABOLIC_PLUS = "parabolic_plus"
    PARABOLIC_MINUS = "parabolic_minus"
    ELLIPTIC = "elliptic"


class Stratum(str, Enum):
    MINUS = "Lambda-"
    ZERO = "Lambda0"
    PLUS = "Lambda+"


@dataclass(frozen=True)
class MultiplierPair:
    mu1: complex
    mu2: complex
    kind: MultiplierClass
    trace: float

    @property
    def angle(self) -> float:
        """Elliptic rotation angle phi in (0, pi) with multipliers exp(+-i phi)."""
        return abs(cmath.phase(self.mu1))


@dataclass(frozen=True)
class PolarCoords:
    tau: float
    sigma: float
    theta: float


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def positive_part(tau: float, sigma: float) -> np.ndarray:
    ch, sh = math.cosh(tau), math.sinh(tau)
    return np.array(
        [
            [ch + sh * math.cos(sigma), sh * math.sin(sigma)],
            [sh * math.sin(sigma), ch - sh * math.cos(sigma)],
        ]
    )


def covering(tau: float, sigma: float, theta: float) -> np.ndarray:
    """The covering map (tau, sigma, theta) -> P(tau, sigma) O(theta)."""
    return positive_part(tau, sigma) @ rotation(theta)


def symplectic_residual(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=float)
    return abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1.0)


def _check_symplectic(m: np.ndarray, tol: float) -> None:
    scale = max(1.0, abs(m[0, 0] * m[1, 1]) + abs(m[0, 1] * m[1, 0]))
    res = symplectic_residual(m)
    if not res <= tol * scale:
        raise NotSymplectic(f"|det M - 1| = {res:.3e} exceeds {tol:.1e} (scale {scale:.3e})")


def resonance_band(trace: float) -> float:
    return RESONANCE_BAND * (1.0 + abs(trace))


def multipliers(m: np.ndarray, tol: float = SYMPLECTIC_TOL) -> MultiplierPair:
    m = np.asarray(m, dtype=float)
    _check_symplectic(m, tol)
    tr = float(m[0, 0] + m[1, 1])
    band = resonance_band(tr)
    if abs(tr - 2.0) < band:
        return MultiplierPair(1.0 + 0j, 1.0 + 0j, MultiplierClass.PARABOLIC_PLUS, tr)
    if abs(tr + 2.0) < band:
        return MultiplierPair(-1.0 + 0j, -1.0 + 0j, MultiplierClass.PARABOLIC_MINUS, tr)
    if abs(tr) > 2.0:
        # larger root first; the smaller one via mu1 * mu2 = 1 avoids cancellation
        big = 0.5 * (tr + math.copysign(math.sqrt(tr * tr - 4.0), tr))
        return MultiplierPair(complex(big), complex(1.0 / big), MultiplierClass.HYPERBOLIC, tr)
    im = 0.5 * math.sqrt(4.0 - tr * tr)
    return MultiplierPair(complex(0.5 * tr, im), complex(0.5 * tr, -im), MultiplierClass.ELLIPTIC, tr)


def lambda_stratum(m: np.ndarray) -> Stratum:
    """Sign of det(I - M), with the relative resonance band around tr M = 2."""
    m = np.asarray(m, dtype=float)
    tr = float(m[0, 0] + m[1, 1])
    if abs(tr - 2.0) < resonance_band(tr):
        return Stratum.ZERO
    d = (1.0 - m[0, 0]) * (1.0 - m[1, 1]) - m[0, 1] * m[1, 0]
    return Stratum.MINUS if d < 0 else Stratum.PLUS


def polar_decompose(m: np.ndarray) -> PolarCoords:
    """Return (tau, sigma, theta) with M = P(tau, sigma) O(theta).

    theta is the counterclockwise angle of the orthogonal factor, in (-pi, pi].
    sigma is set to 0 whenever the positive factor is the identity.
    """
    m = np.asarray(m, dtype=float)
    a = m @ m.T
    # for SPD A with det A = 1, sqrt(A) = (A + I) / sqrt(tr A + 2)
    p = (a + I2) / math.sqrt(a[0, 0] + a[1, 1] + 2.0)
    p_inv = np.array([[p[1, 1], -p[0, 1]], [-p[1, 0], p[0, 0]]])
    o = p_inv @ m
    theta = math.atan2(o[1, 0] - o[0, 1], o[0, 0] + o[1, 1])
    if theta <= -math.pi:
        theta += 2.0 * math.pi
    half_diff = 0.5 * (p[0, 0] - p[1, 1])
    off = 0.5 * (p[0, 1] + p[1, 0])
    sh = math.hypot(half_diff, off)
    tau = math.asinh(sh)
    if tau < 1e-12:
        return PolarCoords(0.0, 0.0, theta)
    return PolarCoords(tau, math.atan2(off, half_diff), theta)


def _eigenvector(m: np.ndarray, mu: complex) -> np.ndarray:
    # (M - mu I) zeta = 0; pick the better conditioned row
    r1 = abs(m[0, 1]) + abs(mu - m[0, 0])
    r2 = abs(m[1, 0]) + abs(mu - m[1, 1])
    if r1 >= r2:
        zeta = np.array([m[0, 1], mu - m[0, 0]], dtype=complex)
    else:
        zeta = np.array([mu - m[1, 1], m[1, 0]], dtype=complex)
    return zeta / np.linalg.norm(zeta)


def krein_form(zeta: np.ndarray) -> float:
    """<iJ zeta, zeta> in C^2 (always real)."""
    v = 1j * (J @ zeta)
    return float(np.real(np.vdot(zeta, v)))


def rotation_function(m: np.ndarray, tol: float = SYMPLECTIC_TOL) -> complex:
    pair = multipliers(m, tol)
    if pair.kind is not MultiplierClass.ELLIPTIC:
        return complex(math.copysign(1.0, pair.trace))
    zeta = _eigenvector(np.asarray(m, dtype=float), pair.mu1)
    kappa = krein_form(zeta)
    if abs(kappa) < KREIN_TOL:
        raise DegenerateKrein(f"Krein form {kappa:.3e} too small to pick a sign")
    mu = pair.mu1 if kappa > 0 else pair.mu2
    return mu / abs(mu)
