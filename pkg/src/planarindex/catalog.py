"""Ready-made linear and nonlinear systems.

Linear entries are :class:`CoeffPath` instances, nonlinear ones are
:class:`PlanarSystem` instances carrying their linearizations. Everything is
addressable by name through :func:`build`, which is what the command line uses.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .coeffs import CallableFunction, CoeffPath, PeriodicFunction, SampledTable, TrigPoly, periodic_from_dict
from .errors import CertificateFailed, ConfigError, NotASolution
from .hill import HillProblem, hill_to_coeffpath
from .index import rotation_number
from .subharmonics import PlanarSystem

TWO_PI = 2.0 * math.pi


def _periodic(q, T: float) -> PeriodicFunction:
    if isinstance(q, PeriodicFunction):
        if abs(q.period - T) > 1e-12 * T:
            raise ConfigError("coefficient period differs from T")
        return q
    if isinstance(q, (int, float)):
        return TrigPoly.constant(float(q), T)
    if isinstance(q, (list, tuple)):
        return TrigPoly(T, tuple(q))
    return periodic_from_dict(q, T)


def make_hill(q, T: float = TWO_PI) -> CoeffPath:
    """u'' + q(t) u = 0 as S = diag(q, 1)."""
    return hill_to_coeffpath(HillProblem(_periodic(q, T), T), 0.0)


def make_mathieu(delta: float = 0.25, eps: float = 0.0, T: float = TWO_PI) -> CoeffPath:
    return make_hill(TrigPoly(T, (delta, eps)), T)


def make_rotation(omega: float = 1.0, T: float = TWO_PI) -> CoeffPath:
    """S = omega I: every solution turns clockwise at rate omega."""
    return CoeffPath.constant(omega, 0.0, omega, T)


def make_saddle(T: float = 1.0) -> CoeffPath:
    return CoeffPath.constant(-1.0, 0.0, 1.0, T)


def make_lotka_volterra_log(alpha=1.0, beta=1.0, T: float = TWO_PI, K: int = 200) -> PlanarSystem:
    """x' = beta (e^y - 1), y' = alpha (1 - e^x), the log-coordinates of a predator-prey system."""
    al, be = _periodic(alpha, T), _periodic(beta, T)
    for name, f in (("alpha", al), ("beta", be)):
        ts = np.linspace(0.0, T, 512, endpoint=False)
        vals = np.array([f(float(t)) for t in ts])
        if vals.min() < -1e-12:
            raise ConfigError(f"{name} must be nonnegative")
        if vals.max() <= 0:
            raise ConfigError(f"{name} must not vanish identically")

    def vf(t, z):
        x, y = z[0], z[1]
        return np.stack([be(t) * np.expm1(y), -al(t) * np.expm1(x)])

    S0 = CoeffPath(T, al, TrigPoly.constant(0.0, T), be)
    rho0 = rotation_number(S0, K)
    if not rho0.lo > 0:
        raise CertificateFailed(f"rotation interval [{rho0.lo}, {rho0.hi}] at zero is not positive")
    sys = PlanarSystem(
        "lotka_volterra",
        T,
        vf,
        S0,
        None,
        sublinear=True,
        params={"alpha": al.to_dict(), "beta": be.to_dict(), "T": T},
        safety=1e300,
        certificate=rho0,
    )
    sys.check()
    return sys


def make_saturating_scalar(q0=9.0, T: float = TWO_PI) -> PlanarSystem:
    """u'' + q0(t) u / (1 + u^2) = 0: Hill-like near zero, zero rotation at infinity."""
    q = _periodic(q0, T)

    def vf(t, z):
        x, y = z[0], z[1]
        return np.stack([y, -q(t) * x / (1.0 + x * x)])

    sys = PlanarSystem(
        "saturating",
        T,
        vf,
        make_hill(q, T),
        make_hill(0.0, T),
        params={"q0": q.to_dict(), "T": T},
    )
    sys.check()
    return sys


def minkowski_phi(s, a: float = 1.0):
    """phi(s) = s / sqrt(1 - (s/a)^2), an increasing diffeomorphism (-a, a) -> R."""
    s = np.asarray(s, dtype=float)
    return s / np.sqrt(1.0 - (s / a) ** 2)


def minkowski_phi_inv(v, a: float = 1.0):
    v = np.asarray(v, dtype=float)
    return v / np.sqrt(1.0 + (v / a) ** 2)


def make_minkowski(
    f: Callable[[float, np.ndarray], np.ndarray],
    a: float = 1.0,
    ubar_samples=None,
    T: float = TWO_PI,
    df: Callable[[float, float], float] | None = None,
    name: str = "minkowski",
) -> PlanarSystem:
    """(phi(u'))' + f(t, u) = 0 around a T-periodic solution ubar, with f truncated at |u| = L.

    ``f`` must accept arrays in its second argument. ``df`` is the partial
    derivative in u; a central difference is used when it is omitted.
    """
    if not a > 0:
        raise ConfigError("a must be positive")
    if ubar_samples is None:
        ubar = TrigPoly.constant(0.0, T)
        dubar = ubar
    else:
        ubar = SampledTable(T, tuple(ubar_samples))
        spline = ubar._spline
        dubar = CallableFunction(T, lambda t: float(spline(t % T, 1)))
        d2 = lambda t: float(spline(t % T, 2))  # noqa: E731
    ts = np.linspace(0.0, T, 400, endpoint=False)
    up = np.array([dubar(float(t)) for t in ts])
    if np.any(np.abs(up) >= a):
        raise NotASolution("|ubar'| must stay below a")
    ub = np.array([ubar(float(t)) for t in ts])
    if ubar_samples is None:
        resid = np.abs([float(np.asarray(f(float(t), np.array([0.0])))[0]) for t in ts])
    else:
        dphi = (1.0 - (up / a) ** 2) ** -1.5
        upp = np.array([d2(float(t)) for t in ts])
        fv = np.array([float(np.asarray(f(float(t), np.array([u])))[0]) for t, u in zip(ts, ub)])
        resid = np.abs(dphi * upp + fv)
    if resid.max() > 1e-8:
        raise NotASolution(f"ubar leaves a residual of {resid.max():.2e}")
    L = float(np.max(np.abs(ub))) + 2.0 * a * T

    def ft(t, u):
        return f(t, np.clip(u, -L, L))

    def vbar(t):
        return float(minkowski_phi(dubar(t), a))

    def vf(t, z):
        x, y = z[0], z[1]
        vb, ub_t = vbar(t), ubar(t)
        dx = minkowski_phi_inv(y + vb, a) - minkowski_phi_inv(vb, a)
        dy = -ft(t, x + ub_t) + ft(t, np.asarray(ub_t))
        return np.stack([dx, dy])

    if df is None:

        def df(t, u):
            h = 1e-6 * (1.0 + abs(u))
            return float((np.asarray(f(t, np.array([u + h]))) - np.asarray(f(t, np.array([u - h]))))[0] / (2 * h))

    A = CallableFunction(T, lambda t: df(t, ubar(t)))
    C = CallableFunction(T, lambda t: float((1.0 + (vbar(t) / a) ** 2) ** -1.5))
    if ubar_samples is None:
        # ubar = 0 gives constant-in-u linearization data; keep exact trig form when possible
        A0 = [df(float(t), 0.0) for t in ts]
        if np.ptp(A0) < 1e-12:
            A = TrigPoly.constant(A0[0], T)
        C = TrigPoly.constant(1.0, T)
    S0 = CoeffPath(T, A, TrigPoly.constant(0.0, T), C)
    zero = CoeffPath.constant(0.0, 0.0, 0.0, T)
    sys = PlanarSystem(name, T, vf, S0, zero, params={"a": a, "L": L, "T": T})
    sys.check()
    return sys


# -- name registry -----------------------------------------------------------


def _hill(q=0.0, T=TWO_PI):
    return make_hill(q, T)


def _saturating(q0=9.0, T=TWO_PI):
    return make_saturating_scalar(q0, T)


def _lotka(alpha=1.0, beta=1.0, T=TWO_PI):
    return make_lotka_volterra_log(alpha, beta, T)


def _minkowski(c=1.0, a=1.0, T=TWO_PI, kind="linear"):
    """Minkowski demos around ubar = 0: f = c u (linear) or f = c u / (1 + u^2) (saturating)."""
    if kind == "linear":
        return make_minkowski(lambda t, u: c * u, a, None, T, df=lambda t, u: c, name="minkowski")
    if kind == "saturating":
        return make_minkowski(lambda t, u: c * u / (1.0 + u * u), a, None, T, df=lambda t, u: c * (1 - u * u) / (1 + u * u) ** 2, name="minkowski")
    raise ConfigError(f"unknown minkowski kind {kind!r}")


def _constant(a=0.0, b=0.0, c=0.0, T=TWO_PI):
    return CoeffPath.constant(a, b, c, T)


CATALOG: dict[str, tuple[str, Callable]] = {
    "hill": ("linear", _hill),
    "mathieu": ("linear", make_mathieu),
    "rotation": ("linear", make_rotation),
    "saddle": ("linear", make_saddle),
    "constant": ("linear", _constant),
    "lotka_volterra": ("nonlinear", _lotka),
    "saturating": ("nonlinear", _saturating),
    "minkowski": ("nonlinear", _minkowski),
}


def build(name: str, **params):
    if name not in CATALOG:
        raise ConfigError(f"unknown catalog entry {name!r}; known: {sorted(CATALOG)}")
    kind, ctor = CATALOG[name]
    try:
        return ctor(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from exc


def kind_of(name: str) -> str:
    return CATALOG[name][0]
