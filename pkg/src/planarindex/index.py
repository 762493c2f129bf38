"""Winding-number classification, Conley-Zehnder index, rotation number, stability.

The classification joins two independent readings of the same system:

* the extremal winding numbers eta^- <= eta^+ of solutions over one period
  (integrated angle equation on an omega grid, refined in closed form);
* the Floquet multipliers of the monodromy matrix.

Resonant convention: for T-resonant systems (multipliers both 1) the index
is *defined* as i_T = 2l, where l is the integer touched by the winding
range. This follows the rotational behaviour of solutions. It is not the
convention that makes the index equal the Morse index in the resonant case.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .coeffs import CoeffPath
from .errors import (
    InconsistentClassification,
    NearDegenerate,
    ResonantInput,
    Undecidable,
)
from .flow import DEFAULT_TOL, TWO_PI, AngleMap, _angle_rates, integrate_fundamental, lift_polar_angle
from .integrate import integrate
from .sp1 import MultiplierClass, MultiplierPair, Stratum, lambda_stratum, multipliers, resonance_band

ETA_TOL = 1e-9
GRID_N = 256
K_DEFAULT = 200
MAX_DENOMINATOR = 64

CASE1_TAGS = ("h", "p-r", "p+r", "p*r")
CASE2_TAGS = ("h", "p-", "p+", "p*", "e-", "e+")


@dataclass(frozen=True)
class ClassLabel:
    case: int
    tag: str
    ell: int

    def __post_init__(self):
        allowed = CASE1_TAGS if self.case == 1 else CASE2_TAGS if self.case == 2 else ()
        if self.tag not in allowed:
            raise ValueError(f"tag {self.tag!r} not allowed in case {self.case}")

    @property
    def cz(self) -> int:
        return 2 * self.ell if self.case == 1 else 2 * self.ell + 1

    @property
    def elliptic(self) -> bool:
        return self.tag in ("e-", "e+")

    @property
    def hyperbolic(self) -> bool:
        return self.tag == "h"

    def __str__(self) -> str:
        return f"({self.case},{self.tag},l={self.ell})"


@dataclass(frozen=True)
class WindingExtrema:
    eta_minus: float
    eta_plus: float
    argmin: float
    argmax: float


@dataclass(frozen=True)
class RotationInterval:
    lo: float
    hi: float
    exact: bool = False

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= x <= self.hi + slack

    def as_list(self) -> list:
        return [self.lo, self.hi]


@dataclass(frozen=True)
class Analysis:
    """Everything read off the flow over [0, periods*T]."""

    coeffs: CoeffPath
    periods: int
    monodromy: np.ndarray = field(compare=False)
    pair: MultiplierPair
    extrema: WindingExtrema
    label: ClassLabel
    angle_map: AngleMap = field(compare=False, repr=False)

    @property
    def stratum(self) -> Stratum:
        return lambda_stratum(self.monodromy)


@dataclass(frozen=True)
class IndexReport:
    eta_minus: float
    eta_plus: float
    label: ClassLabel
    i_T: int
    rho_interval: RotationInterval
    m: float
    tau: float
    stability: str

    def to_dict(self) -> dict:
        return {
            "eta_minus": self.eta_minus,
            "eta_plus": self.eta_plus,
            "label": asdict(self.label),
            "i_T": self.i_T,
            "rho_interval": self.rho_interval.as_list(),
            "rho_exact": self.rho_interval.exact,
            "m": self.m,
            "tau": self.tau,
            "stability": self.stability,
        }


@dataclass(frozen=True)
class IterationReport:
    k: int
    i_kT: int
    predicted_label_kT: ClassLabel
    i_kT_bounds: tuple[int, int] | None = None
    schedule: str | None = None

    def to_dict(self) -> dict:
        d = {
            "k": self.k,
            "i_kT": self.i_kT,
            "predicted_label_kT": asdict(self.predicted_label_kT),
        }
        if self.i_kT_bounds is not None:
            d["i_kT_bounds"] = list(self.i_kT_bounds)
        if self.schedule is not None:
            d["schedule"] = self.schedule
        return d


# -- winding extrema ---------------------------------------------------------


def _sweep(S: CoeffPath, omegas: np.ndarray, periods: int, tol: float):
    """Integrate M and the angle equation for every omega in one pass."""
    n = len(omegas)

    def rhs(t, y):
        a, b, c = S.entries(t)
        m11, m12, m21, m22 = y[:4]
        dtheta, dlogr = _angle_rates(a, b, c, y[4 : 4 + n])
        out = np.empty_like(y)
        out[:4] = (b * m11 + c * m21, b * m12 + c * m22, -a * m11 - b * m21, -a * m12 - b * m22)
        out[4 : 4 + n] = dtheta
        out[4 + n :] = dlogr
        return out

    y0 = np.concatenate([[1.0, 0.0, 0.0, 1.0], omegas, np.zeros(n)])
    # the error norm is an RMS over all components; keep M from being diluted by the angles
    tols = np.full(4 + 2 * n, tol)
    tols[:4] = tol * math.sqrt(4.0 / (4 + 2 * n))
    traj = integrate(rhs, 0.0, y0, periods * S.period, rtol=tols, atol=tols)
    y = traj.y_end
    return y[:4].reshape(2, 2), y[4 : 4 + n]


def _refine_extrema(amap: AngleMap, grid: np.ndarray, eta: np.ndarray, refine_tol: float) -> WindingExtrema:
    n = len(grid)
    step = math.pi / n
    best_lo = (float(eta.min()), float(grid[int(eta.argmin())]))
    best_hi = (float(eta.max()), float(grid[int(eta.argmax())]))
    span = best_hi[0] - best_lo[0]
    if span < 1e-14:
        return WindingExtrema(best_lo[0], best_hi[0], best_lo[1], best_hi[1])
    # r^2(omega) = A + B cos(2 omega + phi), so eta has one min and one max per pi
    for i, sign in ((int(eta.argmin()), -1), (int(eta.argmax()), 1)):
        a, b = grid[i] - step, grid[i] + step
        da, db = amap.eta_derivative(a), amap.eta_derivative(b)
        if sign * da > 0 and sign * db < 0:
            w = brentq(amap.eta_derivative, a, b, xtol=refine_tol)
        else:
            res = minimize_scalar(
                lambda x: -sign * amap.eta(x), bounds=(a, b), method="bounded", options={"xatol": refine_tol}
            )
            w = float(res.x)
        v = float(amap.eta(w))
        if sign < 0 and v < best_lo[0]:
            best_lo = (v, float(np.mod(w, math.pi)))
        if sign > 0 and v > best_hi[0]:
            best_hi = (v, float(np.mod(w, math.pi)))
    return WindingExtrema(best_lo[0], best_hi[0], best_lo[1], best_hi[1])


def extrema_of_map(amap: AngleMap, grid_n: int = GRID_N, refine_tol: float = 1e-12) -> WindingExtrema:
    grid = np.arange(grid_n) * (math.pi / grid_n)
    return _refine_extrema(amap, grid, np.asarray(amap.eta(grid)), refine_tol)


@lru_cache(maxsize=512)
def _profile(S: CoeffPath, periods: int, grid_n: int, refine_tol: float, tol: float):
    grid = np.arange(grid_n) * (math.pi / grid_n)
    m, theta = _sweep(S, grid, periods, tol)
    # anchor at the best conditioned direction: errors in theta grow like 1/r^2
    rel = AngleMap(m, 0.0)
    r2 = rel.radius_sq(grid)
    b = int(np.argmax(r2))
    amap = AngleMap(m, theta[b] - rel.theta(grid[b]))
    eta = (theta - grid) / TWO_PI
    # the closed form lift must reproduce the integrated grid where that is well conditioned
    gap = float(np.max(np.abs(amap.eta(grid) - eta) * np.minimum(1.0, r2)))
    if gap > max(1e-7, 1e3 * tol * periods):
        raise InconsistentClassification(f"angle lift and monodromy disagree by {gap:.2e}")
    return m, amap, _refine_extrema(amap, grid, eta, refine_tol)


def winding_extrema(
    S: CoeffPath,
    grid_n: int = GRID_N,
    refine_tol: float = 1e-12,
    periods: int = 1,
    tol: float = DEFAULT_TOL,
) -> WindingExtrema:
    """min and max over omega in [0, pi) of the winding number over [0, periods*T]."""
    if grid_n < 16:
        raise ValueError("grid_n must be at least 16")
    return _profile(S, periods, grid_n, refine_tol, tol)[2]


# -- classification ----------------------------------------------------------


def _half_integer_hits(ex: WindingExtrema, eta_tol: float) -> list[int]:
    """Twice the values h in Z/2 with eta^- - tol <= h <= eta^+ + tol."""
    lo = math.ceil(2 * (ex.eta_minus - eta_tol))
    hi = math.floor(2 * (ex.eta_plus + eta_tol))
    return list(range(lo, hi + 1))


def label_from_winding(ex: WindingExtrema, eta_tol: float = ETA_TOL) -> ClassLabel:
    hits = _half_integer_hits(ex, eta_tol)
    if not hits:
        ell = math.floor(ex.eta_minus)
        tag = "e-" if ex.eta_plus < ell + 0.5 else "e+"
        return ClassLabel(2, tag, ell)
    if len(hits) > 1:
        raise InconsistentClassification(f"winding range [{ex.eta_minus}, {ex.eta_plus}] meets {len(hits)} levels of Z/2")
    h2 = hits[0]
    level = h2 / 2
    at_lo = abs(ex.eta_minus - level) <= eta_tol
    at_hi = abs(ex.eta_plus - level) <= eta_tol
    if h2 % 2 == 0:
        suffix, case, ell = "r", 1, h2 // 2
    else:
        suffix, case, ell = "", 2, (h2 - 1) // 2
    if at_lo and at_hi:
        tag = "p*"
    elif at_hi:
        tag = "p-"
    elif at_lo:
        tag = "p+"
    else:
        return ClassLabel(case, "h", ell)
    return ClassLabel(case, tag + suffix, ell)


def _expected_kind(label: ClassLabel) -> MultiplierClass:
    if label.elliptic:
        return MultiplierClass.ELLIPTIC
    if label.hyperbolic:
        return MultiplierClass.HYPERBOLIC
    return MultiplierClass.PARABOLIC_PLUS if label.case == 1 else MultiplierClass.PARABOLIC_MINUS


def _distance_to_half_integers(x: float) -> float:
    return abs(2 * x - round(2 * x)) / 2


def joint_label(ex: WindingExtrema, pair: MultiplierPair, eta_tol: float = ETA_TOL) -> ClassLabel:
    label = label_from_winding(ex, eta_tol)
    kind = _expected_kind(label)
    sign_ok = True
    if kind is MultiplierClass.HYPERBOLIC and pair.kind is kind:
        sign_ok = (pair.trace > 0) == (label.case == 1)
    if pair.kind is kind and sign_ok:
        return label
    band = resonance_band(pair.trace)
    near_trace = min(abs(pair.trace - 2), abs(pair.trace + 2)) < 1e3 * band
    near_eta = min(_distance_to_half_integers(ex.eta_minus), _distance_to_half_integers(ex.eta_plus)) < 1e3 * eta_tol
    msg = f"winding says {label}, multipliers say {pair.kind.value} (tr={pair.trace!r})"
    if near_trace or near_eta:
        raise NearDegenerate(msg)
    raise InconsistentClassification(msg)


def analyze(
    S: CoeffPath,
    periods: int = 1,
    grid_n: int = GRID_N,
    refine_tol: float = 1e-12,
    tol: float = DEFAULT_TOL,
) -> Analysis:
    m, amap, ex = _profile(S, periods, grid_n, refine_tol, tol)
    pair = multipliers(m)
    return Analysis(S, periods, m, pair, ex, joint_label(ex, pair), amap)


def classify(S: CoeffPath, periods: int = 1, tol: float = DEFAULT_TOL) -> ClassLabel:
    return analyze(S, periods, tol=tol).label


def cz_index(S: CoeffPath, periods: int = 1, tol: float = DEFAULT_TOL) -> int:
    return classify(S, periods, tol).cz


def cz_index_via_polar(S: CoeffPath, periods: int = 1, tol: float = DEFAULT_TOL) -> int:
    """Index from the lifted clockwise angle of the orthogonal polar factor of M(t)."""
    path = integrate_fundamental(S, periods * S.period, tol)
    stratum = lambda_stratum(path.terminal)
    if stratum is Stratum.ZERO:
        raise ResonantInput("M(T) lies on the resonant surface")
    vartheta = float(lift_polar_angle(path)[-1, 1])
    if stratum is Stratum.MINUS:
        ell = round(vartheta / TWO_PI)
        if abs(vartheta - TWO_PI * ell) >= 0.5 * math.pi:
            raise InconsistentClassification(f"polar angle {vartheta:.4f} outside every even window")
        return 2 * ell
    return 2 * math.floor(vartheta / TWO_PI) + 1


# -- stability ---------------------------------------------------------------


def stability_of(label: ClassLabel) -> str:
    if label.elliptic:
        return "strongly_stable"
    if label.tag.startswith("p*"):
        return "stable"
    return "unstable"


def stability(S: CoeffPath, tol: float = DEFAULT_TOL) -> str:
    return stability_of(classify(S, tol=tol))


def stability_via_second_iterate(S: CoeffPath, tol: float = DEFAULT_TOL) -> str:
    m1 = analyze(S, 1, tol=tol).monodromy
    m2 = analyze(S, 2, tol=tol).monodromy
    if lambda_stratum(m1) is Stratum.ZERO or lambda_stratum(m2) is Stratum.ZERO:
        raise ResonantInput("system is T- or 2T-resonant")
    return "stable" if cz_index(S, 1, tol) % 2 == 1 and cz_index(S, 2, tol) % 2 == 1 else "unstable"


# -- rotation number and mean index ------------------------------------------


def rotation_number(S: CoeffPath, K: int = K_DEFAULT, tol: float = DEFAULT_TOL) -> RotationInterval:
    """Certified interval for the rotation number.

    If the winding range over one period touches a level l in Z/2 the value
    is exactly l. Otherwise |eta_KT(0) - K rho| < 1 gives an interval of
    width 2/K around eta_KT(0)/K, where eta_KT(0) is obtained by iterating
    the one-period angle lift K times.
    """
    if K < 1:
        raise ValueError("K must be a positive integer")
    an = analyze(S, 1, tol=tol)
    hits = _half_integer_hits(an.extrema, ETA_TOL)
    if hits:
        v = hits[0] / 2
        return RotationInterval(v, v, exact=True)
    eta_k = an.angle_map.iterate(0.0, K) / TWO_PI
    return RotationInterval(eta_k / K - 1.0 / K, eta_k / K + 1.0 / K)


def _label_at_multiple(an: Analysis, k: int, grid_n: int = GRID_N) -> ClassLabel:
    """Label over [0, kT] from the k-fold composed one-period lift."""
    base = an.angle_map
    if an.label.elliptic:
        sched = schedule(commensurability(an.pair.angle), k)
        if sched != "elliptic":
            # M(kT) = +-I exactly, so eta_kT is one constant in Z/2
            eta = base.iterate(0.0, k) / TWO_PI
            h2 = round(2 * eta)
            if abs(2 * eta - h2) > 1e-6 * k:
                raise InconsistentClassification(f"eta_kT = {eta} is not in Z/2 although M(kT) = +-I")
            if (h2 % 2 == 0) != (sched == "parabolic_plus"):
                raise InconsistentClassification(f"eta_kT = {eta} contradicts the schedule {sched}")
            return ClassLabel(1, "p*r", h2 // 2) if h2 % 2 == 0 else ClassLabel(2, "p*", (h2 - 1) // 2)
    mk = np.linalg.matrix_power(an.monodromy, k)
    anchor = base.iterate(0.0, k)
    ex = extrema_of_map(_ComposedMap(base, k, mk, anchor), grid_n)
    return joint_label(ex, multipliers(mk))


class _ComposedMap(AngleMap):
    def __init__(self, base: AngleMap, k: int, mk: np.ndarray, anchor: float):
        super().__init__(mk, anchor)
        self.base, self.k = base, k

    def theta(self, omega):
        w = np.asarray(omega, dtype=float)
        for _ in range(self.k):
            w = np.asarray(self.base.theta(w))
        return float(w) if w.ndim == 0 else w

    def eta_derivative(self, omega):
        w = np.asarray(omega, dtype=float)
        d = np.ones_like(w)
        for _ in range(self.k):
            d = d / self.base.radius_sq(w)
            w = np.asarray(self.base.theta(w))
        return (d - 1.0) / TWO_PI


def index_at_multiple(S: CoeffPath, k: int, tol: float = DEFAULT_TOL) -> int:
    """i_kT: closed formulas for hyperbolic/parabolic systems, composed lift otherwise."""
    an = analyze(S, 1, tol=tol)
    if not an.label.elliptic:
        return _hp_iterate(an.label, k)[0]
    return _label_at_multiple(an, k).cz


def mean_index(S: CoeffPath, K: int = K_DEFAULT, tol: float = DEFAULT_TOL) -> float:
    rho = rotation_number(S, K, tol)
    m = 2.0 * rho.mid
    if rho.exact:
        return m
    half = max(K // 2, 1)
    if K > half:
        i_full, i_half = index_at_multiple(S, K, tol), index_at_multiple(S, half, tol)
        slope = (i_full - i_half) / (K - half)
        # |i_kT - k m| < 3 for every k and |m_hat - m| <= 2/K
        if abs(slope - m) > 6.0 / (K - half) + 2.0 / K:
            raise InconsistentClassification(f"index slope {slope} disagrees with 2 rho = {m}")
    return m


# -- iteration ---------------------------------------------------------------


def _hp_iterate(label: ClassLabel, k: int) -> tuple[int, ClassLabel]:
    ell = label.ell
    if label.case == 1:
        return 2 * k * ell, ClassLabel(1, label.tag, k * ell)
    if k % 2 == 0:
        i_k = 2 * (k * ell + k // 2)
        tag = "h" if label.hyperbolic else label.tag + "r"
        return i_k, ClassLabel(1, tag, k * ell + k // 2)
    i_k = 2 * (k * ell + (k - 1) // 2) + 1
    return i_k, ClassLabel(2, label.tag, k * ell + (k - 1) // 2)


def commensurability(phi: float, max_denominator: int = MAX_DENOMINATOR, tol: float = 1e-9) -> Fraction | None:
    """p/q with phi = pi p/q, or None when no such fraction with q <= max_denominator fits."""
    x = phi / math.pi
    frac = Fraction(x).limit_denominator(max_denominator)
    if frac.denominator >= 2 and abs(x - frac) < tol:
        return frac
    return None


def schedule(frac: Fraction | None, k: int) -> str:
    if frac is None or k % frac.denominator:
        return "elliptic"
    p = frac.numerator
    if p % 2 == 0 or (k // frac.denominator) % 2 == 0:
        return "parabolic_plus"
    return "parabolic_minus"


def iterate_index(S: CoeffPath, k: int, tol: float = DEFAULT_TOL) -> IterationReport:
    if k < 1:
        raise ValueError("k must be a positive integer")
    an = analyze(S, 1, tol=tol)
    label = an.label
    if not label.elliptic:
        i_k, predicted = _hp_iterate(label, k)
        return IterationReport(k, i_k, predicted)
    ell = label.ell
    bounds = (2 * k * ell + 1, 2 * k * ell + k) if label.tag == "e-" else (2 * k * ell + k, 2 * k * ell + 2 * k - 1)
    direct = analyze(S, k, tol=tol).label
    i_k = direct.cz
    if not bounds[0] <= i_k <= bounds[1]:
        raise InconsistentClassification(f"i_kT={i_k} violates elliptic iteration bounds {bounds}")
    frac = commensurability(an.pair.angle)
    sched = schedule(frac, k)
    expected = {
        "elliptic": MultiplierClass.ELLIPTIC,
        "parabolic_plus": MultiplierClass.PARABOLIC_PLUS,
        "parabolic_minus": MultiplierClass.PARABOLIC_MINUS,
    }[sched]
    if _expected_kind(direct) is not expected:
        raise InconsistentClassification(f"kT label {direct} contradicts commensurability schedule {sched}")
    return IterationReport(k, i_k, direct, bounds, sched)


# -- rotation versus winding -------------------------------------------------


def _decide_from_interval(rho: RotationInterval, x: float) -> str | None:
    if rho.exact:
        return "equal" if rho.lo == x else ("less" if rho.lo < x else "greater")
    if rho.hi < x:
        return "less"
    if rho.lo > x:
        return "greater"
    return None


def rotation_vs_winding(S: CoeffPath, k: int, j: int, tol: float = DEFAULT_TOL, K: int = K_DEFAULT) -> str:
    """Compare rho with j/k through the extrema of eta_kT."""
    an = analyze(S, k, tol=tol)
    ex = an.extrema
    x = j / k
    near = abs(ex.eta_plus - j) <= ETA_TOL or abs(ex.eta_minus - j) <= ETA_TOL
    if near:
        verdict = None
    elif ex.eta_plus < j:
        verdict = "less"
    elif ex.eta_minus > j:
        verdict = "greater"
    elif j - 1 < ex.eta_minus and ex.eta_plus < j + 1:
        verdict = "equal"
    else:
        raise InconsistentClassification(f"eta_kT range [{ex.eta_minus}, {ex.eta_plus}] too wide")
    by_interval = _decide_from_interval(rotation_number(S, K, tol), x)
    if verdict is None:
        if an.pair.kind is MultiplierClass.PARABOLIC_PLUS:
            # multiplier 1 over [0, kT]: some solution winds exactly j times
            verdict = "equal"
        elif by_interval is not None:
            verdict = by_interval
        else:
            raise Undecidable(f"j/k={x} inside the rotation interval and eta_kT touches {j}")
    if by_interval is not None and by_interval != verdict:
        raise InconsistentClassification(f"winding test says {verdict}, rotation interval says {by_interval}")
    return verdict


# -- full report -------------------------------------------------------------


def index_report(S: CoeffPath, K: int = K_DEFAULT, tol: float = DEFAULT_TOL) -> IndexReport:
    an = analyze(S, 1, tol=tol)
    label = an.label
    rho = rotation_number(S, K, tol)
    m = mean_index(S, K, tol)
    if label.elliptic:
        tau = rho.mid - label.ell
    else:
        tau = 0.0 if label.case == 1 else 0.5
    return IndexReport(
        an.extrema.eta_minus,
        an.extrema.eta_plus,
        label,
        label.cz,
        rho,
        m,
        tau,
        stability_of(label),
    )
