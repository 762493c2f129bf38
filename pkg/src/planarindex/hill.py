"""Hill equation u'' + (lambda + q(t)) u = 0: periodic eigenvalues and Morse indices.

Eigenvalues are located by shooting on the rotation number. For fixed l the
set of lambda where the rotation number equals l is a closed interval
[lambda_{2l-1}, lambda_{2l}] (a point when the eigenvalue is double; for
l = 0 it is the half line up to lambda_0). Its left end is the root of
eta^+(lambda) = l and its right end the root of eta^-(lambda) = l.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coeffs import CoeffPath, PeriodicFunction, TrigPoly
from .errors import BracketNotFound, InconsistentClassification, InsufficientSpectrum, NearDegenerate, Undecidable
from .flow import DEFAULT_TOL
from .index import cz_index, rotation_vs_winding, winding_extrema

SWEEP_SAMPLES = 128
DOUBLE_TOL = 1e-7
SWEEP_GRID = 64


@dataclass(frozen=True)
class HillProblem:
    q: PeriodicFunction
    T: float

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if isinstance(self.q, (int, float)):
            object.__setattr__(self, "q", TrigPoly.constant(float(self.q), self.T))
        if abs(self.q.period - self.T) > 1e-12 * self.T:
            raise ValueError("q must have period T")

    @classmethod
    def constant(cls, q: float, T: float) -> "HillProblem":
        return cls(TrigPoly.constant(q, T), T)


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: tuple
    double: tuple
    morse: int | None = None
    morse_plus: int | None = None
    cz: int | None = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        d = {"eigenvalues": list(self.eigenvalues), "double": list(self.double)}
        if self.morse is not None:
            d.update(m_T=self.morse, m_T_plus=self.morse_plus, i_T=self.cz)
        return d


def hill_to_coeffpath(p: HillProblem, lam: float) -> CoeffPath:
    T = p.T
    return CoeffPath(T, p.q.shifted(lam), TrigPoly.constant(0.0, T), TrigPoly.constant(1.0, T))


def _extrema(p: HillProblem, lam: float, grid_n: int, tol: float) -> tuple[float, float]:
    ex = winding_extrema(hill_to_coeffpath(p, float(lam)), grid_n=grid_n, tol=tol)
    return ex.eta_minus, ex.eta_plus


def _root(fn, lams, values, level, what: str) -> float:
    above = np.flatnonzero(values >= level)
    if len(above) == 0 or above[0] == 0:
        raise BracketNotFound(f"sweep does not bracket {what}")
    i = above[0]
    return brentq(fn, lams[i - 1], lams[i], xtol=1e-13, rtol=4 * np.finfo(float).eps)


def periodic_eigenvalues(p: HillProblem, n_max: int, tol: float = DEFAULT_TOL) -> SpectrumReport:
    """lambda_0 < lambda_1 <= lambda_2 < ... < lambda_{2 n_max}."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    qn = p.q.sup_norm()
    lo = -qn - 1.0
    hi = (2 * math.pi * (n_max + 1) / p.T) ** 2 + qn + 1.0
    lams = np.linspace(lo, hi, SWEEP_SAMPLES)
    # bracketing only; roots are refined at full tolerance
    ext = np.array([_extrema(p, lam, SWEEP_GRID, max(tol, 1e-8)) for lam in lams])
    mids = ext.mean(axis=1)
    if np.any(np.diff(mids) < -1e-8):
        raise InconsistentClassification("winding numbers are not monotone in lambda on the sweep")

    def eta_minus(lam):
        return _extrema(p, lam, 256, tol)[0]

    def eta_plus(lam):
        return _extrema(p, lam, 256, tol)[1]

    eigs: list[float] = []
    flags: list[bool] = []
    for ell in range(n_max + 1):
        right = _root(lambda x: eta_minus(x) - ell, lams, ext[:, 0] - 1e-12, ell, f"the right end of level {ell}")
        if ell == 0:
            eigs.append(right)
            flags.append(False)
            _post_check(p, None, right, 0, tol)
            continue
        left = _root(lambda x: eta_plus(x) - ell, lams, ext[:, 1] - 1e-12, ell, f"the left end of level {ell}")
        dbl = abs(right - left) < DOUBLE_TOL
        if dbl:
            left = right = 0.5 * (left + right)
        _post_check(p, left, right, ell, tol)
        eigs += [left, right]
        flags += [dbl, dbl]
    return SpectrumReport(tuple(eigs), tuple(flags))


def _post_check(p: HillProblem, left, right, ell: int, tol: float) -> None:
    """Just outside the level-ell interval the rotation number must leave ell."""
    checks = [(right, +1, "greater")]
    if left is not None:
        checks.append((left, -1, "less"))
    for lam, side, want in checks:
        probe = lam + side * 1e-3 * (1.0 + abs(lam))
        try:
            got = rotation_vs_winding(hill_to_coeffpath(p, probe), 1, ell, tol)
        except (Undecidable, NearDegenerate):
            continue
        if got != want:
            raise InconsistentClassification(f"rotation is {got} than {ell} just past lambda={lam}")


def morse_indices(p: HillProblem, n_max: int | None = None, tol: float = DEFAULT_TOL, eig_tol: float = 1e-7):
    """(m_T, m_T_plus, i_T) and the spectrum used to count them."""
    if n_max is None:
        n_max = int(math.floor(p.T * math.sqrt(max(p.q.sup_norm(), 0.0)) / (2 * math.pi))) + 1
    spec = periodic_eigenvalues(p, n_max, tol)
    ev = np.array(spec.eigenvalues)
    if ev[-1] <= eig_tol:
        raise InsufficientSpectrum(f"largest computed eigenvalue {ev[-1]} is not positive; raise n_max")
    m = int(np.sum(ev < -eig_tol))
    mp = int(np.sum(ev <= eig_tol))
    i_t = cz_index(hill_to_coeffpath(p, 0.0), tol=tol)
    return SpectrumReport(spec.eigenvalues, spec.double, m, mp, i_t)
