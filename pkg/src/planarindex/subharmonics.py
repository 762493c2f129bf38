"""Subharmonic solutions of nonlinear planar Hamiltonian systems.

Pipeline: compare the rotation numbers of the linearizations at zero and at
infinity, enumerate admissible (k, j), check the twist of the kT Poincare map
on a small and a large circle, then locate fixed points of the map with
winding number j.

Fixed points are seeded from the curve where Rot_k = j: on every ray of the
seed grid the radius where Rot_k crosses j is found by bisection, and a fixed
point lies wherever the radial displacement changes sign along that curve.
Seeds are then polished by damped Newton with a finite-difference Jacobian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .coeffs import CoeffPath
from .errors import BlowUp, GapUncertified, NoneWithinHorizon, NoOrbitFound, TwistNotFound
from .index import RotationInterval, rotation_number
from .integrate import integrate

INT_TOL = 1e-11
INNER_LADDER = tuple(10.0 ** -e for e in range(1, 9))
OUTER_LADDER = tuple(10.0**e for e in range(1, 9))
NEWTON_MAX = 50
BISECT_STEPS = 30


@dataclass(frozen=True)
class PlanarSystem:
    """z' = vector_field(t, z) with z of shape (2, ...) and J z' = grad H(t, z)."""

    name: str
    T: float
    vector_field: Callable[[float, np.ndarray], np.ndarray] = field(compare=False, repr=False)
    S0: CoeffPath = field(compare=False, repr=False)
    Sinf: CoeffPath | None = field(default=None, compare=False, repr=False)
    sublinear: bool = False
    params: dict = field(default_factory=dict, compare=False)
    safety: float = 1e12
    certificate: RotationInterval | None = None

    @classmethod
    def from_linear(cls, S: CoeffPath, name: str = "linear") -> "PlanarSystem":
        """The linear system J z' = S(t) z, with the same linearization at zero and infinity."""

        def vf(t, z):
            a, b, c = S.entries(t)
            return np.stack([b * z[0] + c * z[1], -a * z[0] - b * z[1]])

        return cls(name, S.period, vf, S, S)

    def rho0(self, K: int = 200) -> RotationInterval:
        return rotation_number(self.S0, K)

    def rhoinf(self, K: int = 200) -> RotationInterval:
        """Rotation interval at infinity; a sublinear system winds less than once there."""
        if self.Sinf is None:
            return RotationInterval(0.0, 0.0, exact=True)
        return rotation_number(self.Sinf, K)

    def linearization_error(self, r: float, t: float = 0.0, n: int = 16) -> float:
        ang = 2 * math.pi * np.arange(n) / n
        z = r * np.stack([np.cos(ang), -np.sin(ang)])
        a, b, c = self.S0.entries(t)
        lin = np.array([[b, c], [-a, -b]]) @ z
        return float(np.max(np.linalg.norm(self.vector_field(t, z) - lin, axis=0)) / r)

    def check(self, n_times: int = 100, seed: int = 0) -> None:
        """Equilibrium at the origin and a linearization error that shrinks at least linearly."""
        rng = np.random.default_rng(seed)
        ts = rng.uniform(0.0, self.T, n_times)
        zero = np.zeros((2, 1))
        worst = max(float(np.max(np.abs(self.vector_field(t, zero)))) for t in ts)
        if worst > 1e-12:
            raise ValueError(f"{self.name}: field at the origin is {worst:.2e}, not an equilibrium")
        for t in ts[:5]:
            errs = [self.linearization_error(10.0**-e, t) for e in (3, 4, 5, 6)]
            for e_big, e_small in zip(errs, errs[1:]):
                if e_big < 1e-9:
                    break
                if e_small > e_big * 3.0 / 10.0:
                    raise ValueError(f"{self.name}: linearization error {errs} does not decay with the radius")


@dataclass(frozen=True)
class SubharmonicCandidate:
    k: int
    j: int
    coprime: bool
    nodal_certified: bool

    def to_dict(self) -> dict:
        return {"k": self.k, "j": self.j, "coprime": self.coprime, "nodal_certified": self.nodal_certified}


@dataclass
class OrbitResult:
    z0: tuple
    residual: float
    winding: int
    minimal_period: bool
    orbit_samples: np.ndarray = field(repr=False)
    rot: float = 0.0

    def summary(self) -> dict:
        return {
            "z0": list(self.z0),
            "residual": self.residual,
            "winding": self.winding,
            "minimal_period": self.minimal_period,
        }


@dataclass(frozen=True)
class KStarReport:
    k_star: int
    horizon: int
    counts: dict
    phi_counts: dict


# -- candidates --------------------------------------------------------------


def _gap(rho0: RotationInterval, rhoinf: RotationInterval) -> tuple[float, float]:
    lower, upper = sorted((rho0, rhoinf), key=lambda r: r.lo)
    if not lower.hi < upper.lo:
        raise GapUncertified(f"rotation intervals [{rho0.lo}, {rho0.hi}] and [{rhoinf.lo}, {rhoinf.hi}] overlap")
    return lower.hi, upper.lo


def candidates(rho0: RotationInterval, rhoinf: RotationInterval, k: int) -> list[SubharmonicCandidate]:
    """Coprime j != 0 with j/k strictly inside the gap between the two intervals."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    lo, hi = _gap(rho0, rhoinf)
    out = []
    for j in range(math.floor(k * lo) + 1, math.ceil(k * hi)):
        if j == 0 or math.gcd(k, abs(j)) != 1:
            continue
        if lo < j / k < hi:
            out.append(SubharmonicCandidate(k, j, True, True))
    return out


def _euler_phi(n: int) -> int:
    return sum(1 for i in range(1, n + 1) if math.gcd(i, n) == 1) if n > 0 else 0


def k_star_scan(rho0: RotationInterval, rhoinf: RotationInterval, horizon: int) -> KStarReport:
    """Smallest K such that every k in [K, horizon] has a candidate.

    Alongside the enumerated counts, ``phi_counts`` records phi(floor(k (b - l)))
    with (l, b) the integer floor of the lower gap end and the upper gap end.
    This closed-form count ignores coprimality with k and is reported only for
    comparison.
    """
    if horizon < 1:
        raise ValueError("horizon must be a positive integer")
    lo, hi = _gap(rho0, rhoinf)
    counts = {k: len(candidates(rho0, rhoinf, k)) for k in range(1, horizon + 1)}
    ell = math.floor(lo)
    phi_counts = {k: _euler_phi(math.floor(k * (hi - ell))) for k in counts}
    k_star = None
    for k in range(horizon, 0, -1):
        if counts[k] == 0:
            break
        k_star = k
    if k_star is None:
        raise NoneWithinHorizon(f"no candidates at k = {horizon}")
    return KStarReport(k_star, horizon, counts, phi_counts)


# -- Poincare map ------------------------------------------------------------


def _rhs(sys: PlanarSystem):
    def rhs(t, s):
        x, y = s[0], s[1]
        dz = sys.vector_field(t, s[:2])
        # clockwise angle of (x, y) = r (cos th, -sin th)
        dth = (y * dz[0] - x * dz[1]) / (x * x + y * y)
        return np.concatenate([dz, dth[None]])

    return rhs


def _polar_angle(z: np.ndarray) -> np.ndarray:
    return np.arctan2(-z[1], z[0])


def poincare_batch(sys: PlanarSystem, k: int, Z, tol: float = INT_TOL, dense: bool = False):
    """Images of the columns of Z (shape (2, n)) under the kT map, their Rot_k, and the trajectory."""
    Z = np.asarray(Z, dtype=float).reshape(2, -1)
    if np.any(np.hypot(Z[0], Z[1]) == 0):
        raise ValueError("the origin is an equilibrium; Rot_k is undefined there")
    s0 = np.vstack([Z, _polar_angle(Z)[None]])
    r0 = np.hypot(Z[0], Z[1])
    # absolute tolerance on position follows the size of each orbit; the solver's
    # RMS error norm is shared by all columns, so tighten it with the batch size
    tol = tol / math.sqrt(Z.shape[1])
    atol = np.vstack([tol * r0, tol * r0, np.full_like(r0, tol)])
    traj = integrate(_rhs(sys), 0.0, s0, k * sys.T, rtol=tol, atol=atol, dense=dense, bound=sys.safety)
    end = traj.y_end
    rot = (end[2] - s0[2]) / (2 * math.pi)
    return end[:2], rot, traj


def poincare_map(sys: PlanarSystem, k: int, z0, tol: float = INT_TOL) -> tuple[np.ndarray, float]:
    z0 = np.asarray(z0, dtype=float)
    if not np.any(z0):
        return z0.copy(), float("nan")
    img, rot, _ = poincare_batch(sys, k, z0.reshape(2, 1), tol)
    return img[:, 0], float(rot[0])


def _circle(r: float, m: int, phase: float = 0.0) -> np.ndarray:
    ang = phase + 2 * math.pi * np.arange(m) / m
    return r * np.stack([np.cos(ang), -np.sin(ang)])


def circle_rotations(sys: PlanarSystem, k: int, r: float, grid_m: int = 32, tol: float = INT_TOL) -> np.ndarray:
    return poincare_batch(sys, k, _circle(r, grid_m), tol)[1]


# -- twist -------------------------------------------------------------------


def _orientation(sys: PlanarSystem, k: int, j: int) -> int:
    """+1 when small solutions rotate more than j/k and large ones less."""
    r0, ri = sys.rho0(), sys.rhoinf()
    x = j / k
    if r0.lo > x and ri.hi < x:
        return 1
    if r0.hi < x and ri.lo > x:
        return -1
    raise GapUncertified(f"j/k = {x} is not strictly between the rotation numbers at zero and infinity")


def twist_radii(sys: PlanarSystem, k: int, j: int, grid_m: int = 32, tol: float = INT_TOL) -> tuple[float, float]:
    sign = _orientation(sys, k, j)
    margin = max(10 * tol, 1e-6)

    def holds(r, want):
        try:
            rot = circle_rotations(sys, k, r, grid_m, tol)
        except BlowUp:
            return False
        return bool(np.all(want * (rot - j) > margin))

    r_hat = next((r for r in INNER_LADDER if holds(r, sign)), None)
    if r_hat is None:
        raise TwistNotFound(f"Rot_{k} never clears {j} on the inner circles")
    r_check = next((r for r in OUTER_LADDER if holds(r, -sign)), None)
    if r_check is None:
        raise TwistNotFound(f"Rot_{k} never drops past {j} on the outer circles")
    return r_hat, r_check


def verify_hsub(sys: PlanarSystem, k: int, R: float, grid_m: int = 32, margin: float = 1e-3, tol: float = INT_TOL) -> bool:
    try:
        rot = circle_rotations(sys, k, R, grid_m, tol)
    except BlowUp:
        return False
    return bool(np.max(np.abs(rot)) < 1.0 - margin)


def hsub_radius(sys: PlanarSystem, k: int, grid_m: int = 32, tol: float = INT_TOL) -> float | None:
    """First radius of the outer ladder where |Rot_k| < 1 on the whole circle."""
    return next((R for R in OUTER_LADDER if verify_hsub(sys, k, R, grid_m, tol=tol)), None)


# -- fixed points ------------------------------------------------------------


def _residual_map(sys, k, tol):
    def F(Z):
        img, rot, _ = poincare_batch(sys, k, Z, tol)
        return img - Z, rot

    return F


LINE_SEARCH = 0.5 ** np.arange(14)


def _newton(F, Z: np.ndarray, target: float) -> tuple[np.ndarray, np.ndarray]:
    """Damped Newton on F(z) = 0 for every column of Z at once.

    The Jacobian is a forward difference with step 1e-6 (1 + |z|). All step
    lengths 1, 1/2, 1/4, ... are tried in one batch and the longest one that
    lowers the residual is taken; a column stops when none does.
    """
    Z = np.array(Z, dtype=float)
    n = Z.shape[1]
    fz, _ = F(Z)
    res = np.linalg.norm(fz, axis=0)
    alive = np.isfinite(res)
    nl = len(LINE_SEARCH)
    for _ in range(NEWTON_MAX):
        act = np.flatnonzero(alive & (res > target))
        if not len(act):
            break
        za, fa = Z[:, act], fz[:, act]
        h = 1e-6 * (1.0 + np.linalg.norm(za, axis=0))
        fp, _ = F(np.hstack([za + h * [[1.0], [0.0]], za + h * [[0.0], [1.0]]]))
        m = len(act)
        jac = np.empty((m, 2, 2))
        jac[:, :, 0] = ((fp[:, :m] - fa) / h).T
        jac[:, :, 1] = ((fp[:, m:] - fa) / h).T
        ok = np.abs(np.linalg.det(jac)) > 1e-300
        step = np.zeros((2, m))
        step[:, ok] = -np.linalg.solve(jac[ok], fa.T[ok][..., None])[..., 0].T
        cand = za[:, :, None] + step[:, :, None] * LINE_SEARCH
        flat = cand.reshape(2, -1)
        keep = np.hypot(flat[0], flat[1]) > 0
        fc = np.full_like(flat, np.inf)
        try:
            fc[:, keep], _ = F(flat[:, keep])
        except BlowUp:
            pass
        rc = np.linalg.norm(fc, axis=0).reshape(m, nl)
        better = ok[:, None] & (rc < res[act][:, None])
        for i, idx in enumerate(act):
            hit = np.flatnonzero(better[i])
            if not len(hit):
                alive[idx] = False
                continue
            b = hit[0]
            Z[:, idx] = cand[:, i, b]
            fz[:, idx] = fc.reshape(2, m, nl)[:, i, b]
            res[idx] = rc[i, b]
    return Z, res


def _curve_seeds(sys, k, j, sign, radii, n_angles, tol) -> list[np.ndarray]:
    """Points where the radial displacement changes sign along the curve Rot_k = j."""
    nr = len(radii)
    ang = 2 * math.pi * np.arange(n_angles) / n_angles
    dirs = np.stack([np.cos(ang), -np.sin(ang)])
    Z = (dirs[:, None, :] * radii[None, :, None]).reshape(2, -1)
    _, rot, _ = poincare_batch(sys, k, Z, tol)
    rot = rot.reshape(nr, n_angles)
    above = sign * (rot - j) > 0
    lo = np.full(n_angles, np.nan)
    hi = np.full(n_angles, np.nan)
    for a in range(n_angles):
        idx = np.flatnonzero(above[:-1, a] & ~above[1:, a])
        if len(idx):
            lo[a], hi[a] = math.log(radii[idx[0]]), math.log(radii[idx[0] + 1])
    ok = np.isfinite(lo)
    if not np.any(ok):
        return []
    a_ok = np.flatnonzero(ok)
    lo, hi, d = lo[ok], hi[ok], dirs[:, ok]
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        _, r_mid, _ = poincare_batch(sys, k, d * np.exp(mid), tol)
        up = sign * (r_mid - j) > 0
        lo, hi = np.where(up, mid, lo), np.where(up, hi, mid)
    pts = d * np.exp(0.5 * (lo + hi))
    img, _, _ = poincare_batch(sys, k, pts, tol)
    g = np.log(np.hypot(img[0], img[1])) - np.log(np.hypot(pts[0], pts[1]))
    seeds = []
    n_ok = len(a_ok)
    for i in range(n_ok):
        i2 = (i + 1) % n_ok
        if n_ok < 2 or (a_ok[i2] - a_ok[i]) % n_angles != 1:
            continue
        if g[i] == 0 or g[i] * g[i2] < 0:
            w = g[i] / (g[i] - g[i2]) if g[i] != g[i2] else 0.5
            seeds.append((1 - w) * pts[:, i] + w * pts[:, i2])
    return seeds


def _divisors(k: int) -> list[int]:
    return [d for d in range(1, k) if k % d == 0]


def _orbit_record(sys, k, z, tol, n_per_period=64) -> tuple[np.ndarray, float, np.ndarray]:
    _, rot, traj = poincare_batch(sys, k, z[:, None], tol, dense=True)
    ts = np.linspace(0.0, k * sys.T, k * n_per_period + 1)
    xy = traj.sample(ts)[:, :2, 0]
    shifts = np.array([traj(l * sys.T)[:2, 0] for l in range(k)])
    return np.column_stack([ts, xy]), float(rot[0]), shifts


def find_orbits(
    sys: PlanarSystem,
    k: int,
    j: int,
    r_hat: float,
    r_check: float,
    tol: float = 1e-8,
    n_radii: int = 32,
    n_angles: int = 64,
    int_tol: float = INT_TOL,
) -> list[OrbitResult]:
    if j == 0:
        raise ValueError("j = 0 is excluded")
    sign = _orientation(sys, k, j)
    F = _residual_map(sys, k, int_tol)
    radii = np.geomspace(r_hat, r_check, n_radii)
    seeds = _curve_seeds(sys, k, j, sign, radii, n_angles, int_tol)
    orbits: list[OrbitResult] = []
    shift_sets: list[np.ndarray] = []
    if seeds:
        Z, res_all = _newton(F, np.stack(seeds, axis=1), tol)
    for i in range(len(seeds)):
        z = Z[:, i]
        if not res_all[i] <= tol or not np.all(np.isfinite(z)):
            continue
        samples, rot, shifts = _orbit_record(sys, k, z, int_tol)
        # residual of the single orbit, independent of the batch it was polished in
        res = float(np.linalg.norm(samples[-1, 1:] - z))
        if res > tol or abs(rot - j) > 1e-6:
            continue
        scale = 1.0 + np.linalg.norm(z)
        if any(np.min(np.linalg.norm(s - z, axis=1)) < 1e-4 * scale for s in shift_sets):
            continue
        gap = min((np.linalg.norm(shifts[d] - z) for d in _divisors(k)), default=np.inf)
        minimal = bool(math.gcd(k, abs(j)) == 1 and gap > 1e3 * tol * scale)
        orbits.append(OrbitResult(tuple(float(v) for v in z), res, j, minimal, samples, rot))
        shift_sets.append(shifts)
    if not orbits:
        raise NoOrbitFound(f"no fixed point of the {k}T map with winding {j} ({len(seeds)} seeds)")
    orbits.sort(key=lambda o: (round(math.hypot(*o.z0), 9), float(np.mod(np.arctan2(-o.z0[1], o.z0[0]), 2 * math.pi))))
    return orbits


def polygon_area(pts: np.ndarray) -> float:
    x, y = pts
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def image_area(
    sys: PlanarSystem,
    k: int,
    corners: np.ndarray,
    per_edge: int = 32,
    tol: float = INT_TOL,
    rel: float = 1e-9,
    max_per_edge: int = 4096,
) -> tuple[float, float]:
    """Areas of a quadrilateral (corners shape (2, 4)) and of its image under the kT map.

    The image boundary is curved, so the inscribed polygon area carries an
    O(n^-2) error in the number n of boundary samples. The sample count is
    doubled with Richardson extrapolation until two estimates agree to ``rel``.
    """
    corners = np.asarray(corners, dtype=float)

    def polygon_pair(n):
        s = np.linspace(0.0, 1.0, n, endpoint=False)
        edges = [corners[:, i, None] + (corners[:, (i + 1) % 4] - corners[:, i])[:, None] * s for i in range(4)]
        boundary = np.concatenate(edges, axis=1)
        img, _, _ = poincare_batch(sys, k, boundary, tol)
        return polygon_area(boundary), polygon_area(img)

    a0, coarse = polygon_pair(per_edge)
    n, prev = per_edge, None
    while n < max_per_edge:
        n *= 2
        fine = polygon_pair(n)[1]
        est = (4.0 * fine - coarse) / 3.0
        if prev is not None and abs(est - prev) <= rel * abs(est):
            return a0, est
        coarse, prev = fine, est
    return a0, prev
