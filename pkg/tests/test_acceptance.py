"""Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.

Run on its own with ``pytest tests/test_acceptance.py -v -s`` or
``python3 tests/test_acceptance.py``.
"""
import math
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest
from conftest import battery, rotation_system, saddle_system
from scipy.linalg import expm

from planarindex import (
    ClassLabel,
    TrigPoly,
    classify,
    cz_index_via_polar,
    find_orbits,
    index_report,
    iterate_index,
    mean_index,
    monodromy,
    morse_indices,
    periodic_eigenvalues,
    poincare_map,
    rotation_number,
    rotation_vs_winding,
    twist_radii,
    verify_hsub,
)
from planarindex.catalog import make_hill, make_lotka_volterra_log, make_saturating_scalar
from planarindex.errors import NearDegenerate, Undecidable
from planarindex.flow import angle_lift_batch
from planarindex.hill import HillProblem
from planarindex.index import index_at_multiple
from planarindex.sp1 import J, MultiplierClass, Stratum, lambda_stratum, multipliers
from planarindex.subharmonics import candidates, hsub_radius, image_area

PI = math.pi
TWO_PI = 2 * PI
BUDGET = 60.0


RESULTS: list[str] = []


def _line(text: str) -> None:
    # echoed live and replayed in the terminal summary, which output capture cannot hide
    RESULTS.append(text)
    sys.__stdout__.write("\n" + text + "\n")
    sys.__stdout__.flush()


@contextmanager
def criterion(n: int, title: str, budget: float = BUDGET):
    t0 = time.perf_counter()
    try:
        yield
        dt = time.perf_counter() - t0
        assert dt < budget, f"took {dt:.1f}s, budget {budget:.0f}s"
    except BaseException as exc:
        _line(f"ACCEPTANCE {n:2d} FAIL  {title}  ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})")
        raise
    _line(f"ACCEPTANCE {n:2d} PASS  {title}  ({dt:.1f}s)")


def _nearly_resonant(S) -> bool:
    try:
        classify(S)
    except NearDegenerate:
        return True
    return False


# -- 1 -----------------------------------------------------------------------


def _oracle(S, T):
    """Label, i_T, rho, m, stability from the exponential and the closed-form angle."""
    a, c = S.a(0.0), S.c(0.0)
    m = expm(-J @ np.diag([a, c]) * T)
    tr = np.trace(m)
    if a == c == 1.0:
        # theta' = 1: eta is T / 2 pi for every initial angle
        eta = T / TWO_PI
        rho = eta
        twice = 2 * eta
        if abs(twice - round(twice)) < 1e-12:
            h = round(twice)
            label = ClassLabel(1, "p*r", h // 2) if h % 2 == 0 else ClassLabel(2, "p*", (h - 1) // 2)
            assert abs(abs(tr) - 2) < 1e-9
            stab = "stable"
        else:
            ell = math.floor(eta)
            label = ClassLabel(2, "e-" if eta - ell < 0.5 else "e+", ell)
            assert abs(tr) < 2
            stab = "strongly_stable"
    else:
        # saddle: the eigendirections of the symmetric monodromy do not move, so eta touches 0
        assert tr > 2 and np.allclose(m, m.T)
        label, rho, stab = ClassLabel(1, "h", 0), 0.0, "unstable"
    return label, label.cz, rho, 2 * rho, stab


def test_acceptance_01_constant_battery():
    cases = [(rotation_system(T), T) for T in (PI / 5, PI / 2, 2 * PI / 3, 2 * PI, 5 * PI / 2)]
    cases += [(saddle_system(T), T) for T in (0.5, 1.0, 3.0)]
    with criterion(1, "constant-coefficient oracle battery"):
        for S, T in cases:
            label, i_t, rho, m, stab = _oracle(S, T)
            rep = index_report(S, K=200)
            assert rep.label == label, (T, rep.label, label)
            assert rep.i_T == i_t
            assert rep.stability == stab
            r = rep.rho_interval
            assert r.lo - 1e-12 <= rho <= r.hi + 1e-12 and r.width <= 0.01 + 1e-12
            assert abs(rep.m - m) <= 0.01 + 1e-12


# -- 2 -----------------------------------------------------------------------


def test_acceptance_02_mean_index_equals_twice_rotation():
    with criterion(2, "m = 2 rho on 50 random systems"):
        checked = 0
        for S in battery(50, 7):
            if _nearly_resonant(S):
                continue
            rho = rotation_number(S)
            m = mean_index(S)
            assert abs(m - 2 * rho.mid) <= rho.width + 1e-6
            # independent reading: i_kT / k for large k
            k = 1000
            m_direct = index_at_multiple(S, k) / k
            assert abs(m_direct - 2 * rho.mid) <= rho.width + 1e-6, (m_direct, rho)
            checked += 1
        assert checked >= 45


# -- 3 -----------------------------------------------------------------------


def test_acceptance_03_dual_cz_methods():
    systems = battery(50, 7) + [rotation_system(T) for T in (PI / 5, PI / 2, 5 * PI / 2, 3 * PI)]
    systems += [saddle_system(T) for T in (0.5, 1.0, 3.0)]
    with criterion(3, "dual CZ methods and parity"):
        checked = 0
        for S in systems:
            stratum = lambda_stratum(monodromy(S))
            if stratum is Stratum.ZERO or _nearly_resonant(S):
                continue
            i_t = classify(S).cz
            assert cz_index_via_polar(S) == i_t
            assert (i_t % 2 == 0) == (stratum is Stratum.MINUS)
            checked += 1
        assert checked >= 50


# -- 4 -----------------------------------------------------------------------


def test_acceptance_04_iteration_formulas():
    hp = [saddle_system(T) for T in (0.5, 1.0, 3.0)]
    hp += [rotation_system(PI), rotation_system(2 * PI), rotation_system(3 * PI), make_hill(0.0)]
    hp += [S for S in battery(50, 7) if not _nearly_resonant(S) and not classify(S).elliptic][:12]
    with criterion(4, "iteration formulas, elliptic bounds, commensurability"):
        for S in hp:
            for k in range(1, 9):
                rep = iterate_index(S, k)
                direct = classify(S, periods=k)
                assert rep.i_kT == direct.cz, (k, rep, direct)
                assert rep.predicted_label_kT == direct
        for T in (PI / 5, PI / 2, 2 * PI / 3, 1.0, 5 * PI / 2):
            S = rotation_system(T)
            base = classify(S)
            for k in range(1, 31):
                rep = iterate_index(S, k)
                ell = base.ell
                lo, hi = (2 * k * ell + 1, 2 * k * ell + k) if base.tag == "e-" else (2 * k * ell + k, 2 * k * ell + 2 * k - 1)
                assert lo <= rep.i_kT <= hi
                assert rep.i_kT == classify(S, periods=k).cz
        rep = iterate_index(rotation_system(2 * PI / 3), 3)
        assert rep.schedule == "parabolic_plus"
        assert multipliers(monodromy(rotation_system(2 * PI / 3), 3)).kind is MultiplierClass.PARABOLIC_PLUS


# -- 5 -----------------------------------------------------------------------


def test_acceptance_05_angle_derivative():
    systems = battery(20, 23)
    rng = np.random.default_rng(5)
    h = 1e-5
    with criterion(5, "d theta / d omega = 1 / r^2 at 200 pairs"):
        worst = 0.0
        for S in systems:
            w = rng.uniform(0, TWO_PI, 10)
            th_p, _ = angle_lift_batch(S, w + h, S.period)
            th_m, _ = angle_lift_batch(S, w - h, S.period)
            _, r = angle_lift_batch(S, w, S.period)
            fd = (th_p - th_m) / (2 * h)
            worst = max(worst, float(np.max(np.abs(fd - 1 / r**2))))
        assert worst <= 1e-4, worst


# -- 6 -----------------------------------------------------------------------


def test_acceptance_06_hill_spectrum():
    with criterion(6, "Hill spectrum and Morse sandwich"):
        rep = periodic_eigenvalues(HillProblem.constant(0.0, TWO_PI), 2)
        assert np.allclose(rep.eigenvalues, [0, 1, 1, 4, 4], atol=1e-6)
        assert rep.double == (False, True, True, True, True)
        for q, want in ((1.0, (1, 3, 2)), (0.5, (1, 1, 1))):
            m = morse_indices(HillProblem.constant(q, TWO_PI))
            got = (m.morse, m.morse_plus, m.cz)
            assert got == want, (q, got)
            assert m.morse <= m.cz <= m.morse_plus


# -- 7 -----------------------------------------------------------------------


def test_acceptance_07_rotation_trichotomy():
    with criterion(7, "rotation vs winding trichotomy, 30 systems"):
        contradictions = 0
        for S in battery(30, 17):
            rho = rotation_number(S)
            for k in range(1, 6):
                for j in range(-6, 7):
                    x = j / k
                    try:
                        got = rotation_vs_winding(S, k, j)
                    except Undecidable:
                        assert rho.contains(x)
                        continue
                    if rho.exact:
                        want = "equal" if rho.lo == x else "less" if rho.lo < x else "greater"
                    elif rho.hi < x:
                        want = "less"
                    elif rho.lo > x:
                        want = "greater"
                    else:
                        continue
                    contradictions += got != want
        assert contradictions == 0


# -- 8 -----------------------------------------------------------------------


def _non_equivalent(orbits, k):
    for a in range(len(orbits)):
        for b in range(a + 1, len(orbits)):
            xa, xb = orbits[a].orbit_samples[:-1, 1:], orbits[b].orbit_samples[:-1, 1:]
            per = len(xa) // k
            seps = [np.max(np.linalg.norm(xa - np.roll(xb, -l * per, axis=0), axis=1)) for l in range(k)]
            if min(seps) < 1e-4:
                return False
    return True


def test_acceptance_08_saturating_hunt():
    with criterion(8, "saturating scalar subharmonic hunt", budget=600.0):
        sysm = make_saturating_scalar(TrigPoly(TWO_PI, (9.0, 2.7)), TWO_PI)
        r0, ri = sysm.rho0(), sysm.rhoinf()
        for k, j in ((2, 1), (3, 1), (3, 2)):
            assert j in [c.j for c in candidates(r0, ri, k)]
            r_hat, r_check = twist_radii(sysm, k, j)
            orbits = find_orbits(sysm, k, j, r_hat, r_check, tol=1e-8)
            assert len(orbits) >= 2, (k, j, len(orbits))
            for o in orbits:
                assert o.residual <= 1e-6 and o.winding == j and o.minimal_period
                _, rot = poincare_map(sysm, k, o.z0)
                assert abs(rot - j) < 1e-6
            assert _non_equivalent(orbits, k)


# -- 9 -----------------------------------------------------------------------


def test_acceptance_09_lotka_volterra():
    with criterion(9, "Lotka-Volterra certificate, sublinearity, orbit"):
        coef = TrigPoly(TWO_PI, (1.0, 0.5))
        sysm = make_lotka_volterra_log(coef, coef, TWO_PI)
        assert sysm.certificate.lo > 0
        for k in range(1, 6):
            R = hsub_radius(sysm, k)
            assert R is not None and verify_hsub(sysm, k, R)
        r0, ri = sysm.rho0(), sysm.rhoinf()
        k, j = 2, 1
        assert j in [c.j for c in candidates(r0, ri, k)]
        r_hat, r_check = twist_radii(sysm, k, j)
        orbits = find_orbits(sysm, k, j, r_hat, r_check, tol=1e-8, n_radii=16, n_angles=32)
        assert orbits and all(o.residual <= 1e-6 and o.winding == j for o in orbits)


# -- 10 ----------------------------------------------------------------------


def test_acceptance_10_area_preservation():
    coef = TrigPoly(TWO_PI, (1.0, 0.5))
    systems = [
        make_saturating_scalar(TrigPoly(TWO_PI, (9.0, 2.7)), TWO_PI),
        make_lotka_volterra_log(coef, coef, TWO_PI),
    ]
    rng = np.random.default_rng(10)
    with criterion(10, "area preservation of the Poincare map"):
        for sysm in systems:
            for _ in range(20):
                r, a = rng.uniform(0.1, 3.0), rng.uniform(0, TWO_PI)
                centre = r * np.array([[math.cos(a)], [-math.sin(a)]])
                quad = centre + 1e-2 * (np.array([[0, 1, 1, 0], [0, 0, 1, 1]]) + rng.uniform(-0.2, 0.2, (2, 4)))
                a0, a1 = image_area(sysm, 1, quad)
                assert abs(a1 - a0) <= 1e-5 * abs(a0), (sysm.name, a0, a1)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
