import math

import numpy as np
import pytest
from conftest import TWO_PI, rotation_system, zero_system

from planarindex import (
    PlanarSystem,
    RotationInterval,
    TrigPoly,
    candidates,
    find_orbits,
    k_star_scan,
    poincare_map,
    twist_radii,
    verify_hsub,
    winding,
)
from planarindex.catalog import make_hill
from planarindex.errors import GapUncertified, NoneWithinHorizon, NoOrbitFound
from planarindex.subharmonics import hsub_radius, image_area, poincare_batch


def point(v):
    return RotationInterval(v, v, exact=True)


def js(cands):
    return [c.j for c in cands]


def test_candidates_examples():
    assert js(candidates(point(2.5), point(0), 4)) == [1, 3, 5, 7, 9]
    assert candidates(point(0.2), point(0), 1) == []
    assert sorted(js(candidates(point(0), point(-1.2), 3))) == [-2, -1]
    with pytest.raises(GapUncertified):
        candidates(RotationInterval(0.1, 0.3), RotationInterval(0.25, 0.5), 3)


def test_candidates_are_sound():
    rng = np.random.default_rng(2)
    for _ in range(40):
        a = rng.uniform(-3, 3)
        w = rng.uniform(0, 0.05)
        b = a + rng.choice([-1, 1]) * rng.uniform(0.2, 3)
        r0, ri = RotationInterval(a - w, a + w), point(b)
        lo, hi = sorted((a, b))
        for k in range(1, 12):
            try:
                out = candidates(r0, ri, k)
            except GapUncertified:
                continue
            for c in out:
                assert c.coprime and c.nodal_certified and c.j != 0
                assert math.gcd(k, abs(c.j)) == 1
                # still strictly inside with half-width intervals
                half = RotationInterval(a - w / 2, a + w / 2)
                assert c.j in js(candidates(half, ri, k))
                assert lo < c.j / k < hi


def test_k_star_examples():
    assert k_star_scan(point(1.3), point(0), 20).k_star == 1
    rep = k_star_scan(point(0.4), point(0), 20)
    assert rep.k_star == 3
    assert rep.counts[1] == rep.counts[2] == 0
    with pytest.raises(GapUncertified):
        k_star_scan(point(0), point(0), 20)
    with pytest.raises(NoneWithinHorizon):
        k_star_scan(point(0.01), point(0), 20)


def test_k_star_reports_both_counts():
    rep = k_star_scan(point(2.5), point(0), 12)
    assert rep.counts[4] == 5
    # the closed-form count differs from the enumeration in general
    assert any(rep.counts[k] != rep.phi_counts[k] for k in rep.counts)


def test_poincare_map_of_linear_system():
    S = make_hill(TrigPoly(TWO_PI, (2.0, 0.5)))
    lin = PlanarSystem.from_linear(S)
    z, rot = poincare_map(lin, 1, [0.0, 0.0])
    assert np.all(z == 0) and math.isnan(rot)
    for r in (1e-3, 1.0, 1e3):
        for omega in (0.2, 1.7):
            z0 = r * np.array([math.cos(omega), -math.sin(omega)])
            _, rot = poincare_map(lin, 2, z0)
            assert rot == pytest.approx(winding(S, 2, omega), abs=1e-8)


def test_poincare_map_small_orbits_follow_linearization(saturating):
    omega = 0.9
    z0 = 1e-4 * np.array([math.cos(omega), -math.sin(omega)])
    for k in (1, 2):
        _, rot = poincare_map(saturating, k, z0)
        assert abs(rot - winding(saturating.S0, k, omega)) < 1e-2


def test_twist_examples(saturating):
    r_hat, r_check = twist_radii(saturating, 2, 1)
    assert r_hat <= 1e-1 and r_check >= 10
    lin = PlanarSystem.from_linear(rotation_system(TWO_PI * 0.3))
    with pytest.raises(GapUncertified):
        twist_radii(lin, 3, 1)


def test_verify_hsub_examples(lotka):
    assert verify_hsub(PlanarSystem.from_linear(zero_system(TWO_PI)), 3, 5.0)
    assert not verify_hsub(PlanarSystem.from_linear(rotation_system(TWO_PI)), 1, 2.0)
    assert verify_hsub(lotka, 1, hsub_radius(lotka, 1))


def test_find_orbits_saturating(saturating):
    k, j = 2, 1
    r_hat, r_check = twist_radii(saturating, k, j)
    orbits = find_orbits(saturating, k, j, r_hat, r_check, tol=1e-8)
    assert len(orbits) >= 2
    for o in orbits:
        assert o.residual <= 1e-8 and o.winding == j and o.minimal_period
        # tighter re-integration keeps it a fixed point with the same winding
        z, rot = poincare_map(saturating, k, o.z0, tol=1e-12)
        assert np.linalg.norm(z - np.array(o.z0)) <= 1e-7
        assert round(rot) == j
        samples = o.orbit_samples
        assert samples[0, 1:] == pytest.approx(samples[-1, 1:], abs=1e-6)
    # pairwise non-equivalent under time shifts
    for a in range(len(orbits)):
        for b in range(a + 1, len(orbits)):
            xa = orbits[a].orbit_samples[:-1, 1:]
            xb = orbits[b].orbit_samples[:-1, 1:]
            per = len(xa) // k
            seps = [np.max(np.linalg.norm(xa - np.roll(xb, -l * per, axis=0), axis=1)) for l in range(k)]
            assert min(seps) >= 1e-4


def test_find_orbits_rejects_j_zero(saturating):
    with pytest.raises(ValueError):
        find_orbits(saturating, 1, 0, 0.1, 10.0)


def test_find_orbits_reports_failure(saturating):
    # an annulus that misses the twist region cannot produce seeds
    with pytest.raises(NoOrbitFound):
        find_orbits(saturating, 2, 1, 1e-3, 2e-3, n_radii=4, n_angles=8)


def test_area_preserved(saturating):
    rng = np.random.default_rng(0)
    for _ in range(4):
        c = rng.uniform(-2, 2, size=(2, 1))
        quad = c + 1e-2 * np.array([[0, 1, 1.2, -0.1], [0, 0.1, 1, 0.9]])
        a0, a1 = image_area(saturating, 1, quad)
        assert a1 == pytest.approx(a0, rel=1e-5)


def test_saturating_candidate_count_grows(saturating):
    rep = k_star_scan(saturating.rho0(), saturating.rhoinf(), 30)
    for k in range(2, 31):
        assert any(rep.counts[k] >= rep.counts[kk] for kk in range(1, k // 2 + 1))
    assert rep.counts[30] > rep.counts[3]


def test_poincare_batch_rejects_origin(saturating):
    with pytest.raises(ValueError):
        poincare_batch(saturating, 1, np.zeros((2, 1)))
