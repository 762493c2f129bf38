import math

import numpy as np
import pytest
from conftest import TWO_PI

from planarindex import PlanarSystem, TrigPoly, classify, monodromy, rotation_number
from planarindex.catalog import (
    CATALOG,
    build,
    kind_of,
    make_hill,
    make_lotka_volterra_log,
    make_mathieu,
    make_minkowski,
    make_saturating_scalar,
    minkowski_phi,
    minkowski_phi_inv,
)
from planarindex.errors import ConfigError, GapUncertified, NotASolution
from planarindex.subharmonics import candidates, poincare_batch


def test_hill_entries():
    assert make_hill(0.0).matrix(1.0) == pytest.approx(np.diag([0.0, 1.0]))
    w, T = 1.3, 2.0
    m = monodromy(make_hill(w * w, T))
    mu = np.linalg.eigvals(m)
    assert sorted(np.angle(mu)) == pytest.approx(sorted([-w * T, w * T]), abs=1e-9)


def test_mathieu_unperturbed_point():
    # delta = 1/4, eps = 0 sits on the boundary of the first tongue: M(2 pi) = -I
    m = monodromy(make_mathieu(0.25, 0.0))
    assert m == pytest.approx(-np.eye(2), abs=1e-9)
    assert classify(make_mathieu(0.25, 0.0)).tag == "p*"


def test_lotka_volterra():
    sys_ = make_lotka_volterra_log(1.0, 1.0)
    r = sys_.certificate
    assert r.exact and r.lo == 1.0
    coef = TrigPoly(TWO_PI, (1.0, 0.5))
    sys_ = make_lotka_volterra_log(coef, coef)
    assert sys_.certificate.lo > 0
    assert sys_.sublinear and sys_.rhoinf().hi == 0
    with pytest.raises(ConfigError):
        make_lotka_volterra_log(0.0, 1.0)
    with pytest.raises(ConfigError):
        make_lotka_volterra_log(TrigPoly(TWO_PI, (0.0, 1.0)), 1.0)


def test_saturating():
    sys_ = make_saturating_scalar(9.0)
    r = sys_.rho0()
    assert r.exact and r.lo == 3.0
    assert sys_.rhoinf().lo == sys_.rhoinf().hi == 0.0
    sys_ = make_saturating_scalar(TrigPoly(TWO_PI, (9.0, 2.7)))
    assert abs(sys_.rho0().mid - 3) < 0.05
    flat = make_saturating_scalar(0.0)
    with pytest.raises(GapUncertified):
        candidates(flat.rho0(), flat.rhoinf(), 2)


def test_minkowski_phi():
    s = np.linspace(-0.99, 0.99, 11)
    assert minkowski_phi_inv(minkowski_phi(s)) == pytest.approx(s)
    assert minkowski_phi(0.3, 2.0) == pytest.approx(0.3 / math.sqrt(1 - 0.0225))
    assert np.all(np.abs(minkowski_phi_inv(np.array([-1e3, 1e3]), 0.5)) < 0.5)


def test_minkowski_examples():
    lin = make_minkowski(lambda t, u: u, 1.0, df=lambda t, u: 1.0)
    assert lin.S0.matrix(0.7) == pytest.approx(np.eye(2))
    sat = build("minkowski", c=4.0, kind="saturating")
    r = sat.rho0()
    assert r.exact and r.lo == 2.0
    with pytest.raises(NotASolution):
        make_minkowski(lambda t, u: u + 1.0, 1.0)
    with pytest.raises(NotASolution):
        make_minkowski(lambda t, u: u, 1.0, ubar_samples=[0.0, 0.5, 0.0, -0.5])


def test_minkowski_speed_bound():
    a = 1.0
    sat = build("minkowski", c=4.0, kind="saturating", a=a)
    Z = np.array([[0.5, 5.0, 50.0], [0.0, -3.0, 20.0]])
    _, _, traj = poincare_batch(sat, 1, Z, dense=True)
    for t in np.linspace(0, TWO_PI, 50):
        z = traj(t)[:2]
        xdot = sat.vector_field(t, z)[0]
        # ubar = 0, so x' = phi^{-1}(y) stays inside the open interval (-a, a)
        assert np.all(np.abs(xdot) < a - 1e-9)


@pytest.mark.parametrize("name", sorted(CATALOG))
def test_every_entry_builds(name):
    obj = build(name)
    if kind_of(name) == "nonlinear":
        assert isinstance(obj, PlanarSystem)
        rng = np.random.default_rng(1)
        zero = np.zeros((2, 1))
        for t in rng.uniform(0, obj.T, 100):
            assert np.max(np.abs(obj.vector_field(t, zero))) <= 1e-12
        errs = [obj.linearization_error(10.0**-e, 0.3) for e in (3, 4, 5, 6)]
        for big, small in zip(errs, errs[1:]):
            if big > 1e-9:
                assert small <= big * 3 / 10
    else:
        assert rotation_number(obj).width <= 0.01


def test_build_rejects_unknown():
    with pytest.raises(ConfigError):
        build("nope")
    with pytest.raises(ConfigError):
        build("hill", bogus=1)
