import math

import pytest

sphere2b = pytest.importorskip("sphere2b")


def test_version():
    assert sphere2b.__version__ == "0.1.0"


def test_polynomial_field_conserves_energy():
    s = [0.7, -0.2, 0.9, 1.8, -0.6]
    f = sphere2b.poly_rhs(s)
    h = 1e-6
    plus = [a + h * b for a, b in zip(s, f)]
    minus = [a - h * b for a, b in zip(s, f)]
    rate = (sphere2b.hamiltonian_poly(plus) - sphere2b.hamiltonian_poly(minus)) / (2 * h)
    assert abs(rate) < 1e-7


def test_invariant_plane_collision_time():
    r = sphere2b.integrate("invariant-plane", [0.0, 0.0], 0.0, 10.0, rtol=1e-12, atol=1e-14, sign=1, C=9.0)
    assert r["termination"] == "collision"
    assert r["t_star"] == pytest.approx(1.5498457018136995, abs=1e-8)
    assert r["components"] == ["xi", "p"]


def test_topology_reference_pairs():
    assert sphere2b.classify_isoenergy(2.7, 6.02)["holes"] == 4
    assert sphere2b.classify_isoenergy(2.25, 6.07)["holes"] == 2
    assert sphere2b.classify_isoenergy(20.0, 1.0)["holes"] == 0
    assert sphere2b.classify_isoenergy(1.0, 0.0)["label"] == "Circle"


def test_chart1_census():
    eq = sphere2b.divisor_equilibria("1")
    full = [e for e in eq if e["full_equilibrium"]]
    assert len(full) == 4
    node = [e for e in full if e["class"] == "attracting_node"][0]
    assert node["angle2"] == pytest.approx(math.pi / 2, abs=1e-9)


def test_collision_seed_passes():
    seed = sphere2b.default_collision_seeds()[0]
    v = sphere2b.verify_collision(seed)
    assert v["pass"]
    assert v["xi_end"] >= 1e6
    assert not sphere2b.verify_collision(seed, negative_control=True)["pass"]


def test_errors_are_raised():
    with pytest.raises(ValueError):
        sphere2b.integrate("nope", [0.0], 0.0, 1.0)
    with pytest.raises(ValueError):
        sphere2b.integrate("reduced", [1, 0, 0, 3.5, 0], 0.0, 1.0)
