import math

import numpy as np
import pytest

import renorm_nbody as rn


def unit_pair():
    q = np.array([[-0.5, 0.0, 0.0], [0.5, 0.0, 0.0]])
    v = np.zeros((2, 3))
    return [1.0, 1.0], q, v


def test_constants():
    c = rn.constants()
    assert c["lambda0"] == pytest.approx(0.244204, abs=1e-5)
    assert c["lambda_max"] < c["lambda_star"] < c["lambda0"]
    assert 0 < c["beta"] < c["lambda_max"]


def test_aux_and_eta():
    a = rn.aux_lambda_functions(0.0)
    assert a["alpha"] == 2.0
    assert rn.eta(0.05) > 0
    with pytest.raises(rn._core.DomainError):
        rn.aux_lambda_functions(0.2)


def test_L_bound_unit_pair():
    m, q, v = unit_pair()
    lam = rn.constants()["lambda0"]
    assert rn.L_bound(m, q, v, lam) == pytest.approx(1 / lam, rel=1e-12)


def test_s_value_scale_invariance():
    m, q, v = unit_pair()
    v = v + np.array([[0.0, 0.3, 0.0], [0.0, -0.3, 0.0]])
    a = rn.s_value("s1", m, q, v)
    b = rn.s_value("s1", m, 4 * q, 0.5 * v)
    assert a > 0 and b > 0
    assert rn.s_value("s0", m, q, v) == 1.0
    with pytest.raises(rn._core.ParseError):
        rn.s_value("s9", m, q, v)


def test_taylor_coeffs_shape_and_radius():
    m, q, v = unit_pair()
    cq, cv = rn.taylor_coeffs(m, q, v, order=30)
    assert cq.shape == (6, 31) and cv.shape == (6, 31)
    assert cq[0, 2] == pytest.approx(0.5)
    # free fall from rest at r = 1, total gm 2: collision at pi/4
    assert rn.radius_estimate(m, q, v, order=30) == pytest.approx(math.pi / 4, rel=0.02)


def test_conformal_round_trip():
    beta = rn.constants()["beta"]
    tau = complex(0.3, 0.5 * beta)
    assert abs(rn.conformal_map_inverse(rn.conformal_map(tau, beta), beta) - tau) < 1e-12


def test_problem_round_trip_and_integrate():
    p = rn.gen_binary_visitor(100.0)
    p2 = rn.parse_problem(p.to_json())
    assert p2.masses == p.masses
    np.testing.assert_array_equal(p2.q, p.q)
    out = rn.integrate(p, renorm="s1", mode="taylor", dtau=0.02, stride=10)
    assert out["t"][-1] == pytest.approx(p.t_span[1])
    rel = np.abs((out["energy"] - out["energy"][0]) / out["energy"][0])
    assert rel.max() < 1e-10
    assert out["q"].shape[1:] == (3, 3)


def test_radius_scan_and_strip_width():
    p = rn.gen_binary_visitor(100.0)
    scan = rn.radius_scan(p)
    assert scan.shape[1] == 5
    assert scan[:, 4].min() >= 0.9
    w = rn.strip_width(p, "s1")
    assert w["scaled_width"] == pytest.approx(w["width"] / w["T_j"])


def test_load_problem_errors(tmp_path):
    with pytest.raises(rn._core.ParseError):
        rn.load_problem(str(tmp_path / "missing.json"))
    path = tmp_path / "pyth.json"
    rn.gen_pythagorean().save(str(path))
    assert rn.load_problem(str(path)).name == "pythagorean"
