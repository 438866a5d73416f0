import json
import math

import numpy as np
import pytest

import sseplab


def test_stationary_profile_four_sites():
    assert np.allclose(sseplab.stationary_profile(4, 0.0, 0.2, 0.8), [0.2, 0.35, 0.5, 0.65, 0.8])
    assert np.allclose(sseplab.stationary_profile(4, 1.0, 0.2, 0.8)[1:4], [0.44, 0.5, 0.56])


def test_stationary_correlation_four_sites():
    assert sseplab.stationary_correlation(4, 0.0, 0.2, 0.8)[1, 2] == pytest.approx(-0.015, abs=1e-15)
    assert sseplab.stationary_correlation(4, 1.0, 0.2, 0.8)[2, 1] == pytest.approx(-0.008, abs=1e-15)


def test_oracle_matches_closed_forms():
    rho, phi = sseplab.oracle_stationary(7, 0.5, 0.2, 0.8)
    assert np.max(np.abs(np.array(rho) - sseplab.stationary_profile(7, 0.5, 0.2, 0.8))) < 1e-9
    assert np.max(np.abs(phi - sseplab.stationary_correlation(7, 0.5, 0.2, 0.8))) < 1e-9


def test_evolve_profile_against_oracle():
    rho, _ = sseplab.oracle_evolve([1, 0], 0.0, 0.2, 0.8, 0.1)
    out = sseplab.evolve_profile([0.2, 1.0, 0.0, 0.8], 0.0, 0.2, 0.8, [0.1])
    assert np.allclose(out[0], rho, atol=1e-6)


def test_evolve_correlation_zero_at_equilibrium():
    phis = sseplab.evolve_correlation([0.4] * 9, np.zeros((9, 9)), 1.0, 0.4, 0.4, [0.5])
    assert np.max(np.abs(phis[0])) < 1e-15


def test_spectral_helpers():
    assert sseplab.psi(1.0) == pytest.approx(math.exp(-1), abs=1e-15)
    assert abs(sseplab.cosine_sum_check(64)) < 1e-12
    assert sseplab.heat_kernel_dirichlet(2, 2, 0.0, 6) == pytest.approx(1.0, abs=1e-12)
    assert sseplab.double_time_integral(1, 1.0, 16) <= 2 / 16**2
    assert sseplab.duhamel_check([1, 0, 0, 1], 2.0, 0.2, 0.8, 0.2, 0.7, 1) < 1e-8


def test_walks():
    assert sseplab.occupation_time(5, 0.0, 2, 3) == pytest.approx(1.0, abs=1e-12)
    assert sseplab.occupation_time(5, 1.0, 1, 4) <= 5.25
    assert sseplab.holder_delta(3.5) == 1.0
    m = sseplab.coupling_margins(6, 1.0, [0.01, 0.02])
    assert set(m) == {"general", "diagonal", "integrated", "first_violation_t"}


def test_robin_roots():
    sym, anti, interlaced = sseplab.robin_roots(2.0, 4)
    assert sym[0] == pytest.approx(0.8603336, abs=1e-7)
    assert anti[0] == pytest.approx(2.0287578, abs=1e-7)
    assert interlaced
    lam = sseplab.robin_eigenvalues(2.0, 4)
    assert lam[0] == pytest.approx(4 * sym[0] ** 2)


def test_continuum_predictors():
    v = sseplab.stationary_covariance(0.0, 0.2, 0.8, [1.0], [1.0])
    u = np.linspace(0, 1, 200001)
    r = 0.2 + 0.6 * u
    trapezoid = getattr(np, "trapezoid", None) or np.trapz
    bulk = trapezoid(r * (1 - r) * 2 * np.sin(np.pi * u) ** 2, u)
    assert v == pytest.approx(bulk - 0.36 / np.pi**2, abs=1e-9)
    assert sseplab.ou_equilibrium_variance(2.0, 0.5, 1, 0.3) == pytest.approx(0.25, abs=1e-7)


def test_monte_carlo_is_reproducible():
    a = sseplab.estimate_two_point(5, 0.0, 0.2, 0.8, 0.1, 200, seed=7, initial=[1, 0, 1, 0], jobs=1)
    b = sseplab.estimate_two_point(5, 0.0, 0.2, 0.8, 0.1, 200, seed=7, initial=[1, 0, 1, 0], jobs=2)
    assert a["profile"] == b["profile"]
    assert a["replicas"] == 200


def test_run_config_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "mode": "verify", "grid": {"n": [2], "theta": [0]}}))
    assert sseplab.run("verify", str(cfg), out=str(tmp_path / "out")) == 2
    assert not (tmp_path / "out").exists()


def test_run_verify(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "mode": "verify", "grid": {"n": [3, 4], "theta": [0, 2]}, "times": [0.1]}))
    assert sseplab.run("verify", str(cfg), jobs=1, out=str(tmp_path / "out")) == 0
    assert "CHECKS" in (tmp_path / "out" / "report.txt").read_text()
    assert sseplab.version().startswith("sseplab ")
