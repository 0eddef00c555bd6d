import numpy as np
import pytest

import pncp


def test_simulate_is_seeded():
    p = pncp.ModelParams(mu=1.0, sigma_eta_sq=0.1, sigma_eps_sq=0.1, phi=0.9)
    a = pncp.simulate(p, 200, 7)
    assert a.shape == (200,)
    np.testing.assert_array_equal(a, pncp.simulate(p, 200, 7))
    assert not np.array_equal(a, pncp.simulate(p, 200, 8))


def test_invalid_params_raise():
    with pytest.raises(ValueError):
        pncp.ModelParams(phi=1.0)


def test_w_opt_at_phi_zero():
    p = pncp.ModelParams(sigma_eta_sq=1.0, sigma_eps_sq=1.0, phi=0.0)
    np.testing.assert_allclose(pncp.w_opt_location(p, 6), 0.5)
    assert pncp.bounds(p) == pytest.approx((0.5, 0.5))
    assert abs(pncp.rate_location(p, pncp.w_opt_location(p, 6))) < 1e-12


def test_partial_scheme_converges_in_one_step():
    p = pncp.ModelParams(mu=1.0, sigma_eta_sq=1.0, sigma_eps_sq=0.1, phi=0.95)
    y = pncp.simulate(p, 500, 3)
    fast = pncp.algorithm1(y, 0.0, p, "partial")
    slow = pncp.algorithm1(y, 0.0, p, "noncentered")
    assert fast.converged and slow.converged
    assert fast.iterations <= 2 < slow.iterations
    assert fast.mu[1] == pytest.approx(fast.final.mu, abs=1e-10)
    assert np.all(np.diff(slow.loglik) >= -1e-10)


def test_full_fit_and_vb():
    p = pncp.ModelParams(mu=1.0, sigma_eta_sq=0.1, sigma_eps_sq=0.1, phi=0.95)
    y = pncp.simulate(p, 1000, 5)
    r = pncp.algorithm3(y)
    assert r.converged
    assert r.final_loglik == pytest.approx(pncp.log_likelihood(r.final, y))
    assert np.all(np.diff(r.cycle_loglik) >= -1e-10)
    vb = pncp.vb_fit(y, p, 0.0, pncp.w_opt_location(p, len(y)))
    assert vb["sweeps"] == 1


def test_gibbs_chain_and_scale_opt():
    p = pncp.ModelParams(mu=1.0, sigma_eta_sq=0.1, sigma_eps_sq=0.1, phi=0.5)
    y = pncp.simulate(p, 50, 2)
    draws = pncp.gibbs_chain(y, p, 0.0, np.zeros(50), 2000, 100, 11)
    assert draws.shape == (1900,)
    assert -1.0 < pncp.lag1_autocorr(draws) < 1.0
    s = pncp.scale_opt(pncp.simulate(p, 2000, 4), p)
    assert abs(s["a_opt"] - pncp.a_hat_asymptotic(p.gamma, p.phi)) < 0.2
    assert s["w_opt"].shape == (2000,)
