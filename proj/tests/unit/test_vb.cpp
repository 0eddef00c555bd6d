#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "pncp/em.hpp"
#include "pncp/vb.hpp"
#include "pncp/workparam.hpp"

using namespace pncp;

TEST_SUITE("vb") {

TEST_CASE("w_opt gives the exact marginal of mu in one sweep") {
  for (double phi : {-0.95, -0.5, 0.1, 0.5, 0.95}) {
    for (double g : {0.1, 1.0, 10.0}) {
      for (std::size_t n : {3u, 20u, 50u}) {
        const ModelParams p{1.0, 0.1 * g, 0.1, phi};
        const auto y = simulate(p, n, 13 + n);
        const Parametrization par{0.0, w_opt_location(p, n)};
        const VbState s = vb_fit(y, p, par);
        CHECK(s.converged);
        CHECK(s.sweeps == 1);
        CHECK(std::abs(s.m_mu - oracle::gls_mu(y, p)) < 1e-8);
        CHECK(std::abs(s.var_mu - oracle::gls_var(p, n)) < 1e-8);
        CHECK(std::abs(vb_rate(p, par)) < 1e-12);
      }
    }
  }
}

TEST_CASE("tau at w_opt is 1'S1, not (1'S^-1 1)^-1") {
  const ModelParams p{1.0, 0.01, 0.1, -0.95};
  const std::size_t n = 10;
  const double t = tau(p, w_opt_location(p, n));
  CHECK(t == doctest::Approx(oracle::one_s_one(p, n)).epsilon(1e-10));
  CHECK(std::abs(t - 1.0 / oracle::one_sinv_one(p, n)) > 1.0);
}

TEST_CASE("posterior cross covariance vanishes at w_opt") {
  for (double a : {0.0, 0.5, 1.0}) {
    const ModelParams p{1.0, 0.3, 0.1, 0.7};
    const std::size_t n = 15;
    const auto y = simulate(p, n, 3);
    const oracle::Posterior post = oracle::dense_joint_posterior(y, p, a, w_opt_location(p, n));
    double m = 0.0;
    for (std::size_t t = 0; t < n; ++t) m = std::max(m, std::abs(post.cov(t, n)));
    CHECK(m < 1e-10);
    const oracle::Posterior c = oracle::dense_joint_posterior(y, p, a, std::vector<double>(n, 0.0));
    CHECK(std::abs(c.cov(0, n)) > 1e-3);
  }
}

TEST_CASE("scalar contraction at w = 1") {
  const double g = 2.0;
  const ModelParams p{0.0, g, 1.0, 0.0};
  const auto y = simulate(p, 25, 4);
  const Parametrization par = Parametrization::noncentered(25);
  VbState s = vb_init(y, p, par);
  s.m_mu += 3.0;
  std::vector<double> m{s.m_mu};
  for (int i = 0; i < 3; ++i) {
    s = vb_iterate(y, p, par, s);
    m.push_back(s.m_mu);
  }
  CHECK((m[2] - m[1]) / (m[1] - m[0]) == doctest::Approx(g / (1.0 + g)).epsilon(1e-10));
  CHECK((m[3] - m[2]) / (m[2] - m[1]) == doctest::Approx(g / (1.0 + g)).epsilon(1e-8));
}

TEST_CASE("fixed point is the GLS estimate for any w") {
  const ModelParams p{1.0, 0.2, 0.1, 0.8};
  const auto y = simulate(p, 30, 5);
  for (const Parametrization& par : {Parametrization::centered(30), Parametrization::noncentered(30),
                                     Parametrization{0.5, std::vector<double>(30, 0.4)}}) {
    const VbState s = vb_fit(y, p, par, 1e-13);
    CHECK(s.converged);
    CHECK(std::abs(s.m_mu - oracle::gls_mu(y, p)) < 1e-8);
    CHECK(s.var_mu == doctest::Approx(1.0 / tau(p, par.w)));
    const VbState again = vb_iterate(y, p, par, s);
    CHECK(std::abs(again.m_mu - s.m_mu) < 1e-10 * (1.0 + std::abs(s.m_mu)));
  }
}

TEST_CASE("sweep count follows the contraction factor") {
  const ModelParams p{1.0, 1.0, 0.1, 0.95};
  const std::size_t n = 200;
  const auto y = simulate(p, n, 6);
  const Parametrization par = Parametrization::centered(n);
  const double r = vb_rate(p, par);
  const double tol = 1e-10;
  VbState s = vb_init(y, p, par);
  const double first = std::abs(vb_iterate(y, p, par, s).m_mu - s.m_mu);
  const VbState f = vb_fit(y, p, par, tol);
  // |delta_k| = |delta_1| r^{k-1}; the fit stops after the first k with |delta_k| < tol (1 + |m|).
  const double predicted = 1.0 + std::log(tol * (1.0 + std::abs(f.m_mu)) / first) / std::log(r);
  CHECK(std::abs(f.sweeps - predicted) <= 1.0);
}

TEST_CASE("vb rate equals the EM rate and the recursion slope") {
  const ModelParams p{1.0, 0.5, 0.1, -0.4};
  const std::size_t n = 10;
  const auto y = simulate(p, n, 7);
  for (const Parametrization& par : {Parametrization::centered(n), Parametrization::noncentered(n),
                                     Parametrization{0.0, w_opt_location(p, n)}}) {
    CHECK(vb_rate(p, par) == rate_location(p, par.w));
    VbState s = vb_init(y, p, par);
    const double h = 1e-3;
    VbState lo = s, hi = s;
    lo.m_mu -= h;
    hi.m_mu += h;
    lo = vb_iterate(y, p, par, lo);
    hi = vb_iterate(y, p, par, hi);
    // one sweep from m_mu updates m_alpha from m_mu, then m_mu from m_alpha
    CHECK(std::abs((hi.m_mu - lo.m_mu) / (2.0 * h) - vb_rate(p, par)) < 1e-8);
  }
}

}  // TEST_SUITE
