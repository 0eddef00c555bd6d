#include <doctest.h>

#include <cmath>

#include "oracle.hpp"
#include "pncp/em.hpp"
#include "pncp/workparam.hpp"

using namespace pncp;
using oracle::DenseMatrix;
using oracle::Vec;

namespace {

ModelParams with_gamma(double gamma, double phi, double mu = 1.0) { return {mu, gamma, 1.0, phi}; }

// Dense I(a, w~) profiled over w~ for fixed a.
struct DenseScaleInfo {
  Vec z;
  DenseMatrix omega, omega_inv, lam;
  double mu, se;

  DenseScaleInfo(std::span<const double> y, const ModelParams& p)
      : z(y.size()),
        omega(oracle::dense_omega(p, y.size())),
        omega_inv(oracle::dense_invert(omega)),
        lam(oracle::dense_lambda(p.phi, y.size())),
        mu(p.mu),
        se(p.sigma_eta_sq) {
    for (std::size_t i = 0; i < y.size(); ++i) z[i] = (y[i] - p.mu) / p.sigma_eps_sq;
  }

  double value(double a, const Vec& wt) const {
    const double n = static_cast<double>(z.size());
    const Vec g = omega_inv * z;
    return 0.5 * mu * mu * a * a * oracle::dot(wt, omega * wt) + mu * a * a * oracle::dot(z, wt) -
           2.0 / se * a * mu * oracle::dot(lam * g, wt) + n * (1.0 - a) * (1.0 - a) + 0.5 * a * a * oracle::dot(z, g);
  }

  Vec best_wt(double a) const {
    const Vec g = lam * (omega_inv * z);
    Vec rhs(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) rhs[i] = (2.0 * g[i] / (a * se) - z[i]) / mu;
    return omega_inv * rhs;
  }

  double profile(double a) const { return value(a, best_wt(a)); }
};

}  // namespace

TEST_SUITE("workparam") {

TEST_CASE("location weights at phi = 0") {
  for (double w : w_opt_location(with_gamma(1.0, 0.0), 7)) CHECK(w == doctest::Approx(0.5).epsilon(1e-14));
  for (double w : w_opt_location(with_gamma(9.0, 0.0), 7)) CHECK(w == doctest::Approx(0.1).epsilon(1e-14));
  for (double w : w_opt_location_closed(with_gamma(9.0, 0.0), 7)) CHECK(w == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("location weights match the dense formula and the closed form") {
  const ModelParams p{0.0, 0.3, 0.3, 0.5};
  const std::size_t n = 10;
  const auto w = w_opt_location(p, n);
  const auto wc = w_opt_location_closed(p, n);
  const Vec ones(n, 1.0);
  const Vec s = oracle::dense_invert(oracle::dense_omega(p, n)) * ones;
  for (std::size_t t = 0; t < n; ++t) {
    CHECK(std::abs(w[t] - (1.0 - s[t] / p.sigma_eps_sq)) < 1e-10);
    CHECK(std::abs(w[t] - wc[t]) < 1e-10);
  }
}

TEST_CASE("closed form agrees on the grid and is symmetric") {
  for (double phi : {-0.99, -0.9, -0.5, -0.1, 0.1, 0.5, 0.9, 0.99}) {
    for (double gamma : {0.01, 0.1, 1.0, 10.0}) {
      for (std::size_t n : {2u, 3u, 10u, 50u, 2000u}) {
        const auto w = w_opt_location(with_gamma(gamma, phi), n);
        const auto wc = w_opt_location_closed(with_gamma(gamma, phi), n);
        const Bounds b = corollary1_bounds(with_gamma(gamma, phi));
        for (std::size_t t = 0; t < n; ++t) {
          CHECK(std::abs(w[t] - wc[t]) < 1e-10);
          CHECK(wc[t] == wc[n - 1 - t]);
          CHECK(std::abs(w[t] - w[n - 1 - t]) < 1e-12);
          CHECK(w[t] >= b.low - 1e-12);
          CHECK(w[t] <= b.high + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("location weights vanish as phi approaches one") {
  const auto w = w_opt_location_closed(with_gamma(1.0, 0.999), 50);
  for (double v : w) CHECK(v < 0.01);
}

TEST_CASE("w_opt bound pair") {
  const Bounds z = corollary1_bounds(with_gamma(1.0, 0.0));
  CHECK(z.low == doctest::Approx(0.5));
  CHECK(z.high == doctest::Approx(0.5));
  const Bounds h = corollary1_bounds(with_gamma(1.0, 0.5));
  CHECK(h.low == doctest::Approx(0.2));
  CHECK(h.high == doctest::Approx(3.0 / 7.0));
}

TEST_CASE("location weights decrease in gamma and phi") {
  const std::vector<double> phis{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const std::vector<double> gammas{0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0};
  const std::size_t n = 10;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      const auto w = w_opt_location(with_gamma(gammas[j], phis[i]), n);
      if (j + 1 < gammas.size()) {
        const auto wg = w_opt_location(with_gamma(gammas[j + 1], phis[i]), n);
        for (std::size_t t = 0; t < n; ++t) CHECK(w[t] - wg[t] > 1e-12);
      }
      if (i + 1 < phis.size()) {
        const auto wp = w_opt_location(with_gamma(gammas[j], phis[i + 1]), n);
        for (std::size_t t = 0; t < n; ++t) CHECK(w[t] - wp[t] > 1e-12);
      }
    }
  }
}

TEST_CASE("common weight") {
  CHECK(lambda_total(0.5, 10) == doctest::Approx(3.0));
  CHECK(w_opt_common(with_gamma(1.0, 0.5), 10) == doctest::Approx(3.0 / 13.0));
  CHECK(w_opt_common(with_gamma(2.5, 0.0), 10) == doctest::Approx(1.0 / 3.5));
  for (double phi : {-0.9, -0.5, 0.0, 0.5, 0.9}) {
    const DenseMatrix lam = oracle::dense_lambda(phi, 12);
    const Vec ones(12, 1.0);
    CHECK(lambda_total(phi, 12) == doctest::Approx(oracle::dot(ones, lam * ones)));
    for (double gamma : {0.1, 1.0, 10.0}) {
      const ModelParams p = with_gamma(gamma, phi);
      const double r = rate_location(p, std::vector<double>(12, w_opt_common(p, 12)));
      if (phi == 0.0) {
        CHECK(std::abs(r) < 1e-12);
      } else {
        CHECK(r > 1e-6);
      }
    }
  }
}

TEST_CASE("asymptotic and approximate scale") {
  CHECK(a_hat_asymptotic(3.0, 0.0) == doctest::Approx(0.25));
  CHECK(a_hat_asymptotic(1e-12, 0.4) == doctest::Approx(1.0));
  for (double g : {0.05, 0.7, 4.0}) {
    for (double phi : {0.13, 0.6, 0.97}) CHECK(a_hat_asymptotic(g, phi) == a_hat_asymptotic(g, -phi));
  }
  CHECK(a_hat_asymptotic(1.0, 0.5) > a_hat_asymptotic(2.0, 0.5));
  CHECK(scale_approx(2.0, 0.0).a == doctest::Approx(0.5));
  CHECK(scale_approx(1e-12, 0.3).a == doctest::Approx(1.0));
  CHECK(scale_approx(10.0, 0.95).a == doctest::Approx(1.0 / (1.0 + 10.0 / 0.195)));
  CHECK(scale_approx(10.0, 0.95).a == doctest::Approx(0.01913).epsilon(1e-3));
  CHECK(scale_approx(10.0, 0.95).w == 1.0);
}

TEST_CASE("scale_opt with mu = 0") {
  const ModelParams p{0.0, 0.5, 0.2, 0.6};
  const std::vector<double> zero(9, 0.0);
  CHECK(scale_opt(zero, p).a_opt == 1.0);

  const auto y = simulate(p, 40, 3);
  const std::vector<double> w1(40, 0.3), w2(40, -1.7);
  const ScaleScheme s1 = scale_opt(y, p, w1);
  const ScaleScheme s2 = scale_opt(y, p, w2);
  CHECK(s1.a_opt == s2.a_opt);
  CHECK(s1.w_opt == w1);
  CHECK(s1.a_opt > 0.0);
  CHECK(s1.a_opt <= 1.0);
  const Vec g = oracle::dense_invert(oracle::dense_omega(p, 40)) * y;
  const double want = 1.0 / (1.0 + oracle::dot(y, g) / (2.0 * 40 * p.sigma_eps_sq * p.sigma_eps_sq));
  CHECK(s1.a_opt == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("scale_opt minimizes the augmented information") {
  const ModelParams p{1.0, 0.5, 0.5, 0.5};
  const auto y = simulate(p, 8, 17);
  const ScaleScheme s = scale_opt(y, p);
  const DenseScaleInfo info(y, p);
  const double a_dense = oracle::golden_max_q([&](double a) { return -info.profile(a); }, 0.05, 1.0, 1e-12);
  CHECK(std::abs(s.a_opt - a_dense) < 1e-6);
  const Vec wt = info.best_wt(a_dense);
  for (std::size_t t = 0; t < 8; ++t) CHECK(std::abs((1.0 - s.w_opt[t]) - wt[t]) < 1e-6);
  CHECK(s.a_opt <= 1.0);
  CHECK(s.a_hat > 0.0);
  CHECK(s.a_hat < 1.0);
  CHECK(s.a_approx > 0.0);
  CHECK(s.a_approx <= 1.0);

  // the library's I agrees with the dense expression
  const OmegaSystem sys(p, 8);
  std::vector<double> w(8);
  for (std::size_t t = 0; t < 8; ++t) w[t] = 0.2 + 0.1 * t;
  Vec wtv(8);
  for (std::size_t t = 0; t < 8; ++t) wtv[t] = 1.0 - w[t];
  CHECK(scale_information(y, p, sys, 0.7, w) == doctest::Approx(info.value(0.7, wtv)).epsilon(1e-12));
}

TEST_CASE("scale weights average near one at moderate settings") {
  const ModelParams p{1.0, 0.1, 0.1, 0.1};
  const std::size_t n = 5000;
  const int reps = 50;
  double mean = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto y = simulate(p, n, 900 + r);
    mean += scale_opt(y, p).w_opt[n / 2];
  }
  mean /= reps;
  CHECK(std::abs(mean - 1.0) < 0.1);
}

TEST_CASE("degenerate scale signals") {
  // Pick y so that z'Omega^{-1}Lambda Omega^{-1}z = n sigma_eta^2 exactly.
  const ModelParams p{1.0, 1.0, 1.0, 0.0};
  const std::size_t n = 4;
  // phi = 0: Omega = 2I, Lambda = I, so the quadratic is |z|^2 / 4.
  std::vector<double> y(n, 1.0 + 2.0);
  CHECK_THROWS_AS(scale_opt(y, p), DegenerateScaleError);
}

}  // TEST_SUITE
