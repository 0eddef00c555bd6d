#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "pncp/tridiag.hpp"

using namespace pncp;
using oracle::DenseMatrix;

namespace {

SymTridiag random_spd(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> d(n), e(n - 1);
  for (auto& x : e) x = u(gen);
  for (std::size_t i = 0; i < n; ++i) d[i] = 2.5 + u(gen);
  return {d, e};
}

}  // namespace

TEST_SUITE("tridiag") {

TEST_CASE("build_lambda entries and determinant") {
  const SymTridiag id = build_lambda(0.0, 3);
  CHECK(id.diag()[0] == 1.0);
  CHECK(id.diag()[1] == 1.0);
  CHECK(id.offdiag()[0] == 0.0);

  const SymTridiag l = build_lambda(0.5, 3);
  CHECK(l.diag()[0] == 1.0);
  CHECK(l.diag()[1] == 1.25);
  CHECK(l.diag()[2] == 1.0);
  CHECK(l.offdiag()[0] == -0.5);
  CHECK(l.offdiag()[1] == -0.5);

  CHECK(std::exp(log_det(factorize(build_lambda(0.5, 4)))) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK_THROWS_AS(build_lambda(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(build_lambda(0.2, 1), std::invalid_argument);
}

TEST_CASE("log det of Lambda is log(1 - phi^2) for every length") {
  for (double phi : {-0.99, -0.5, 0.1, 0.7, 0.99}) {
    for (std::size_t n = 2; n <= 50; ++n) {
      CHECK(log_det(factorize(build_lambda(phi, n))) == doctest::Approx(std::log1p(-phi * phi)).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_omega") {
  const SymTridiag a = build_omega({0.0, 1.0, 1.0, 0.0}, 2);
  CHECK(a.diag()[0] == 2.0);
  CHECK(a.diag()[1] == 2.0);
  CHECK(a.offdiag()[0] == 0.0);

  const ModelParams p{0.0, 0.1, 0.1, 0.5};
  const SymTridiag b = build_omega(p, 3);
  CHECK(b.diag()[0] == doctest::Approx(20.0));
  CHECK(b.diag()[1] == doctest::Approx(22.5));
  CHECK(b.diag()[2] == doctest::Approx(20.0));
  CHECK(b.offdiag()[0] == doctest::Approx(-5.0));

  const SymTridiag lam = build_lambda(0.5, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(b.diag()[i] - 10.0 == doctest::Approx(lam.diag()[i] / 0.1));
}

TEST_CASE("factorize small cases") {
  const TridiagFactor f = factorize({{1.0, 1.0, 1.0}, {0.0, 0.0}});
  CHECK(f.d == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(f.l == std::vector<double>{0.0, 0.0});

  const TridiagFactor g = factorize({{2.0, 2.0}, {-1.0}});
  CHECK(g.d[0] == 2.0);
  CHECK(g.d[1] == doctest::Approx(1.5));
  CHECK(g.l[0] == doctest::Approx(-0.5));
  CHECK(log_det(g) == doctest::Approx(std::log(3.0)));

  CHECK_THROWS_AS(factorize({{1.0, 1.0}, {2.0}}), NumericalError);
}

TEST_CASE("factorization reconstructs a random matrix") {
  const SymTridiag m = random_spd(50, 11);
  const TridiagFactor f = factorize(m);
  double err = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const double diag = f.d[i] + (i > 0 ? f.l[i - 1] * f.l[i - 1] * f.d[i - 1] : 0.0);
    err = std::max(err, std::abs(diag - m.diag()[i]) / std::abs(m.diag()[i]));
    if (i + 1 < 50) err = std::max(err, std::abs(f.l[i] * f.d[i] - m.offdiag()[i]) / std::abs(m.offdiag()[i]));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("solve") {
  const TridiagFactor id = factorize({{1.0, 1.0}, {0.0}});
  CHECK(solve(id, std::vector<double>{3.0, 7.0}) == std::vector<double>{3.0, 7.0});

  const std::vector<double> x = solve(factorize(build_omega({0.0, 1.0, 1.0, 0.0}, 2)), std::vector<double>{1.0, 1.0});
  CHECK(x[0] == doctest::Approx(0.5));
  CHECK(x[1] == doctest::Approx(0.5));
  CHECK_THROWS_AS(solve(id, std::vector<double>{1.0}), std::invalid_argument);

  const SymTridiag m = random_spd(20, 3);
  std::vector<double> rhs(20);
  for (std::size_t i = 0; i < 20; ++i) rhs[i] = std::sin(1.0 + i);
  const std::vector<double> got = solve(factorize(m), rhs);
  const oracle::Vec want = oracle::dense_invert(oracle::dense_from_tridiag(m)) * rhs;
  for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-10);

  const std::vector<double> back = m.multiply(got);
  for (std::size_t i = 0; i < 20; ++i) CHECK(std::abs(back[i] - rhs[i]) <= 1e-10 * (1.0 + std::abs(rhs[i])));
}

TEST_CASE("selected inverse") {
  const SelectedInverse id = selected_inverse(factorize({{1.0, 1.0, 1.0}, {0.0, 0.0}}));
  CHECK(id.inv_diag == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(id.inv_offdiag == std::vector<double>{0.0, 0.0});

  const SelectedInverse s = selected_inverse(factorize({{2.0, 2.0}, {-1.0}}));
  CHECK(s.inv_diag[0] == doctest::Approx(2.0 / 3.0));
  CHECK(s.inv_diag[1] == doctest::Approx(2.0 / 3.0));
  CHECK(s.inv_offdiag[0] == doctest::Approx(1.0 / 3.0));

  for (unsigned seed = 1; seed <= 5; ++seed) {
    const SymTridiag m = random_spd(50, seed);
    const SelectedInverse si = selected_inverse(factorize(m));
    const DenseMatrix inv = oracle::dense_invert(oracle::dense_from_tridiag(m));
    for (std::size_t i = 0; i < 50; ++i) {
      CHECK(si.inv_diag[i] > 0.0);
      CHECK(std::abs(si.inv_diag[i] - inv(i, i)) < 1e-10);
      if (i + 1 < 50) CHECK(std::abs(si.inv_offdiag[i] - inv(i, i + 1)) < 1e-10);
    }
  }
}

TEST_CASE("Q closed form scalars") {
  const QClosedForm q = q_closed_form(1.0, 0.5, 2);
  CHECK(q.b == 1.0);
  CHECK(q.c1 == doctest::Approx(4.0));
  CHECK(q.c == doctest::Approx(4.5));
  CHECK(q.c1 > 1.0);
  CHECK(q.c > 2.0);
  CHECK(q.r_plus * q.r_minus == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q.r_plus + q.r_minus == doctest::Approx(q.c).epsilon(1e-14));
  CHECK(q.u[0] == 1.0);
  CHECK(q_closed_form(10.0, -0.9, 40).b == -1.0);

  const DenseMatrix inv = oracle::dense_invert(oracle::dense_q(1.0, 0.5, 2));
  CHECK(std::abs(q.u[0] * q.v[0] - inv(0, 0)) < 1e-12);

  CHECK_THROWS_AS(q_closed_form(1.0, 0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(q_closed_form(0.0, 0.5, 5), std::invalid_argument);
}

TEST_CASE("Q inverse entries u_t v_j match the dense inverse") {
  {
    const QClosedForm q = q_closed_form(0.1, -0.9, 30);
    const DenseMatrix inv = oracle::dense_invert(oracle::dense_q(0.1, -0.9, 30));
    for (std::size_t t = 0; t < 30; ++t) {
      for (std::size_t j = t; j < 30; ++j) CHECK(std::abs(q.u[t] * q.v[j] - inv(t, j)) < 1e-8);
    }
  }
  for (double phi : {-0.99, -0.5, -0.1, 0.1, 0.5, 0.99}) {
    for (double gamma : {0.1, 1.0, 10.0}) {
      for (std::size_t n : {2u, 7u, 23u, 50u}) {
        const QClosedForm q = q_closed_form(gamma, phi, n);
        const DenseMatrix inv = oracle::dense_invert(oracle::dense_q(gamma, phi, n));
        double err = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
          for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(q.inverse_entry(t, j) - inv(t, j)));
        }
        CHECK_MESSAGE(err < 1e-8, "phi=" << phi << " gamma=" << gamma << " n=" << n);
        if (phi > 0.0) {
          for (std::size_t t = 0; t < n; ++t) {
            CHECK(q.v[t] > 0.0);
            CHECK(q.inverse_entry(0, t) > 0.0);
          }
        }
      }
    }
  }
}

TEST_CASE("Q row sums") {
  const QClosedForm q = q_closed_form(1.0, 0.5, 10);
  const DenseMatrix inv = oracle::dense_invert(oracle::dense_q(1.0, 0.5, 10));
  double dense_row = 0.0;
  for (std::size_t j = 0; j < 10; ++j) dense_row += inv(2, j);
  CHECK(std::abs(q_row_sum(q, 2) - dense_row) < 1e-10);
  for (std::size_t t = 0; t < 10; ++t) CHECK(q_row_sum(q, t) == doctest::Approx(q_row_sum(q, 9 - t)).epsilon(1e-13));
  CHECK_THROWS_AS(q_row_sum(q, 10), std::out_of_range);

  // negative-phi bounds
  const double phi = -0.9, gamma = 0.1;
  const QClosedForm qn = q_closed_form(gamma, phi, 10);
  const double c1 = (1.0 + gamma) / std::abs(phi);
  const double lo = 2.0 / (qn.c + 2.0) - 1.0 / (c1 + phi);
  const double hi = 1.0 / (c1 + phi);
  for (std::size_t t = 0; t < 10; ++t) {
    CHECK(q_row_sum(qn, t) > lo);
    CHECK(q_row_sum(qn, t) < hi);
  }
  // positive-phi lower bound
  for (std::size_t t = 0; t < 10; ++t) CHECK(q_row_sum(q, t) > 1.0 / (q.c1 - 0.5));
}

TEST_CASE("Q traces") {
  const QClosedForm q = q_closed_form(1.0, 0.5, 5);
  const DenseMatrix inv = oracle::dense_invert(oracle::dense_q(1.0, 0.5, 5));
  const auto [t1, t2] = q_traces(q);
  CHECK(std::abs(t1 - oracle::trace(inv)) < 1e-9);
  CHECK(std::abs(t2 - oracle::trace(inv * inv)) < 1e-9);
  CHECK(t2 >= t1 * t1 / 5.0);

  // per-row trace tends to 1/kappa0
  const QClosedForm big = q_closed_form(1.0, 0.5, 200000);
  CHECK(q_traces(big).first / 200000.0 == doctest::Approx(1.0 / big.kappa0).epsilon(1e-4));
}

TEST_CASE("closed form stays finite for long series") {
  const QClosedForm q = q_closed_form(0.01, 0.1, 20000);
  CHECK(std::isfinite(q.v[0]));
  CHECK(std::isfinite(q.v[19999]));
  CHECK(std::isfinite(q_row_sum(q, 10000)));
  const auto [t1, t2] = q_traces(q);
  CHECK(std::isfinite(t1));
  CHECK(std::isfinite(t2));
}

}  // TEST_SUITE
