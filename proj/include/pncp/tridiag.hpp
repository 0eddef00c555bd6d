#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "pncp/params.hpp"

namespace pncp {

// Symmetric tridiagonal matrix; only the first super-diagonal is stored.
class SymTridiag {
 public:
  SymTridiag(std::vector<double> diag, std::vector<double> offdiag);

  std::size_t size() const { return diag_.size(); }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> offdiag() const { return offdiag_; }

  std::vector<double> multiply(std::span<const double> x) const;
  // x' M y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

 private:
  std::vector<double> diag_;
  std::vector<double> offdiag_;
};

// M = L D L' with unit lower-bidiagonal L (subdiagonal l) and pivots d.
struct TridiagFactor {
  std::vector<double> d;
  std::vector<double> l;

  std::size_t size() const { return d.size(); }
};

// Diagonal and first off-diagonal of M^{-1}.
struct SelectedInverse {
  std::vector<double> inv_diag;
  std::vector<double> inv_offdiag;
};

// Pivots at or below this value are treated as loss of positive definiteness.
inline constexpr double kMinPivot = 1e-300;

SymTridiag build_lambda(double phi, std::size_t n);

// Omega = sigma_eps^{-2} I + sigma_eta^{-2} Lambda(phi).
SymTridiag build_omega(const ModelParams& params, std::size_t n);

// Throws NumericalError on a pivot <= kMinPivot.
TridiagFactor factorize(const SymTridiag& m);

std::vector<double> solve(const TridiagFactor& f, std::span<const double> rhs);

// Solves L' x = rhs only (no D, no forward sweep). Used for exact sampling:
// x = L'^{-1} D^{-1/2} e has covariance M^{-1} when e is standard normal.
std::vector<double> solve_upper(const TridiagFactor& f, std::span<const double> rhs);

// Takahashi-style backward recursion, O(n).
SelectedInverse selected_inverse(const TridiagFactor& f);

double log_det(const TridiagFactor& f);

// Closed-form inverse of Q = sigma_eta^2 Omega / |phi| = (gamma I + Lambda) / |phi|,
// Q^{-1}_{tj} = u_t v_j for t <= j. Vectors are 0-based: u[0] = 1.
//
// kappa and kappa_seq grow like r_plus^t and overflow to inf for long series;
// everything derived from them (v, inverse_entry, row sums, traces) is
// evaluated in a form normalized by powers of r_plus and stays finite.
// u overflows for the same reason once r_plus^t exceeds the double range.
struct QClosedForm {
  std::size_t n = 0;
  double phi = 0.0;
  double gamma = 0.0;
  double b = 1.0;
  double c1 = 0.0;
  double c = 0.0;
  double r_plus = 0.0;
  double r_minus = 0.0;
  double v_plus = 0.0;
  double v_minus = 0.0;
  double kappa0 = 0.0;
  double kappa = 0.0;
  // kappa / r_plus^{n-1} = v_plus^2 - v_minus^2 r_minus^{2n-2}
  double kappa_scaled = 0.0;
  std::vector<double> kappa_seq;
  std::vector<double> u;
  std::vector<double> v;

  // (Q^{-1})_{ij}, any order of i and j.
  double inverse_entry(std::size_t i, std::size_t j) const;
};

// Requires phi != 0 and |phi| < 1, gamma > 0.
QClosedForm q_closed_form(double gamma, double phi, std::size_t n);
QClosedForm q_closed_form(const ModelParams& params, std::size_t n);

// Sum of row t (0-based) of Q^{-1}.
double q_row_sum(const QClosedForm& q, std::size_t t);

// (tr Q^{-1}, tr Q^{-2}).
std::pair<double, double> q_traces(const QClosedForm& q);

}  // namespace pncp
