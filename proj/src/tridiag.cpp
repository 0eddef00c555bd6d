#include "pncp/tridiag.hpp"

#include "compensated.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pncp {

SymTridiag::SymTridiag(std::vector<double> diag, std::vector<double> offdiag)
    : diag_(std::move(diag)), offdiag_(std::move(offdiag)) {
  if (diag_.size() < 2) {
    throw std::invalid_argument("SymTridiag: need at least 2 rows");
  }
  if (offdiag_.size() + 1 != diag_.size()) {
    throw std::invalid_argument("SymTridiag: offdiag length must be n-1");
  }
}

std::vector<double> SymTridiag::multiply(std::span<const double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw std::invalid_argument("SymTridiag::multiply: length mismatch");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag_[i] * x[i];
    if (i > 0) s += offdiag_[i - 1] * x[i - 1];
    if (i + 1 < n) s += offdiag_[i] * x[i + 1];
    out[i] = s;
  }
  return out;
}

double SymTridiag::bilinear(std::span<const double> x, std::span<const double> y) const {
  const std::size_t n = size();
  if (x.size() != n || y.size() != n) {
    throw std::invalid_argument("SymTridiag::bilinear: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += diag_[i] * x[i] * y[i];
  for (std::size_t i = 0; i + 1 < n; ++i) s += offdiag_[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
  return s;
}

SymTridiag build_lambda(double phi, std::size_t n) {
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("build_lambda: need |phi| < 1");
  if (n < 2) throw std::invalid_argument("build_lambda: need n >= 2");
  std::vector<double> diag(n, 1.0 + phi * phi);
  diag.front() = 1.0;
  diag.back() = 1.0;
  return SymTridiag(std::move(diag), std::vector<double>(n - 1, -phi));
}

SymTridiag build_omega(const ModelParams& params, std::size_t n) {
  params.validate();
  const SymTridiag lambda = build_lambda(params.phi, n);
  const double inv_eps = 1.0 / params.sigma_eps_sq;
  const double inv_eta = 1.0 / params.sigma_eta_sq;
  std::vector<double> diag(n), off(n - 1);
  for (std::size_t i = 0; i < n; ++i) diag[i] = inv_eps + inv_eta * lambda.diag()[i];
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = inv_eta * lambda.offdiag()[i];
  return SymTridiag(std::move(diag), std::move(off));
}

TridiagFactor factorize(const SymTridiag& m) {
  const std::size_t n = m.size();
  TridiagFactor f{std::vector<double>(n), std::vector<double>(n - 1)};
  const auto diag = m.diag();
  const auto off = m.offdiag();
  f.d[0] = diag[0];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(f.d[i] > kMinPivot)) {
      throw NumericalError("factorize: non-positive pivot at row " + std::to_string(i));
    }
    f.l[i] = off[i] / f.d[i];
    f.d[i + 1] = diag[i + 1] - f.l[i] * off[i];
  }
  if (!(f.d[n - 1] > kMinPivot)) {
    throw NumericalError("factorize: non-positive pivot at row " + std::to_string(n - 1));
  }
  return f;
}

std::vector<double> solve(const TridiagFactor& f, std::span<const double> rhs) {
  const std::size_t n = f.size();
  if (rhs.size() != n) throw std::invalid_argument("solve: length mismatch");
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = 1; i < n; ++i) x[i] -= f.l[i - 1] * x[i - 1];
  for (std::size_t i = 0; i < n; ++i) x[i] /= f.d[i];
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= f.l[i] * x[i + 1];
  return x;
}

std::vector<double> solve_upper(const TridiagFactor& f, std::span<const double> rhs) {
  const std::size_t n = f.size();
  if (rhs.size() != n) throw std::invalid_argument("solve_upper: length mismatch");
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= f.l[i] * x[i + 1];
  return x;
}

SelectedInverse selected_inverse(const TridiagFactor& f) {
  const std::size_t n = f.size();
  SelectedInverse s{std::vector<double>(n), std::vector<double>(n - 1)};
  s.inv_diag[n - 1] = 1.0 / f.d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    s.inv_offdiag[i] = -f.l[i] * s.inv_diag[i + 1];
    s.inv_diag[i] = 1.0 / f.d[i] - f.l[i] * s.inv_offdiag[i];
  }
  return s;
}

double log_det(const TridiagFactor& f) {
  detail::CompensatedSum s;
  for (double d : f.d) s.add(std::log(d));
  return s.value();
}

QClosedForm q_closed_form(double gamma, double phi, std::size_t n) {
  if (phi == 0.0) {
    throw std::invalid_argument("q_closed_form: phi = 0 has no Q; use the identity branch");
  }
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("q_closed_form: need |phi| < 1");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("q_closed_form: need gamma > 0");
  }
  if (n < 2) throw std::invalid_argument("q_closed_form: need n >= 2");

  QClosedForm q;
  q.n = n;
  q.phi = phi;
  q.gamma = gamma;
  const double aphi = std::abs(phi);
  q.b = phi > 0.0 ? 1.0 : -1.0;
  q.c1 = (1.0 + gamma) / aphi;
  q.c = q.c1 + aphi;
  // r_- = 1/r_+ rather than the difference form, which cancels for large c.
  q.r_plus = 0.5 * (q.c + std::sqrt(q.c * q.c - 4.0));
  q.r_minus = 1.0 / q.r_plus;
  q.v_plus = q.r_plus - aphi;
  q.v_minus = q.r_minus - aphi;
  q.kappa0 = q.v_plus - q.v_minus;

  const double rm = q.r_minus;
  const double nd = static_cast<double>(n);
  q.kappa_scaled = q.v_plus * q.v_plus - q.v_minus * q.v_minus * std::pow(rm, 2.0 * nd - 2.0);
  q.kappa = q.kappa_scaled * std::pow(q.r_plus, nd - 1.0);

  q.kappa_seq.resize(n);
  q.u.resize(n);
  q.v.resize(n);
  double sign = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    q.kappa_seq[i] = q.v_plus * std::pow(q.r_plus, t) - q.v_minus * std::pow(rm, t);
    q.u[i] = sign * q.kappa_seq[i] / q.kappa0;
    // kappa_{n-1-i} / kappa with numerator and denominator divided by r_+^{n-1}.
    q.v[i] = sign * (q.v_plus * std::pow(rm, t) - q.v_minus * std::pow(rm, 2.0 * nd - t - 2.0)) /
             q.kappa_scaled;
    sign *= q.b;
  }
  return q;
}

QClosedForm q_closed_form(const ModelParams& params, std::size_t n) {
  params.validate();
  return q_closed_form(params.gamma(), params.phi, n);
}

double QClosedForm::inverse_entry(std::size_t i, std::size_t j) const {
  if (i >= n || j >= n) throw std::out_of_range("QClosedForm::inverse_entry");
  if (i > j) std::swap(i, j);
  const double di = static_cast<double>(i);
  const double dj = static_cast<double>(j);
  const double nd = static_cast<double>(n);
  const double left = v_plus - v_minus * std::pow(r_minus, 2.0 * di);
  const double right = v_plus - v_minus * std::pow(r_minus, 2.0 * (nd - 1.0 - dj));
  const double sign = ((i + j) % 2 == 1 && b < 0.0) ? -1.0 : 1.0;
  return sign * left * right * std::pow(r_minus, dj - di) / (kappa0 * kappa_scaled);
}

double q_row_sum(const QClosedForm& q, std::size_t t) {
  if (t >= q.n) throw std::out_of_range("q_row_sum: row index out of range");
  return (q.b * (1.0 - q.phi) * (q.v[t] + q.v[q.n - 1 - t]) - 1.0) / (2.0 * q.b - q.c);
}

std::pair<double, double> q_traces(const QClosedForm& q) {
  const double nd = static_cast<double>(q.n);
  const double g = q.gamma;
  const double phi2 = q.phi * q.phi;
  const double k0 = q.kappa0;
  const double ks = q.kappa_scaled;
  const double rp = q.r_plus;
  const double rm = q.r_minus;
  const double vp2 = q.v_plus * q.v_plus;
  const double vm2 = q.v_minus * q.v_minus;
  // Every r_+ power is divided out: s = (r_-/r_+)^{n-1} = r_-^{2n-2}.
  const double s = std::pow(rm, 2.0 * nd - 2.0);
  const double rm_4n3 = std::pow(rm, 4.0 * nd - 3.0);

  const double tr1 = (nd * k0 * (vp2 + vm2 * s) + 2.0 * g * (rp - std::pow(rm, 2.0 * nd - 1.0))) /
                     (k0 * k0 * ks);

  const double scaled_sum =
      (4.0 * nd * nd * g * g + 8.0 * nd * g * (phi2 - 1.0) - 4.0 * g * (1.0 + phi2) +
       2.0 * (phi2 - 1.0) * (phi2 - 1.0) + 16.0 * g * g / (k0 * k0)) *
          s +
      nd * q.c * (vp2 * vp2 - vm2 * vm2 * s * s) / k0 +
      4.0 * g * q.c * (vp2 * rp + vm2 * rm_4n3) / (k0 * k0) +
      2.0 * (phi2 - 1.0) * (vp2 * rp - vm2 * rm_4n3) / k0;
  const double tr2 = scaled_sum / (k0 * k0 * ks * ks);
  return {tr1, tr2};
}

}  // namespace pncp
