#include "pncp/workparam.hpp"

#include <cmath>
#include <stdexcept>

namespace pncp {

std::vector<double> w_opt_location(const OmegaSystem& sys) {
  const std::size_t n = sys.size();
  const std::vector<double> row_sums = sys.solve(std::vector<double>(n, 1.0));
  const double ie = 1.0 / sys.params().sigma_eps_sq;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 - ie * row_sums[i];
  return w;
}

std::vector<double> w_opt_location(const ModelParams& params, std::size_t n) {
  return w_opt_location(OmegaSystem(params, n));
}

std::vector<double> w_opt_location_closed(const ModelParams& params, std::size_t n) {
  params.validate();
  if (n < 2) throw std::invalid_argument("w_opt_location_closed: need n >= 2");
  const double g = params.gamma();
  if (params.phi == 0.0) return std::vector<double>(n, 1.0 / (1.0 + g));

  const QClosedForm q = q_closed_form(g, params.phi, n);
  const double phi = params.phi;
  const double one_m = 1.0 - phi;
  const double denom = one_m * one_m + g;
  std::vector<double> w(n);
  for (std::size_t t = 0; t < n; ++t) {
    w[t] = (one_m * one_m + q.b * g * one_m * (q.v[t] + q.v[n - 1 - t])) / denom;
  }
  return w;
}

Bounds corollary1_bounds(const ModelParams& params) {
  params.validate();
  const double g = params.gamma();
  const double phi = params.phi;
  const double b1 = g / ((1.0 - phi) * (1.0 - phi) + g);
  const double b2 = g / (1.0 - phi * phi + g);
  if (phi >= 0.0) return {1.0 - b1, 1.0 - b2};
  return {1.0 - b2, 1.0 + b2 - 2.0 * b1};
}

LocationScheme location_scheme(const ModelParams& params, std::size_t n) {
  const Bounds b = corollary1_bounds(params);
  return {w_opt_location(params, n), b.low, b.high};
}

double lambda_total(double phi, std::size_t n) {
  const double nd = static_cast<double>(n);
  return nd * (1.0 - phi) * (1.0 - phi) + 2.0 * phi * (1.0 - phi);
}

double w_opt_common(const ModelParams& params, std::size_t n) {
  params.validate();
  if (n < 2) throw std::invalid_argument("w_opt_common: need n >= 2");
  const double nd = static_cast<double>(n);
  return 1.0 / (nd * params.gamma() / lambda_total(params.phi, n) + 1.0);
}

double a_hat_asymptotic(double gamma, double phi) {
  if (!(gamma > 0.0)) throw std::invalid_argument("a_hat_asymptotic: need gamma > 0");
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("a_hat_asymptotic: need |phi| < 1");
  const double lo = (1.0 - phi) * (1.0 - phi) + gamma;
  const double hi = (1.0 + phi) * (1.0 + phi) + gamma;
  return 1.0 - gamma / std::sqrt(lo * hi);
}

ScaleApprox scale_approx(double gamma, double phi) {
  if (!(gamma > 0.0)) throw std::invalid_argument("scale_approx: need gamma > 0");
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("scale_approx: need |phi| < 1");
  return {1.0 / (1.0 + gamma / (2.0 * (1.0 - phi * phi))), 1.0};
}

namespace {

std::vector<double> scaled_residual(std::span<const double> y, const ModelParams& p) {
  std::vector<double> z(y.size());
  const double ie = 1.0 / p.sigma_eps_sq;
  for (std::size_t i = 0; i < y.size(); ++i) z[i] = ie * (y[i] - p.mu);
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

ScaleScheme scale_opt(std::span<const double> y, const ModelParams& p, const OmegaSystem& sys,
                      std::span<const double> current_w) {
  const std::size_t n = y.size();
  sys.check(p, n);
  if (!current_w.empty() && current_w.size() != n) {
    throw std::invalid_argument("scale_opt: w length mismatch");
  }
  const double nd = static_cast<double>(n);

  ScaleScheme s;
  s.z = scaled_residual(y, p);
  s.a_hat = a_hat_asymptotic(p.gamma(), p.phi);
  s.a_approx = scale_approx(p.gamma(), p.phi).a;
  const std::vector<double> g = sys.solve(s.z);  // Omega^{-1} z

  if (p.mu == 0.0) {
    // y'Omega^{-1}y / (2 n sigma_eps^4) = z'Omega^{-1}z / (2n) when mu = 0.
    s.a_opt = 1.0 / (1.0 + dot(s.z, g) / (2.0 * nd));
    if (current_w.empty()) {
      s.w_opt.assign(n, 1.0);
    } else {
      s.w_opt.assign(current_w.begin(), current_w.end());
    }
    return s;
  }

  s.a_opt = 1.0 - sys.lambda().bilinear(g, g) / (nd * p.sigma_eta_sq);
  if (std::abs(s.a_opt) < kDegenerateScale) {
    throw DegenerateScaleError("scale_opt: a_opt is numerically zero");
  }
  // w~ = Omega^{-1} {2 Lambda Omega^{-1} z / (a sigma_eta^2) - z} / mu
  std::vector<double> rhs = sys.lambda().multiply(g);
  const double k = 2.0 / (s.a_opt * p.sigma_eta_sq);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = k * rhs[i] - s.z[i];
  const std::vector<double> wt = sys.solve(rhs);
  s.w_opt.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.w_opt[i] = 1.0 - wt[i] / p.mu;
  return s;
}

ScaleScheme scale_opt(std::span<const double> y, const ModelParams& params,
                      std::span<const double> current_w) {
  validate_series(y);
  return scale_opt(y, params, OmegaSystem(params, y.size()), current_w);
}

double scale_information(std::span<const double> y, const ModelParams& p, const OmegaSystem& sys, double a,
                         std::span<const double> w) {
  const std::size_t n = y.size();
  sys.check(p, n);
  if (w.size() != n) throw std::invalid_argument("scale_information: length mismatch");
  const std::vector<double> z = scaled_residual(y, p);
  const std::vector<double> g = sys.solve(z);
  std::vector<double> wt(n);
  for (std::size_t i = 0; i < n; ++i) wt[i] = 1.0 - w[i];
  const double mu = p.mu;
  const double nd = static_cast<double>(n);
  return 0.5 * mu * mu * a * a * sys.omega().bilinear(wt, wt) + mu * a * a * dot(z, wt) -
         2.0 / p.sigma_eta_sq * a * mu * sys.lambda().bilinear(g, wt) +
         nd * (1.0 - a) * (1.0 - a) + 0.5 * a * a * dot(z, g);
}

}  // namespace pncp
