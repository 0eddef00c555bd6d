#include "pncp/model.hpp"

#include "compensated.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace pncp {

void ModelParams::validate() const {
  if (!std::isfinite(mu)) throw std::invalid_argument("ModelParams: mu must be finite");
  if (!(sigma_eta_sq > 0.0) || !std::isfinite(sigma_eta_sq)) {
    throw std::invalid_argument("ModelParams: sigma_eta_sq must be positive");
  }
  if (!(sigma_eps_sq > 0.0) || !std::isfinite(sigma_eps_sq)) {
    throw std::invalid_argument("ModelParams: sigma_eps_sq must be positive");
  }
  if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("ModelParams: need |phi| < 1");
}

std::string to_string(const ModelParams& p) {
  std::ostringstream os;
  os.precision(10);
  os << "(mu=" << p.mu << ", sigma_eta_sq=" << p.sigma_eta_sq << ", sigma_eps_sq=" << p.sigma_eps_sq
     << ", phi=" << p.phi << ")";
  return os.str();
}

std::vector<double> Parametrization::w_tilde() const {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = 1.0 - w[i];
  return out;
}

Rng::Rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32)};
  engine_.seed(seq);
}

OmegaSystem::OmegaSystem(const ModelParams& params, std::size_t n)
    : params_(params),
      lambda_(build_lambda(params.phi, n)),
      omega_(build_omega(params, n)),
      factor_(factorize(omega_)),
      inverse_(selected_inverse(factor_)),
      log_det_omega_(log_det(factor_)) {}

bool OmegaSystem::matches(const ModelParams& p) const {
  return p.sigma_eta_sq == params_.sigma_eta_sq && p.sigma_eps_sq == params_.sigma_eps_sq &&
         p.phi == params_.phi;
}

void OmegaSystem::check(const ModelParams& p, std::size_t n) const {
  if (n != size()) throw std::invalid_argument("OmegaSystem: series length mismatch");
  if (!matches(p)) throw std::invalid_argument("OmegaSystem: built for different parameters");
}

void validate_series(std::span<const double> y) {
  if (y.size() < 2) throw std::invalid_argument("series must have at least 2 observations");
  for (double v : y) {
    if (!std::isfinite(v)) throw std::invalid_argument("series contains a non-finite value");
  }
}

std::vector<double> simulate(const ModelParams& params, std::size_t n, Rng& rng) {
  params.validate();
  if (n < 2) throw std::invalid_argument("simulate: need n >= 2");
  const double sd_eta = std::sqrt(params.sigma_eta_sq);
  const double sd_eps = std::sqrt(params.sigma_eps_sq);
  double x = params.mu + sd_eta / std::sqrt(1.0 - params.phi * params.phi) * rng.normal();
  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) {
    x = params.mu + params.phi * (x - params.mu) + sd_eta * rng.normal();
    y[t] = x + sd_eps * rng.normal();
  }
  return y;
}

std::vector<double> simulate(const ModelParams& params, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return simulate(params, n, rng);
}

double log_likelihood(const ModelParams& p, std::span<const double> y, const OmegaSystem& sys) {
  const std::size_t n = y.size();
  sys.check(p, n);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - p.mu;
  // r'Sr = sigma_eps^{-2} sigma_eta^{-2} r'Omega^{-1}Lambda r, free of the
  // cancellation in sigma_eps^{-2} r'r - sigma_eps^{-4} r'Omega^{-1}r.
  const std::vector<double> g = sys.solve(sys.lambda().multiply(r));
  detail::CompensatedSum rg;
  for (std::size_t i = 0; i < n; ++i) rg.add(r[i] * g[i]);
  const double quad = rg.value() / (p.sigma_eps_sq * p.sigma_eta_sq);
  const double nd = static_cast<double>(n);
  const double log_det_cov = nd * std::log(p.sigma_eps_sq) + nd * std::log(p.sigma_eta_sq) +
                             sys.log_det_omega() - std::log1p(-p.phi * p.phi);
  return -0.5 * nd * std::log(2.0 * std::numbers::pi) - 0.5 * log_det_cov - 0.5 * quad;
}

double log_likelihood(const ModelParams& params, std::span<const double> y) {
  validate_series(y);
  return log_likelihood(params, y, OmegaSystem(params, y.size()));
}

std::vector<double> to_alpha(std::span<const double> x, const ModelParams& params,
                             const Parametrization& par) {
  if (x.size() != par.w.size()) throw std::invalid_argument("to_alpha: length mismatch");
  const double scale = std::pow(params.sigma_eta_sq, -0.5 * par.a);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * (x[i] - par.w[i] * params.mu);
  return out;
}

std::vector<double> from_alpha(std::span<const double> alpha, const ModelParams& params,
                               const Parametrization& par) {
  if (alpha.size() != par.w.size()) throw std::invalid_argument("from_alpha: length mismatch");
  const double scale = std::pow(params.sigma_eta_sq, 0.5 * par.a);
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = scale * alpha[i] + par.w[i] * params.mu;
  return out;
}

double sample_mean(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("sample_mean: empty input");
  double s = 0.0;
  for (double v : y) s += v;
  return s / static_cast<double>(y.size());
}

double sample_variance(std::span<const double> y) {
  if (y.size() < 2) throw std::invalid_argument("sample_variance: need 2 values");
  const double m = sample_mean(y);
  double s = 0.0;
  for (double v : y) s += (v - m) * (v - m);
  return s / static_cast<double>(y.size() - 1);
}

double lag1_autocorrelation(std::span<const double> y) {
  if (y.size() < 3) throw std::invalid_argument("lag1_autocorrelation: need 3 values");
  const double m = sample_mean(y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - m;
    den += d * d;
    if (i + 1 < y.size()) num += d * (y[i + 1] - m);
  }
  if (den == 0.0) return 0.0;
  return num / den;
}

}  // namespace pncp
