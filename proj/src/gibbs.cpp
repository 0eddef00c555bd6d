#include "pncp/gibbs.hpp"

#include <cmath>
#include <stdexcept>

#include "pncp/em.hpp"
#include "pncp/io.hpp"

namespace pncp {

namespace {

const ModelParams& checked(const ModelParams& params, std::span<const double> y) {
  params.validate();
  validate_series(y);
  return params;
}

}  // namespace

GibbsSampler::GibbsSampler(std::span<const double> y, const ModelParams& params, Parametrization par)
    : y_(y.begin(), y.end()),
      params_(params),
      par_(std::move(par)),
      sys_(checked(params, y), y.size()),
      rho_(pncp::rho(sys_, par_.w)),
      tau_(pncp::tau(params_, par_.w)),
      yw_(0.0),
      scale_(std::pow(params.sigma_eta_sq, 0.5 * par_.a)) {
  if (par_.w.size() != y_.size()) throw std::invalid_argument("GibbsSampler: w length mismatch");
  for (std::size_t i = 0; i < y_.size(); ++i) yw_ += y_[i] * par_.w[i];
}

std::vector<double> GibbsSampler::states(double mu, Rng& rng) const {
  const std::size_t n = y_.size();
  ModelParams p = params_;
  p.mu = mu;
  const SmoothedMoments mom = e_step(y_, p, par_, sys_);
  const std::vector<double>& d = sys_.factor().d;
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = rng.normal() / std::sqrt(d[i]);
  std::vector<double> x = solve_upper(sys_.factor(), e);
  for (std::size_t i = 0; i < n; ++i) x[i] = mom.m[i] + x[i] / scale_;
  return x;
}

double GibbsSampler::mu(std::span<const double> alpha, Rng& rng) const {
  if (alpha.size() != y_.size()) throw std::invalid_argument("sample_mu: alpha length mismatch");
  double ra = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) ra += rho_[i] * alpha[i];
  const double mean = (yw_ / params_.sigma_eps_sq - scale_ * ra) / tau_;
  return mean + rng.normal() / std::sqrt(tau_);
}

std::vector<double> sample_states(std::span<const double> y, double mu, const ModelParams& params,
                                  const Parametrization& par, Rng& rng) {
  return GibbsSampler(y, params, par).states(mu, rng);
}

double sample_mu(std::span<const double> y, std::span<const double> alpha, const ModelParams& params,
                 const Parametrization& par, Rng& rng) {
  return GibbsSampler(y, params, par).mu(alpha, rng);
}

Chain run_chain(std::span<const double> y, const ModelParams& params, const Parametrization& par, int n_iter,
                int burnin, std::uint64_t seed) {
  if (!(burnin >= 0 && n_iter > burnin)) throw std::invalid_argument("run_chain: need N > burnin >= 0");
  const GibbsSampler sampler(y, params, par);
  Rng rng(seed);
  Chain c;
  c.seed = seed;
  c.scheme = par;
  c.mu_draws.reserve(static_cast<std::size_t>(n_iter - burnin));
  double mu = sample_mean(y);
  for (int i = 0; i < n_iter; ++i) {
    const std::vector<double> alpha = sampler.states(mu, rng);
    mu = sampler.mu(alpha, rng);
    if (i >= burnin) c.mu_draws.push_back(mu);
  }
  return c;
}

Chain run_chain(std::span<const double> y, const ModelParams& params, const Parametrization& par, int n_iter,
                std::uint64_t seed) {
  return run_chain(y, params, par, n_iter, n_iter / 20, seed);
}

double lag1_autocorr(const Chain& chain) {
  if (chain.mu_draws.size() < 100) throw std::invalid_argument("lag1_autocorr: need at least 100 draws");
  return lag1_autocorrelation(chain.mu_draws);
}

void write_chain_csv(std::ostream& out, const Chain& chain) { write_column_csv(out, chain.mu_draws, "mu"); }

void write_chain_csv(const std::filesystem::path& path, const Chain& chain) {
  write_column_csv(path, chain.mu_draws, "mu");
}

}  // namespace pncp
