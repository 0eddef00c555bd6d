#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "pncp/model.hpp"
#include "pncp/params.hpp"

namespace pncp {

struct Chain {
  std::vector<double> mu_draws;  // post-burnin
  std::uint64_t seed = 0;
  Parametrization scheme;
};

// Exact draw of alpha | mu, y from N(m_aw, sigma_eta^{-2a} Omega^{-1}) using the
// LDL' factor of Omega: m + sigma_eta^{-a} L^{-T} D^{-1/2} e.
std::vector<double> sample_states(std::span<const double> y, double mu, const ModelParams& params,
                                  const Parametrization& par, Rng& rng);

// mu | alpha, y ~ N(tau^{-1}(sigma_eps^{-2} y'w - sigma_eta^a rho'alpha), tau^{-1}) under a flat prior.
double sample_mu(std::span<const double> y, std::span<const double> alpha, const ModelParams& params,
                 const Parametrization& par, Rng& rng);

// Caches the factorization, rho(w) and tau(w) for repeated draws at fixed
// (sigma_eta^2, sigma_eps^2, phi) and scheme.
class GibbsSampler {
 public:
  GibbsSampler(std::span<const double> y, const ModelParams& params, Parametrization par);

  std::vector<double> states(double mu, Rng& rng) const;
  double mu(std::span<const double> alpha, Rng& rng) const;

  double tau() const { return tau_; }
  const std::vector<double>& rho() const { return rho_; }

 private:
  std::vector<double> y_;
  ModelParams params_;
  Parametrization par_;
  OmegaSystem sys_;
  std::vector<double> rho_;
  double tau_;
  double yw_;
  double scale_;  // sigma_eta^{a}
};

// N iterations in total, the first `burnin` discarded. mu starts at the
// sample mean of y.
Chain run_chain(std::span<const double> y, const ModelParams& params, const Parametrization& par, int n_iter,
                int burnin, std::uint64_t seed);
// burnin = 5% of N.
Chain run_chain(std::span<const double> y, const ModelParams& params, const Parametrization& par, int n_iter,
                std::uint64_t seed);

// Needs at least 100 draws.
double lag1_autocorr(const Chain& chain);

void write_chain_csv(std::ostream& out, const Chain& chain);
void write_chain_csv(const std::filesystem::path& path, const Chain& chain);

}  // namespace pncp
