#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pncp/params.hpp"
#include "pncp/tridiag.hpp"

namespace pncp {

// Seedable generator. Streams for parallel replicates are derived as
// Rng(seed + replicate). Normals come from std::normal_distribution on
// std::mt19937_64, so draws are bit-reproducible for a given standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  double normal() { return normal_(engine_); }
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Omega(theta) for one series length with its factorization and selected
// inverse. Omega does not involve mu, so a system built for one theta serves
// every theta with the same (sigma_eta^2, sigma_eps^2, phi); functions taking
// a system alongside a ModelParams read mu from the ModelParams.
class OmegaSystem {
 public:
  OmegaSystem(const ModelParams& params, std::size_t n);

  std::size_t size() const { return omega_.size(); }
  // mu is whatever the system was built with and is not meaningful.
  const ModelParams& params() const { return params_; }
  bool matches(const ModelParams& p) const;
  // Throws std::invalid_argument unless matches(p) and the lengths agree.
  void check(const ModelParams& p, std::size_t n) const;
  const SymTridiag& omega() const { return omega_; }
  const SymTridiag& lambda() const { return lambda_; }
  const TridiagFactor& factor() const { return factor_; }
  const SelectedInverse& inverse() const { return inverse_; }
  double log_det_omega() const { return log_det_omega_; }

  std::vector<double> solve(std::span<const double> rhs) const { return pncp::solve(factor_, rhs); }

 private:
  ModelParams params_;
  SymTridiag lambda_;
  SymTridiag omega_;
  TridiagFactor factor_;
  SelectedInverse inverse_;
  double log_det_omega_;
};

// Draws x_0 from N(mu, sigma_eta^2/(1-phi^2)), runs the AR(1) recursion for
// t = 1..n and adds N(0, sigma_eps^2) observation noise.
std::vector<double> simulate(const ModelParams& params, std::size_t n, Rng& rng);
std::vector<double> simulate(const ModelParams& params, std::size_t n, std::uint64_t seed);

// log N(y; mu 1, S^{-1}), S^{-1} = sigma_eps^2 I + sigma_eta^2 Lambda^{-1}, in O(n) via
//   S = sigma_eps^{-2} I - sigma_eps^{-4} Omega^{-1},
//   log|S^{-1}| = n log sigma_eps^2 + n log sigma_eta^2 + log|Omega| - log(1 - phi^2).
double log_likelihood(const ModelParams& params, std::span<const double> y);
double log_likelihood(const ModelParams& params, std::span<const double> y, const OmegaSystem& sys);

// alpha_t = sigma_eta^{-a} (x_t - w_t mu) and its inverse.
std::vector<double> to_alpha(std::span<const double> x, const ModelParams& params,
                             const Parametrization& par);
std::vector<double> from_alpha(std::span<const double> alpha, const ModelParams& params,
                               const Parametrization& par);

// Throws std::invalid_argument for n < 2 or non-finite entries.
void validate_series(std::span<const double> y);

double sample_mean(std::span<const double> y);
double sample_variance(std::span<const double> y);
double lag1_autocorrelation(std::span<const double> y);

}  // namespace pncp
