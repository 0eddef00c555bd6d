#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pncp {

// Raised when an iteration or factorization cannot proceed numerically
// (non-positive pivot, missing root, degenerate working parameter).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// theta = (mu, sigma_eta^2, sigma_eps^2, phi) of the AR(1)-plus-noise model
//   y_t = x_t + eps_t,  x_t = mu + phi (x_{t-1} - mu) + eta_t.
struct ModelParams {
  double mu = 0.0;
  double sigma_eta_sq = 1.0;
  double sigma_eps_sq = 1.0;
  double phi = 0.0;

  // Signal-to-noise ratio sigma_eta^2 / sigma_eps^2.
  double gamma() const { return sigma_eta_sq / sigma_eps_sq; }

  // Throws std::invalid_argument unless both variances are positive and
  // finite, |phi| < 1 and mu is finite.
  void validate() const;
};

std::string to_string(const ModelParams& p);

// Working parameters of the transform alpha_t = sigma_eta^{-a} (x_t - w_t mu).
// (a=0, w=0) is the centered scheme, (a=1, w=1) the noncentered one.
struct Parametrization {
  double a = 0.0;
  std::vector<double> w;

  static Parametrization centered(std::size_t n) { return {0.0, std::vector<double>(n, 0.0)}; }
  static Parametrization noncentered(std::size_t n) { return {1.0, std::vector<double>(n, 1.0)}; }

  // 1 - w.
  std::vector<double> w_tilde() const;
};

}  // namespace pncp
