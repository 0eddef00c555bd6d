#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pncp/model.hpp"
#include "pncp/params.hpp"

namespace pncp {

// Optimal location weights: w_opt = 1 - sigma_eps^{-2} Omega^{-1} 1.
// With these weights the mean-only EM converges in one step.
std::vector<double> w_opt_location(const ModelParams& params, std::size_t n);
std::vector<double> w_opt_location(const OmegaSystem& sys);

// Same vector from the first-row closed form of Q^{-1}; phi = 0 gives the
// constant 1/(1+gamma).
std::vector<double> w_opt_location_closed(const ModelParams& params, std::size_t n);

struct Bounds {
  double low = 0.0;
  double high = 0.0;
};

// Entrywise bounds on w_opt from B1 = gamma/((1-phi)^2+gamma), B2 = gamma/(1-phi^2+gamma).
Bounds corollary1_bounds(const ModelParams& params);

struct LocationScheme {
  std::vector<double> w_opt;
  double bounds_low = 0.0;
  double bounds_high = 0.0;
};

LocationScheme location_scheme(const ModelParams& params, std::size_t n);

// Best single w shared by all t: {n gamma / (1'Lambda 1) + 1}^{-1}.
double w_opt_common(const ModelParams& params, std::size_t n);

// 1' Lambda(phi) 1 = n (1-phi)^2 + 2 phi (1-phi).
double lambda_total(double phi, std::size_t n);

// Large-n limit of a_opt: 1 - gamma / sqrt(((1-phi)^2+gamma)((1+phi)^2+gamma)).
double a_hat_asymptotic(double gamma, double phi);

struct ScaleApprox {
  double a = 1.0;
  double w = 1.0;  // applied to every t
};

// w = 1, a = [1 + gamma/(2(1-phi^2))]^{-1}.
ScaleApprox scale_approx(double gamma, double phi);

// Thrown by scale_opt when |a_opt| < kDegenerateScale and mu != 0; the
// optimal w then divides by ~0.
class DegenerateScaleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline constexpr double kDegenerateScale = 1e-10;

struct ScaleScheme {
  double a_opt = 1.0;
  std::vector<double> w_opt;
  double a_hat = 1.0;
  double a_approx = 1.0;
  // z = sigma_eps^{-2} (y - mu 1)
  std::vector<double> z;
};

// Working parameters minimizing the augmented information for sigma_eta^2.
// For mu = 0 the optimum does not involve w: w_opt echoes current_w (or is
// all ones when none is given). Throws DegenerateScaleError as described above.
ScaleScheme scale_opt(std::span<const double> y, const ModelParams& params,
                      std::span<const double> current_w = {});
ScaleScheme scale_opt(std::span<const double> y, const ModelParams& params, const OmegaSystem& sys,
                      std::span<const double> current_w = {});

// The quantity I(a, w~) whose scaled value (2 sigma_eta^4)^{-1} I is the
// augmented information for sigma_eta^2:
//   I = mu^2 a^2 w~'Omega w~/2 + mu a^2 z'w~ - 2 sigma_eta^{-2} a mu z'Omega^{-1}Lambda w~
//       + n (1-a)^2 + a^2 z'Omega^{-1} z/2.
double scale_information(std::span<const double> y, const ModelParams& params, const OmegaSystem& sys,
                         double a, std::span<const double> w);

}  // namespace pncp
