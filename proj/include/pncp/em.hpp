#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pncp/model.hpp"
#include "pncp/params.hpp"

namespace pncp {

// p(alpha | y, theta) = N(m, V_a); only the tridiagonal band of V_a is kept.
struct SmoothedMoments {
  std::vector<double> m;
  std::vector<double> v_diag;
  std::vector<double> v_offdiag;
  double tr_v = 0.0;
  double tr_lambda_v = 0.0;
};

// sigma_eta^a m = Omega^{-1} z + mu w~,  V_a = sigma_eta^{-2a} Omega^{-1}.
SmoothedMoments e_step(std::span<const double> y, const ModelParams& params, const Parametrization& par);
SmoothedMoments e_step(std::span<const double> y, const ModelParams& params, const Parametrization& par,
                       const OmegaSystem& sys);

// tau(w) = sigma_eps^{-2} w'w + sigma_eta^{-2} w~'Lambda w~.
double tau(const ModelParams& params, std::span<const double> w);

// rho(w) = sigma_eps^{-2} 1 - Omega w~.
std::vector<double> rho(const OmegaSystem& sys, std::span<const double> w);

// Conditional maximizers of Q(theta | theta_i). `params` is the current
// theta; the moments must have been computed at it with the same `par`.
double update_mu(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                 const Parametrization& par);
double update_sigma_eps(std::span<const double> y, const SmoothedMoments& mom,
                        const ModelParams& params, const Parametrization& par);

struct UpdateResult {
  double value = 0.0;
  bool ok = true;
};

// Closed forms for a = 0 and for (a = 1, w = 1); otherwise the positive root
// of dQ/d sigma_eta^2 = 0 found by a 64-point log-grid scan over
// [1e-8, 1e8] x current value followed by bisection. Several roots: the one
// with the largest Q wins. No root: ok = false, value = current sigma_eta^2.
UpdateResult update_sigma_eta(std::span<const double> y, const SmoothedMoments& mom,
                              const ModelParams& params, const Parametrization& par);

// Root in (-1, 1) of the cubic
//   phi sigma_eta^2 = (1-phi^2) A - phi (1-phi^2) B
// maximizing Q. ok = false (value = current phi) if no root is found.
UpdateResult update_phi(const SmoothedMoments& mom, const ModelParams& params,
                        const Parametrization& par);

// 2 s^2 dQ/ds at s = sigma_eta^2 with everything else fixed. Zero at the
// sigma_eta^2 update; the sign follows dQ/ds.
double sigma_eta_score(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                       const Parametrization& par, double s);
// 2 Q as a function of s = sigma_eta^2, up to an additive constant.
double sigma_eta_objective(std::span<const double> y, const SmoothedMoments& mom,
                           const ModelParams& params, const Parametrization& par, double s);
// phi sigma_eta^2 - (1-phi^2) A + phi (1-phi^2) B.
double phi_cubic_residual(const SmoothedMoments& mom, const ModelParams& params,
                          const Parametrization& par, double phi);
// Q as a function of phi, up to an additive constant.
double phi_objective(const SmoothedMoments& mom, const ModelParams& params, const Parametrization& par,
                     double phi);

// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 (analytic, Newton-polished).
std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0);

enum class MeanScheme { centered, noncentered, partial };
enum class ScaleSchemeKind { centered, noncentered, partial, approx };
enum class Cycle2Scheme { centered, noncentered };
enum class Termination { tolerance, max_iterations };

std::string_view to_string(MeanScheme s);
std::string_view to_string(ScaleSchemeKind s);
std::string_view to_string(Cycle2Scheme s);
std::string_view to_string(Termination t);
MeanScheme parse_mean_scheme(std::string_view s);
ScaleSchemeKind parse_scale_scheme(std::string_view s);
Cycle2Scheme parse_cycle2_scheme(std::string_view s);

struct FitOptions {
  // Stop when the relative increase of the observed-data log-likelihood
  // drops below tol.
  double tol = 1e-8;
  int max_iter = 10000;
};

struct IterationRecord {
  int iter = 0;
  ModelParams theta;
  double loglik = 0.0;
  double a = std::numeric_limits<double>::quiet_NaN();
  double w_mean = std::numeric_limits<double>::quiet_NaN();
  double rate = std::numeric_limits<double>::quiet_NaN();
};

struct FitReport {
  // Entry 0 is the starting point.
  std::vector<IterationRecord> trajectory;
  int iterations = 0;
  Termination terminated_by = Termination::max_iterations;
  ModelParams final;
  double final_loglik = 0.0;
  // Log-likelihood after every cycle (one per iteration for Algorithms 1
  // and 2, three for Algorithm 3), starting with the initial value.
  std::vector<double> cycle_loglik;
  std::vector<std::string> warnings;
};

// Mean of y; half the sample variance for both variances; lag-1
// autocorrelation clamped to [-0.9, 0.9].
ModelParams default_init(std::span<const double> y);

// mu unknown; a = 0 and w in {0, 1, w_opt}.
FitReport algorithm1(std::span<const double> y, double init_mu, const ModelParams& known, MeanScheme scheme,
                     const FitOptions& opts = {});

// sigma_eta^2 unknown. partial: scale_opt every iteration (approx when
// a_opt degenerates); approx: w = 1, a from the current gamma.
FitReport algorithm2(std::span<const double> y, double init_sigma_eta_sq, const ModelParams& known,
                     ScaleSchemeKind scheme, const FitOptions& opts = {});

struct Algorithm3Schemes {
  MeanScheme cycle1 = MeanScheme::partial;
  Cycle2Scheme cycle2 = Cycle2Scheme::noncentered;
  ScaleSchemeKind cycle3 = ScaleSchemeKind::partial;
};

// All parameters unknown. Cycle 1 updates mu, cycle 2 (phi, sigma_eps^2),
// cycle 3 sigma_eta^2, each after its own E-step.
FitReport algorithm3(std::span<const double> y, const ModelParams& init, const Algorithm3Schemes& schemes,
                     const FitOptions& opts = {});
FitReport algorithm3(std::span<const double> y, const ModelParams& init, Cycle2Scheme cycle2,
                     ScaleSchemeKind cycle3, const FitOptions& opts = {});

// Rate of the mean-only EM: tau(w)^{-1} rho(w)' Omega^{-1} rho(w).
double rate_location(const ModelParams& params, std::span<const double> w);

// One Algorithm-1 step (a = 0) from mu, and its central-difference slope.
double mu_map(std::span<const double> y, const ModelParams& params, std::span<const double> w, double mu);
double mu_map_derivative(std::span<const double> y, const ModelParams& params, std::span<const double> w,
                         double at_mu, double h);

struct InfoEntries {
  double i_mu = 0.0;
  double i_mis_mu = 0.0;
  double i_sig_eta = 0.0;
  double i_sig_eps = 0.0;
  double i_phi = 0.0;
  double i_sig_eps_phi = 0.0;
};

// Augmented-information entries at theta for the given scheme. i_phi is
// evaluated with the (a = 0, w = 1) moments: `mom` is used when `par` is
// that scheme, otherwise those moments are recomputed.
InfoEntries info_entries(std::span<const double> y, const ModelParams& params, const Parametrization& par,
                         const SmoothedMoments& mom);

// iter,mu,sigma_eta_sq,sigma_eps_sq,phi,loglik,a,rate
void write_fit_csv(std::ostream& out, const FitReport& report);

}  // namespace pncp
