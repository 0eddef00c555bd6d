#pragma once

#include <span>
#include <vector>

#include "pncp/model.hpp"
#include "pncp/params.hpp"

namespace pncp {

// q(alpha) = N(m_alpha, sigma_eta^{-2a} Omega^{-1}), q(mu) = N(m_mu, var_mu).
struct VbState {
  std::vector<double> m_alpha;
  double m_mu = 0.0;
  double var_mu = 0.0;  // 1 / tau(w)
  bool converged = false;
  int sweeps = 0;
};

// m_mu = mean of y, m_alpha at that m_mu.
VbState vb_init(std::span<const double> y, const ModelParams& params, const Parametrization& par);

// One sweep:
//   m_alpha = sigma_eta^{-a} Omega^{-1} (sigma_eps^{-2} y - rho(w) m_mu)
//   m_mu    = tau(w)^{-1} (sigma_eps^{-2} y'w - sigma_eta^a rho(w)'m_alpha)
VbState vb_iterate(std::span<const double> y, const ModelParams& params, const Parametrization& par,
                   const VbState& state);

// Sweeps until |delta m_mu| < tol (1 + |m_mu|). `sweeps` counts the sweeps
// that moved m_mu; the final sweep that only confirms the fixed point is not
// counted.
VbState vb_fit(std::span<const double> y, const ModelParams& params, const Parametrization& par,
               double tol = 1e-10, int max_iter = 100000);

// Same as rate_location.
double vb_rate(const ModelParams& params, const Parametrization& par);

}  // namespace pncp
