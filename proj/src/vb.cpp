#include "pncp/vb.hpp"

#include <cmath>
#include <stdexcept>

#include "pncp/em.hpp"

namespace pncp {

namespace {

struct VbSystem {
  VbSystem(std::span<const double> y, const ModelParams& params, const Parametrization& par)
      : sys(params, y.size()), rho(pncp::rho(sys, par.w)), tau(pncp::tau(params, par.w)),
        scale(std::pow(params.sigma_eta_sq, 0.5 * par.a)) {
    if (par.w.size() != y.size()) throw std::invalid_argument("vb: w length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) yw += y[i] * par.w[i];
  }

  void sweep(std::span<const double> y, const ModelParams& params, VbState& s) const {
    const std::size_t n = y.size();
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = y[i] / params.sigma_eps_sq - rho[i] * s.m_mu;
    s.m_alpha = sys.solve(rhs);
    double ra = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s.m_alpha[i] /= scale;
      ra += rho[i] * s.m_alpha[i];
    }
    s.m_mu = (yw / params.sigma_eps_sq - scale * ra) / tau;
    s.var_mu = 1.0 / tau;
  }

  OmegaSystem sys;
  std::vector<double> rho;
  double tau;
  double scale;
  double yw = 0.0;
};

}  // namespace

VbState vb_init(std::span<const double> y, const ModelParams& params, const Parametrization& par) {
  validate_series(y);
  params.validate();
  const VbSystem vs(y, params, par);
  VbState s;
  s.m_mu = sample_mean(y);
  s.var_mu = 1.0 / vs.tau;
  std::vector<double> rhs(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rhs[i] = y[i] / params.sigma_eps_sq - vs.rho[i] * s.m_mu;
  s.m_alpha = vs.sys.solve(rhs);
  for (double& v : s.m_alpha) v /= vs.scale;
  return s;
}

VbState vb_iterate(std::span<const double> y, const ModelParams& params, const Parametrization& par,
                   const VbState& state) {
  validate_series(y);
  params.validate();
  VbState s = state;
  VbSystem(y, params, par).sweep(y, params, s);
  ++s.sweeps;
  return s;
}

VbState vb_fit(std::span<const double> y, const ModelParams& params, const Parametrization& par, double tol,
               int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("vb_fit: need tol > 0");
  validate_series(y);
  params.validate();
  const VbSystem vs(y, params, par);
  VbState s;
  s.m_mu = sample_mean(y);
  for (int it = 0; it < max_iter; ++it) {
    const double prev = s.m_mu;
    vs.sweep(y, params, s);
    if (std::abs(s.m_mu - prev) < tol * (1.0 + std::abs(s.m_mu))) {
      s.converged = true;
      break;
    }
    ++s.sweeps;
  }
  return s;
}

double vb_rate(const ModelParams& params, const Parametrization& par) { return rate_location(params, par.w); }

}  // namespace pncp
