#include "pncp/em.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "pncp/io.hpp"
#include "pncp/workparam.hpp"

namespace pncp {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

void check_lengths(std::span<const double> y, const SmoothedMoments& mom, const Parametrization& par) {
  if (mom.m.size() != y.size() || par.w.size() != y.size()) {
    throw std::invalid_argument("EM update: length mismatch between y, moments and w");
  }
}

double scale_power(const ModelParams& p, double a) { return std::pow(p.sigma_eta_sq, 0.5 * a); }

// Scalars of Q(theta | theta_i) that do not move with sigma_eta^2.
struct SigmaEtaTerms {
  double a = 0.0;
  double n = 0.0;
  double mu = 0.0;
  double inv_eps = 0.0;
  double p = 0.0;      // (y - mu w)'m
  double mm = 0.0;     // m'm + tr V
  double lml = 0.0;    // m'Lambda m + tr(Lambda V)
  double mlw = 0.0;    // m'Lambda w~
  double wlw = 0.0;    // w~'Lambda w~
};

SigmaEtaTerms sigma_eta_terms(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                              const Parametrization& par) {
  check_lengths(y, mom, par);
  const std::size_t n = y.size();
  const SymTridiag lambda = build_lambda(params.phi, n);
  const std::vector<double> wt = par.w_tilde();
  SigmaEtaTerms t;
  t.a = par.a;
  t.n = static_cast<double>(n);
  t.mu = params.mu;
  t.inv_eps = 1.0 / params.sigma_eps_sq;
  for (std::size_t i = 0; i < n; ++i) t.p += (y[i] - params.mu * par.w[i]) * mom.m[i];
  t.mm = dot(mom.m, mom.m) + mom.tr_v;
  t.lml = lambda.bilinear(mom.m, mom.m) + mom.tr_lambda_v;
  t.mlw = lambda.bilinear(mom.m, wt);
  t.wlw = lambda.bilinear(wt, wt);
  return t;
}

double score_at(const SigmaEtaTerms& t, double s) {
  const double a = t.a;
  const double sh = std::pow(s, 0.5 * a);
  const double sa = sh * sh;
  return a * t.inv_eps * (sh * s * t.p - sa * s * t.mm) - t.n * (1.0 - a) * s + (1.0 - a) * sa * t.lml +
         (a - 2.0) * t.mu * sh * t.mlw + t.mu * t.mu * t.wlw;
}

double objective_at(const SigmaEtaTerms& t, double s) {
  const double a = t.a;
  const double sh = std::pow(s, 0.5 * a);
  const double sa = sh * sh;
  return t.inv_eps * (2.0 * sh * t.p - sa * t.mm) - t.n * (1.0 - a) * std::log(s) - sa / s * t.lml +
         2.0 * t.mu * sh / s * t.mlw - t.mu * t.mu * t.wlw / s;
}

bool all_equal(std::span<const double> v, double x) {
  return std::all_of(v.begin(), v.end(), [x](double e) { return e == x; });
}

// Lag-one and diagonal second moments of zeta = sigma_eta^a m - mu w~.
struct PhiTerms {
  double lag = 0.0;       // A
  double interior = 0.0;  // B
  double ends = 0.0;      // first and last diagonal entries
  double sigma_eta_sq = 0.0;
};

PhiTerms phi_terms(const SmoothedMoments& mom, const ModelParams& params, const Parametrization& par) {
  const std::size_t n = mom.m.size();
  if (par.w.size() != n) throw std::invalid_argument("update_phi: length mismatch");
  const double sa = scale_power(params, par.a);
  const double sa2 = sa * sa;
  std::vector<double> zeta(n);
  for (std::size_t i = 0; i < n; ++i) zeta[i] = sa * mom.m[i] - params.mu * (1.0 - par.w[i]);
  PhiTerms t;
  t.sigma_eta_sq = params.sigma_eta_sq;
  for (std::size_t i = 0; i + 1 < n; ++i) t.lag += zeta[i] * zeta[i + 1] + sa2 * mom.v_offdiag[i];
  for (std::size_t i = 1; i + 1 < n; ++i) t.interior += zeta[i] * zeta[i] + sa2 * mom.v_diag[i];
  t.ends = zeta[0] * zeta[0] + sa2 * mom.v_diag[0] + zeta[n - 1] * zeta[n - 1] + sa2 * mom.v_diag[n - 1];
  return t;
}

double phi_residual_at(const PhiTerms& t, double phi) {
  const double q = 1.0 - phi * phi;
  return phi * t.sigma_eta_sq - q * t.lag + phi * q * t.interior;
}

double phi_objective_at(const PhiTerms& t, double phi) {
  return 0.5 * std::log1p(-phi * phi) -
         0.5 / t.sigma_eta_sq * (t.ends + (1.0 + phi * phi) * t.interior - 2.0 * phi * t.lag);
}

double polish_cubic(double c3, double c2, double c1, double c0, double x) {
  for (int k = 0; k < 4; ++k) {
    const double f = ((c3 * x + c2) * x + c1) * x + c0;
    const double df = (3.0 * c3 * x + 2.0 * c2) * x + c1;
    if (df == 0.0) break;
    const double step = f / df;
    x -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(x))) break;
  }
  return x;
}

std::vector<double> real_quadratic_roots(double c2, double c1, double c0) {
  if (c2 == 0.0) {
    if (c1 == 0.0) return {};
    return {-c0 / c1};
  }
  const double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return {};
  const double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  std::vector<double> roots;
  roots.push_back(q / c2);
  if (q != 0.0) roots.push_back(c0 / q);
  return roots;
}

}  // namespace

SmoothedMoments e_step(std::span<const double> y, const ModelParams& p, const Parametrization& par,
                       const OmegaSystem& sys) {
  const std::size_t n = y.size();
  sys.check(p, n);
  if (par.w.size() != n) throw std::invalid_argument("e_step: length mismatch");
  const double ie = 1.0 / p.sigma_eps_sq;
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = ie * (y[i] - p.mu);
  const std::vector<double> g = sys.solve(z);

  const double sa = scale_power(p, par.a);
  const double inv_sa2 = 1.0 / (sa * sa);
  SmoothedMoments mom;
  mom.m.resize(n);
  for (std::size_t i = 0; i < n; ++i) mom.m[i] = (g[i] + p.mu * (1.0 - par.w[i])) / sa;
  mom.v_diag = sys.inverse().inv_diag;
  mom.v_offdiag = sys.inverse().inv_offdiag;
  for (double& v : mom.v_diag) v *= inv_sa2;
  for (double& v : mom.v_offdiag) v *= inv_sa2;

  double interior = 0.0, off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mom.tr_v += mom.v_diag[i];
    if (i > 0 && i + 1 < n) interior += mom.v_diag[i];
  }
  for (double v : mom.v_offdiag) off += v;
  mom.tr_lambda_v =
      (1.0 + p.phi * p.phi) * interior + mom.v_diag.front() + mom.v_diag.back() - 2.0 * p.phi * off;
  return mom;
}

SmoothedMoments e_step(std::span<const double> y, const ModelParams& params, const Parametrization& par) {
  validate_series(y);
  return e_step(y, params, par, OmegaSystem(params, y.size()));
}

double tau(const ModelParams& params, std::span<const double> w) {
  const SymTridiag lambda = build_lambda(params.phi, w.size());
  std::vector<double> wt(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) wt[i] = 1.0 - w[i];
  return dot(w, w) / params.sigma_eps_sq + lambda.bilinear(wt, wt) / params.sigma_eta_sq;
}

std::vector<double> rho(const OmegaSystem& sys, std::span<const double> w) {
  const std::size_t n = sys.size();
  if (w.size() != n) throw std::invalid_argument("rho: length mismatch");
  std::vector<double> wt(n);
  for (std::size_t i = 0; i < n; ++i) wt[i] = 1.0 - w[i];
  std::vector<double> r = sys.omega().multiply(wt);
  const double ie = 1.0 / sys.params().sigma_eps_sq;
  for (double& v : r) v = ie - v;
  return r;
}

double update_mu(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                 const Parametrization& par) {
  check_lengths(y, mom, par);
  const std::size_t n = y.size();
  const double sa = scale_power(params, par.a);
  const std::vector<double> wt = par.w_tilde();
  const SymTridiag lambda = build_lambda(params.phi, n);
  double obs = 0.0;
  for (std::size_t i = 0; i < n; ++i) obs += (y[i] - sa * mom.m[i]) * par.w[i];
  const double num = obs / params.sigma_eps_sq + sa / params.sigma_eta_sq * lambda.bilinear(mom.m, wt);
  const double t = tau(params, par.w);
  if (!(t > 0.0)) throw NumericalError("update_mu: tau(w) is not positive");
  return num / t;
}

double update_sigma_eps(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                        const Parametrization& par) {
  check_lengths(y, mom, par);
  const std::size_t n = y.size();
  const double sa = scale_power(params, par.a);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - params.mu * par.w[i] - sa * mom.m[i];
    ss += r * r;
  }
  return (ss + sa * sa * mom.tr_v) / static_cast<double>(n);
}

double sigma_eta_score(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                       const Parametrization& par, double s) {
  return score_at(sigma_eta_terms(y, mom, params, par), s);
}

double sigma_eta_objective(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                           const Parametrization& par, double s) {
  return objective_at(sigma_eta_terms(y, mom, params, par), s);
}

UpdateResult update_sigma_eta(std::span<const double> y, const SmoothedMoments& mom, const ModelParams& params,
                              const Parametrization& par) {
  const SigmaEtaTerms t = sigma_eta_terms(y, mom, params, par);
  const double prev = params.sigma_eta_sq;

  if (par.a == 0.0) {
    // (m - mu w~)'Lambda (m - mu w~) + tr(Lambda V_0), over n
    const double v = (t.lml - 2.0 * t.mu * t.mlw + t.mu * t.mu * t.wlw) / t.n;
    if (v > 0.0 && std::isfinite(v)) return {v, true};
    return {prev, false};
  }
  if (par.a == 1.0 && all_equal(par.w, 1.0)) {
    if (t.p > 0.0 && t.mm > 0.0) return {(t.p / t.mm) * (t.p / t.mm), true};
    return {prev, false};
  }

  constexpr int kGrid = 64;
  const double log_lo = std::log(prev * 1e-8);
  const double log_hi = std::log(prev * 1e8);
  std::vector<double> grid(kGrid), score(kGrid);
  for (int k = 0; k < kGrid; ++k) {
    grid[k] = log_lo + (log_hi - log_lo) * k / (kGrid - 1);
    score[k] = score_at(t, std::exp(grid[k]));
  }
  std::vector<double> roots;
  for (int k = 0; k + 1 < kGrid; ++k) {
    if (score[k] == 0.0) {
      roots.push_back(std::exp(grid[k]));
      continue;
    }
    if ((score[k] > 0.0) == (score[k + 1] > 0.0) || score[k + 1] == 0.0) continue;
    double lo = grid[k], hi = grid[k + 1];
    const bool rising = score[k] < 0.0;
    // Bisection in log s: a width of 1e-12 there is a 1e-12 relative width in s.
    while (hi - lo > 1e-12) {
      const double mid = 0.5 * (lo + hi);
      const double f = score_at(t, std::exp(mid));
      if (f == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((f < 0.0) == rising) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    roots.push_back(std::exp(0.5 * (lo + hi)));
  }
  if (score[kGrid - 1] == 0.0) roots.push_back(std::exp(grid[kGrid - 1]));
  if (roots.empty()) return {prev, false};

  double best = roots.front();
  double best_q = objective_at(t, best);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    const double q = objective_at(t, roots[i]);
    if (q > best_q) {
      best = roots[i];
      best_q = q;
    }
  }
  return {best, true};
}

std::vector<double> real_cubic_roots(double c3, double c2, double c1, double c0) {
  const double scale = std::max({std::abs(c2), std::abs(c1), std::abs(c0)});
  if (std::abs(c3) <= 1e-14 * scale) {
    std::vector<double> r = real_quadratic_roots(c2, c1, c0);
    for (double& x : r) x = polish_cubic(c3, c2, c1, c0, x);
    return r;
  }
  const double a = c2 / c3, b = c1 / c3, c = c0 / c3;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  std::vector<double> roots;
  if (disc > 0.0) {
    const double u = std::cbrt(-0.5 * q - std::copysign(std::sqrt(disc), q));
    const double v = (u == 0.0) ? 0.0 : -p / (3.0 * u);
    roots.push_back(u + v + shift);
  } else if (p == 0.0) {
    roots.push_back(shift);
  } else {
    const double r = std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(2.0 * r * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
    }
  }
  for (double& x : roots) x = polish_cubic(c3, c2, c1, c0, x);
  return roots;
}

double phi_cubic_residual(const SmoothedMoments& mom, const ModelParams& params, const Parametrization& par,
                          double phi) {
  return phi_residual_at(phi_terms(mom, params, par), phi);
}

double phi_objective(const SmoothedMoments& mom, const ModelParams& params, const Parametrization& par,
                     double phi) {
  return phi_objective_at(phi_terms(mom, params, par), phi);
}

UpdateResult update_phi(const SmoothedMoments& mom, const ModelParams& params, const Parametrization& par) {
  const PhiTerms t = phi_terms(mom, params, par);
  // -B phi^3 + A phi^2 + (sigma_eta^2 + B) phi - A = 0
  std::vector<double> roots =
      real_cubic_roots(-t.interior, t.lag, t.sigma_eta_sq + t.interior, -t.lag);
  std::erase_if(roots, [](double r) { return !(std::abs(r) < 1.0); });
  if (roots.empty()) {
    // The residual is -sigma_eta^2 at -1 and +sigma_eta^2 at +1, so a root
    // exists; fall back to bisection if the analytic path lost it.
    double lo = -1.0, hi = 1.0;
    for (int k = 0; k < 200 && hi - lo > 1e-15; ++k) {
      const double mid = 0.5 * (lo + hi);
      (phi_residual_at(t, mid) < 0.0 ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    if (!(std::abs(r) < 1.0)) return {params.phi, false};
    roots.push_back(r);
  }
  double best = roots.front();
  double best_q = phi_objective_at(t, best);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    const double q = phi_objective_at(t, roots[i]);
    if (q > best_q || (q == best_q && std::abs(roots[i] - params.phi) < std::abs(best - params.phi))) {
      best = roots[i];
      best_q = q;
    }
  }
  return {best, true};
}

std::string_view to_string(MeanScheme s) {
  switch (s) {
    case MeanScheme::centered: return "centered";
    case MeanScheme::noncentered: return "noncentered";
    case MeanScheme::partial: return "partial";
  }
  return "?";
}

std::string_view to_string(ScaleSchemeKind s) {
  switch (s) {
    case ScaleSchemeKind::centered: return "centered";
    case ScaleSchemeKind::noncentered: return "noncentered";
    case ScaleSchemeKind::partial: return "partial";
    case ScaleSchemeKind::approx: return "approx";
  }
  return "?";
}

std::string_view to_string(Cycle2Scheme s) {
  return s == Cycle2Scheme::centered ? "centered" : "noncentered";
}

std::string_view to_string(Termination t) {
  return t == Termination::tolerance ? "tolerance" : "max-iterations";
}

MeanScheme parse_mean_scheme(std::string_view s) {
  if (s == "centered") return MeanScheme::centered;
  if (s == "noncentered") return MeanScheme::noncentered;
  if (s == "partial") return MeanScheme::partial;
  throw std::invalid_argument("unknown location scheme '" + std::string(s) + "'");
}

ScaleSchemeKind parse_scale_scheme(std::string_view s) {
  if (s == "centered") return ScaleSchemeKind::centered;
  if (s == "noncentered") return ScaleSchemeKind::noncentered;
  if (s == "partial") return ScaleSchemeKind::partial;
  if (s == "approx") return ScaleSchemeKind::approx;
  throw std::invalid_argument("unknown scale scheme '" + std::string(s) + "'");
}

Cycle2Scheme parse_cycle2_scheme(std::string_view s) {
  if (s == "centered") return Cycle2Scheme::centered;
  if (s == "noncentered") return Cycle2Scheme::noncentered;
  throw std::invalid_argument("unknown cycle-2 scheme '" + std::string(s) + "'");
}

ModelParams default_init(std::span<const double> y) {
  validate_series(y);
  ModelParams p;
  p.mu = sample_mean(y);
  const double v = y.size() > 2 ? sample_variance(y) : 1.0;
  p.sigma_eps_sq = p.sigma_eta_sq = v > 0.0 ? 0.5 * v : 1.0;
  p.phi = y.size() > 2 ? std::clamp(lag1_autocorrelation(y), -0.9, 0.9) : 0.0;
  return p;
}

namespace {

Parametrization mean_parametrization(MeanScheme scheme, const OmegaSystem& sys) {
  const std::size_t n = sys.size();
  switch (scheme) {
    case MeanScheme::centered: return {0.0, std::vector<double>(n, 0.0)};
    case MeanScheme::noncentered: return {0.0, std::vector<double>(n, 1.0)};
    case MeanScheme::partial: return {0.0, w_opt_location(sys)};
  }
  throw std::logic_error("mean_parametrization");
}

Parametrization scale_parametrization(ScaleSchemeKind scheme, std::span<const double> y, const ModelParams& p,
                                      const OmegaSystem& sys, std::vector<std::string>& warnings) {
  const std::size_t n = sys.size();
  switch (scheme) {
    case ScaleSchemeKind::centered: return Parametrization::centered(n);
    case ScaleSchemeKind::noncentered: return Parametrization::noncentered(n);
    case ScaleSchemeKind::approx: {
      const ScaleApprox s = scale_approx(p.gamma(), p.phi);
      return {s.a, std::vector<double>(n, s.w)};
    }
    case ScaleSchemeKind::partial: {
      try {
        ScaleScheme s = scale_opt(y, p, sys);
        return {s.a_opt, std::move(s.w_opt)};
      } catch (const DegenerateScaleError&) {
        warnings.emplace_back("degenerate a_opt; used the approximate scheme");
        const ScaleApprox s = scale_approx(p.gamma(), p.phi);
        return {s.a, std::vector<double>(n, s.w)};
      }
    }
  }
  throw std::logic_error("scale_parametrization");
}

bool converged(double prev, double next, double tol) {
  const double denom = std::abs(prev) > 0.0 ? std::abs(prev) : 1.0;
  return (next - prev) / denom < tol;
}

void finish(FitReport& r, const ModelParams& theta, double ll) {
  r.final = theta;
  r.final_loglik = ll;
}

}  // namespace

FitReport algorithm1(std::span<const double> y, double init_mu, const ModelParams& known, MeanScheme scheme,
                     const FitOptions& opts) {
  validate_series(y);
  ModelParams theta = known;
  theta.mu = init_mu;
  theta.validate();
  // Omega does not involve mu, so one system serves every iteration.
  const OmegaSystem sys(theta, y.size());
  const Parametrization par = mean_parametrization(scheme, sys);
  const double rate = rate_location(theta, par.w);
  const double w_mean = mean_of(par.w);

  FitReport r;
  double ll = log_likelihood(theta, y, sys);
  r.trajectory.push_back({0, theta, ll, par.a, w_mean, rate});
  r.cycle_loglik.push_back(ll);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const SmoothedMoments mom = e_step(y, theta, par, sys);
    theta.mu = update_mu(y, mom, theta, par);
    const double ll_new = log_likelihood(theta, y, sys);
    r.trajectory.push_back({it, theta, ll_new, par.a, w_mean, rate});
    r.cycle_loglik.push_back(ll_new);
    r.iterations = it;
    const bool done = converged(ll, ll_new, opts.tol);
    ll = ll_new;
    if (done) {
      r.terminated_by = Termination::tolerance;
      break;
    }
  }
  finish(r, theta, ll);
  return r;
}

FitReport algorithm2(std::span<const double> y, double init_sigma_eta_sq, const ModelParams& known,
                     ScaleSchemeKind scheme, const FitOptions& opts) {
  validate_series(y);
  ModelParams theta = known;
  theta.sigma_eta_sq = init_sigma_eta_sq;
  theta.validate();

  FitReport r;
  auto sys = std::make_unique<OmegaSystem>(theta, y.size());
  double ll = log_likelihood(theta, y, *sys);
  r.trajectory.push_back({0, theta, ll});
  r.cycle_loglik.push_back(ll);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Parametrization par = scale_parametrization(scheme, y, theta, *sys, r.warnings);
    const SmoothedMoments mom = e_step(y, theta, par, *sys);
    const UpdateResult u = update_sigma_eta(y, mom, theta, par);
    if (!u.ok) r.warnings.push_back("iteration " + std::to_string(it) + ": sigma_eta^2 update failed");
    theta.sigma_eta_sq = u.value;
    sys = std::make_unique<OmegaSystem>(theta, y.size());
    const double ll_new = log_likelihood(theta, y, *sys);
    r.trajectory.push_back({it, theta, ll_new, par.a, mean_of(par.w)});
    r.cycle_loglik.push_back(ll_new);
    r.iterations = it;
    const bool done = converged(ll, ll_new, opts.tol);
    ll = ll_new;
    if (done) {
      r.terminated_by = Termination::tolerance;
      break;
    }
  }
  finish(r, theta, ll);
  return r;
}

FitReport algorithm3(std::span<const double> y, const ModelParams& init, const Algorithm3Schemes& schemes,
                     const FitOptions& opts) {
  validate_series(y);
  ModelParams theta = init;
  theta.validate();
  const std::size_t n = y.size();
  const Parametrization par2 =
      schemes.cycle2 == Cycle2Scheme::centered ? Parametrization::centered(n) : Parametrization::noncentered(n);

  FitReport r;
  // sys always matches theta's (sigma_eta^2, sigma_eps^2, phi).
  auto sys = std::make_unique<OmegaSystem>(theta, n);
  double ll = log_likelihood(theta, y, *sys);
  r.trajectory.push_back({0, theta, ll});
  r.cycle_loglik.push_back(ll);
  auto failed = [&](int it, const char* what) {
    r.warnings.push_back("iteration " + std::to_string(it) + ": " + what + " update failed");
  };
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double ll_start = ll;

    const Parametrization par1 = mean_parametrization(schemes.cycle1, *sys);
    theta.mu = update_mu(y, e_step(y, theta, par1, *sys), theta, par1);
    r.cycle_loglik.push_back(log_likelihood(theta, y, *sys));

    // Omega does not involve mu, so cycle 2 reuses the system.
    const SmoothedMoments mom2 = e_step(y, theta, par2, *sys);
    const UpdateResult phi = update_phi(mom2, theta, par2);
    if (!phi.ok) failed(it, "phi");
    theta.sigma_eps_sq = update_sigma_eps(y, mom2, theta, par2);
    theta.phi = phi.value;
    sys = std::make_unique<OmegaSystem>(theta, n);
    r.cycle_loglik.push_back(log_likelihood(theta, y, *sys));

    const Parametrization par3 = scale_parametrization(schemes.cycle3, y, theta, *sys, r.warnings);
    const UpdateResult s = update_sigma_eta(y, e_step(y, theta, par3, *sys), theta, par3);
    if (!s.ok) failed(it, "sigma_eta^2");
    theta.sigma_eta_sq = s.value;
    sys = std::make_unique<OmegaSystem>(theta, n);
    ll = log_likelihood(theta, y, *sys);
    r.cycle_loglik.push_back(ll);

    r.trajectory.push_back({it, theta, ll, par3.a, mean_of(par3.w)});
    r.iterations = it;
    if (converged(ll_start, ll, opts.tol)) {
      r.terminated_by = Termination::tolerance;
      break;
    }
  }
  finish(r, theta, ll);
  return r;
}

FitReport algorithm3(std::span<const double> y, const ModelParams& init, Cycle2Scheme cycle2,
                     ScaleSchemeKind cycle3, const FitOptions& opts) {
  return algorithm3(y, init, Algorithm3Schemes{MeanScheme::partial, cycle2, cycle3}, opts);
}

double rate_location(const ModelParams& params, std::span<const double> w) {
  params.validate();
  const OmegaSystem sys(params, w.size());
  const std::vector<double> r = rho(sys, w);
  const std::vector<double> g = sys.solve(r);
  return dot(r, g) / tau(params, w);
}

double mu_map(std::span<const double> y, const ModelParams& params, std::span<const double> w, double mu) {
  ModelParams p = params;
  p.mu = mu;
  const Parametrization par{0.0, std::vector<double>(w.begin(), w.end())};
  return update_mu(y, e_step(y, p, par), p, par);
}

double mu_map_derivative(std::span<const double> y, const ModelParams& params, std::span<const double> w,
                         double at_mu, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("mu_map_derivative: need h > 0");
  return (mu_map(y, params, w, at_mu + h) - mu_map(y, params, w, at_mu - h)) / (2.0 * h);
}

InfoEntries info_entries(std::span<const double> y, const ModelParams& params, const Parametrization& par,
                         const SmoothedMoments& mom) {
  validate_series(y);
  const std::size_t n = y.size();
  if (par.w.size() != n || mom.m.size() != n) throw std::invalid_argument("info_entries: length mismatch");
  const OmegaSystem sys(params, n);
  InfoEntries e;
  e.i_mu = tau(params, par.w);
  const std::vector<double> r = rho(sys, par.w);
  e.i_mis_mu = dot(r, sys.solve(r));
  e.i_sig_eta = scale_information(y, params, sys, par.a, par.w) / (2.0 * params.sigma_eta_sq * params.sigma_eta_sq);
  e.i_sig_eps = static_cast<double>(n) / (2.0 * params.sigma_eps_sq * params.sigma_eps_sq);

  const bool same = par.a == 0.0 && all_equal(par.w, 1.0);
  const SmoothedMoments other = same ? SmoothedMoments{} : e_step(y, params, {0.0, std::vector<double>(n, 1.0)}, sys);
  const SmoothedMoments& m01 = same ? mom : other;
  const double phi = params.phi;
  double interior = 0.0;
  for (std::size_t t = 1; t + 1 < n; ++t) interior += m01.m[t] * m01.m[t] + m01.v_diag[t];
  e.i_phi = (1.0 + phi * phi) / ((1.0 - phi * phi) * (1.0 - phi * phi)) + interior / params.sigma_eta_sq;
  e.i_sig_eps_phi = 0.0;
  return e;
}

void write_fit_csv(std::ostream& out, const FitReport& report) {
  out << "iter,mu,sigma_eta_sq,sigma_eps_sq,phi,loglik,a,rate\n";
  for (const IterationRecord& rec : report.trajectory) {
    out << rec.iter << ',' << format_double(rec.theta.mu) << ',' << format_double(rec.theta.sigma_eta_sq) << ','
        << format_double(rec.theta.sigma_eps_sq) << ',' << format_double(rec.theta.phi) << ','
        << format_double(rec.loglik) << ',' << format_double(rec.a) << ',' << format_double(rec.rate) << '\n';
  }
}

}  // namespace pncp
