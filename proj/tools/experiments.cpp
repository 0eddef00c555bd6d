#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pncp/gibbs.hpp"
#include "pncp/io.hpp"
#include "pncp/model.hpp"
#include "pncp/vb.hpp"
#include "pncp/workparam.hpp"

namespace pncp::exp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number '" + v + "' for " + key);
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad integer '" + v + "' for " + key);
  }
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

double min_step(const std::vector<double>& ll) {
  double m = 0.0;
  for (std::size_t i = 1; i < ll.size(); ++i) m = std::min(m, ll[i] - ll[i - 1]);
  return m;
}

ResultRow row_from(const Setting& s, const std::string& scheme, int rep, const FitReport& f) {
  ResultRow r;
  r.phi = s.phi;
  r.gamma = s.gamma();
  r.scheme = scheme;
  r.replicate = rep;
  r.iterations = f.iterations;
  r.converged = f.terminated_by == Termination::tolerance;
  r.estimate = f.final;
  r.loglik = f.final_loglik;
  r.min_step = min_step(f.cycle_loglik);
  r.warnings = static_cast<int>(f.warnings.size());
  return r;
}

std::vector<std::string> schemes_for(const ExperimentConfig& cfg, const std::vector<std::string>& all) {
  if (cfg.schemes.empty()) return all;
  for (const std::string& s : cfg.schemes) {
    if (std::find(all.begin(), all.end(), s) == all.end()) {
      throw std::invalid_argument("unknown scheme '" + s + "' for this command");
    }
  }
  return cfg.schemes;
}

using Fit = std::function<FitReport(const std::vector<double>&, const ModelParams&, const std::string&)>;

std::vector<ResultRow> run_table(const ExperimentConfig& cfg, const std::vector<std::string>& all, const Fit& fit) {
  cfg.validate();
  const std::vector<std::string> schemes = schemes_for(cfg, all);
  const std::vector<Setting> grid = settings(cfg);
  const int tasks = static_cast<int>(grid.size()) * cfg.replicates;
  std::vector<std::vector<ResultRow>> out(static_cast<std::size_t>(tasks));
  parallel_for(tasks, cfg.threads, [&](int k) {
    const Setting& s = grid[static_cast<std::size_t>(k / cfg.replicates)];
    const int rep = k % cfg.replicates;
    const std::vector<double> y = dataset(cfg, s, rep);
    const ModelParams th = truth(cfg, s);
    for (const std::string& name : schemes) {
      try {
        out[static_cast<std::size_t>(k)].push_back(row_from(s, name, rep, fit(y, th, name)));
      } catch (const std::exception& e) {
        ResultRow r;
        r.phi = s.phi;
        r.gamma = s.gamma();
        r.scheme = name;
        r.replicate = rep;
        r.loglik = std::numeric_limits<double>::quiet_NaN();
        r.estimate = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        r.error = e.what();
        out[static_cast<std::size_t>(k)].push_back(std::move(r));
      }
    }
  });
  // Setting-major, then scheme, then replicate.
  std::vector<ResultRow> rows;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t si = 0; si < schemes.size(); ++si) {
      for (int rep = 0; rep < cfg.replicates; ++rep) {
        rows.push_back(out[g * static_cast<std::size_t>(cfg.replicates) + static_cast<std::size_t>(rep)][si]);
      }
    }
  }
  return rows;
}

FitOptions fit_options(const ExperimentConfig& cfg) { return {cfg.tol, cfg.max_iter}; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c == '\n' ? ' ' : c;
  }
  return q + "\"";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (sigma_eta_sq_list.empty() || phi_list.empty() || n_list.empty() || gamma_list.empty()) {
    throw std::invalid_argument("parameter lists must be nonempty");
  }
  if (!(sigma_eps_sq > 0.0)) throw std::invalid_argument("sigma_eps_sq must be positive");
  for (double s : sigma_eta_sq_list) {
    if (!(s > 0.0)) throw std::invalid_argument("sigma_eta_sq values must be positive");
  }
  for (double g : gamma_list) {
    if (!(g > 0.0)) throw std::invalid_argument("gamma values must be positive");
  }
  for (double p : phi_list) {
    if (!(std::abs(p) < 1.0)) throw std::invalid_argument("phi values must lie in (-1, 1)");
  }
  for (int m : n_list) {
    if (m < 2) throw std::invalid_argument("n_list values must be at least 2");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (gibbs_burnin < 0 || gibbs_draws <= gibbs_burnin + 100) {
    throw std::invalid_argument("gibbs_draws must exceed gibbs_burnin by at least 100");
  }
}

std::vector<std::string> apply_config_text(ExperimentConfig& cfg, std::istream& in) {
  std::vector<std::string> keys;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    keys.push_back(key);
    if (key == "n") {
      cfg.n = static_cast<int>(to_int(key, val));
    } else if (key == "replicates") {
      cfg.replicates = static_cast<int>(to_int(key, val));
    } else if (key == "mu") {
      cfg.mu = to_double(key, val);
    } else if (key == "sigma_eps_sq") {
      cfg.sigma_eps_sq = to_double(key, val);
    } else if (key == "sigma_eta_sq") {
      cfg.sigma_eta_sq_list = to_doubles(key, val);
    } else if (key == "phi") {
      cfg.phi_list = to_doubles(key, val);
    } else if (key == "schemes") {
      cfg.schemes = split_list(val);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_int(key, val));
    } else if (key == "tol") {
      cfg.tol = to_double(key, val);
    } else if (key == "max_iter") {
      cfg.max_iter = static_cast<int>(to_int(key, val));
    } else if (key == "init_mu") {
      cfg.init_mu = val == "mean" ? std::numeric_limits<double>::quiet_NaN() : to_double(key, val);
    } else if (key == "threads") {
      cfg.threads = static_cast<int>(to_int(key, val));
    } else if (key == "n_list") {
      cfg.n_list.clear();
      for (const std::string& s : split_list(val)) cfg.n_list.push_back(static_cast<int>(to_int(key, s)));
    } else if (key == "gamma") {
      cfg.gamma_list = to_doubles(key, val);
    } else if (key == "gibbs_draws") {
      cfg.gibbs_draws = static_cast<int>(to_int(key, val));
    } else if (key == "gibbs_burnin") {
      cfg.gibbs_burnin = static_cast<int>(to_int(key, val));
    } else {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return keys;
}

std::vector<std::string> apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return apply_config_text(cfg, in);
}

std::vector<Setting> settings(const ExperimentConfig& cfg) {
  std::vector<Setting> out;
  for (double phi : cfg.phi_list) {
    for (double s : cfg.sigma_eta_sq_list) out.push_back({phi, s, cfg.sigma_eps_sq});
  }
  return out;
}

ModelParams truth(const ExperimentConfig& cfg, const Setting& s) {
  return {cfg.mu, s.sigma_eta_sq, cfg.sigma_eps_sq, s.phi};
}

std::vector<double> dataset(const ExperimentConfig& cfg, const Setting& s, int replicate) {
  return simulate(truth(cfg, s), static_cast<std::size_t>(cfg.n), cfg.seed + static_cast<std::uint64_t>(replicate));
}

std::vector<ResultRow> run_table1(const ExperimentConfig& cfg) {
  const FitOptions opts = fit_options(cfg);
  return run_table(cfg, {"centered", "noncentered", "partial"},
                   [&](const std::vector<double>& y, const ModelParams& th, const std::string& name) {
                     const double mu0 = std::isnan(cfg.init_mu) ? sample_mean(y) : cfg.init_mu;
                     return algorithm1(y, mu0, th, parse_mean_scheme(name), opts);
                   });
}

std::vector<ResultRow> run_table2(const ExperimentConfig& cfg) {
  const FitOptions opts = fit_options(cfg);
  return run_table(cfg, {"centered", "noncentered", "partial", "approx"},
                   [&](const std::vector<double>& y, const ModelParams& th, const std::string& name) {
                     return algorithm2(y, default_init(y).sigma_eta_sq, th, parse_scale_scheme(name), opts);
                   });
}

Algorithm3Schemes table3_schemes(const std::string& name) {
  if (name == "noncentered") {
    return {MeanScheme::noncentered, Cycle2Scheme::noncentered, ScaleSchemeKind::noncentered};
  }
  if (name == "centered") return {MeanScheme::centered, Cycle2Scheme::centered, ScaleSchemeKind::centered};
  if (name == "partial") return {MeanScheme::partial, Cycle2Scheme::noncentered, ScaleSchemeKind::partial};
  if (name == "approx") return {MeanScheme::partial, Cycle2Scheme::noncentered, ScaleSchemeKind::approx};
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::vector<ResultRow> run_table3(const ExperimentConfig& cfg) {
  const FitOptions opts = fit_options(cfg);
  return run_table(cfg, {"noncentered", "centered", "partial", "approx"},
                   [&](const std::vector<double>& y, const ModelParams&, const std::string& name) {
                     return algorithm3(y, default_init(y), table3_schemes(name), opts);
                   });
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  struct Acc {
    SummaryRow row;
    std::vector<double> it, mu, se, ep, ph, ll;
  };
  std::vector<Acc> groups;
  std::map<std::tuple<double, double, std::string>, std::size_t> index;
  for (const ResultRow& r : rows) {
    const auto key = std::make_tuple(r.phi, r.gamma, r.scheme);
    auto [pos, inserted] = index.emplace(key, groups.size());
    if (inserted) {
      groups.push_back({});
      groups.back().row.phi = r.phi;
      groups.back().row.gamma = r.gamma;
      groups.back().row.scheme = r.scheme;
    }
    Acc& a = groups[pos->second];
    ++a.row.replicates;
    if (!r.error.empty()) {
      ++a.row.failures;
      continue;
    }
    if (!r.converged) ++a.row.not_converged;
    a.it.push_back(r.iterations);
    a.mu.push_back(r.estimate.mu);
    a.se.push_back(r.estimate.sigma_eta_sq);
    a.ep.push_back(r.estimate.sigma_eps_sq);
    a.ph.push_back(r.estimate.phi);
    a.ll.push_back(r.loglik);
  }
  auto mean = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto stderr_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  };
  std::vector<SummaryRow> out;
  for (Acc& a : groups) {
    a.row.mean_iterations = mean(a.it);
    a.row.mean = {mean(a.mu), mean(a.se), mean(a.ep), mean(a.ph)};
    a.row.se = {stderr_of(a.mu), stderr_of(a.se), stderr_of(a.ep), stderr_of(a.ph)};
    a.row.mean_loglik = mean(a.ll);
    out.push_back(a.row);
  }
  return out;
}

void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "phi,gamma,scheme,replicate,iterations,converged,mu,sigma_eta_sq,sigma_eps_sq,phi_hat,loglik,"
         "min_step,warnings,error\n";
  for (const ResultRow& r : rows) {
    out << format_double(r.phi) << ',' << format_double(r.gamma) << ',' << r.scheme << ',' << r.replicate << ','
        << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << format_double(r.estimate.mu) << ','
        << format_double(r.estimate.sigma_eta_sq) << ',' << format_double(r.estimate.sigma_eps_sq) << ','
        << format_double(r.estimate.phi) << ',' << format_double(r.loglik) << ',' << format_double(r.min_step)
        << ',' << r.warnings << ',' << csv_field(r.error) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "phi,gamma,scheme,replicates,failures,not_converged,mean_iterations,mu,sigma_eta_sq,sigma_eps_sq,"
         "phi_hat,se_mu,se_sigma_eta_sq,se_sigma_eps_sq,se_phi_hat,mean_loglik\n";
  for (const SummaryRow& r : rows) {
    out << format_double(r.phi) << ',' << format_double(r.gamma) << ',' << r.scheme << ',' << r.replicates << ','
        << r.failures << ',' << r.not_converged << ',' << format_double(r.mean_iterations) << ','
        << format_double(r.mean.mu) << ',' << format_double(r.mean.sigma_eta_sq) << ','
        << format_double(r.mean.sigma_eps_sq) << ',' << format_double(r.mean.phi) << ','
        << format_double(r.se.mu) << ',' << format_double(r.se.sigma_eta_sq) << ','
        << format_double(r.se.sigma_eps_sq) << ',' << format_double(r.se.phi) << ','
        << format_double(r.mean_loglik) << '\n';
  }
}

void print_summary_text(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& title) {
  std::vector<std::pair<double, double>> cols;
  std::vector<std::string> schemes;
  for (const SummaryRow& r : rows) {
    const std::pair<double, double> c{r.phi, r.gamma};
    if (std::find(cols.begin(), cols.end(), c) == cols.end()) cols.push_back(c);
    if (std::find(schemes.begin(), schemes.end(), r.scheme) == schemes.end()) schemes.push_back(r.scheme);
  }
  auto find = [&](const std::string& s, const std::pair<double, double>& c) -> const SummaryRow* {
    for (const SummaryRow& r : rows) {
      if (r.scheme == s && r.phi == c.first && r.gamma == c.second) return &r;
    }
    return nullptr;
  };
  constexpr int kLabel = 16, kCol = 10;
  out << title << '\n';
  out << std::left << std::setw(kLabel) << "phi" << std::right;
  for (const auto& c : cols) out << std::setw(kCol) << c.first;
  out << '\n' << std::left << std::setw(kLabel) << "gamma" << std::right;
  for (const auto& c : cols) out << std::setw(kCol) << c.second;
  out << '\n';
  const std::pair<const char*, double ModelParams::*> fields[] = {{"mu", &ModelParams::mu},
                                                                  {"sigma_eta_sq", &ModelParams::sigma_eta_sq},
                                                                  {"sigma_eps_sq", &ModelParams::sigma_eps_sq},
                                                                  {"phi", &ModelParams::phi}};
  out << std::fixed;
  for (const std::string& s : schemes) {
    out << std::left << std::setw(kLabel) << (s + " iter") << std::right;
    for (const auto& c : cols) {
      const SummaryRow* r = find(s, c);
      out << std::setw(kCol) << std::setprecision(1) << (r ? r->mean_iterations : NAN);
    }
    out << '\n';
    for (const auto& [name, field] : fields) {
      out << std::left << std::setw(kLabel) << ("  " + std::string(name)) << std::right;
      for (const auto& c : cols) {
        const SummaryRow* r = find(s, c);
        out << std::setw(kCol) << std::setprecision(3) << (r ? r->mean.*field : NAN);
      }
      out << '\n';
    }
  }
  out << std::defaultfloat;
}

std::vector<WoptRow> wopt_curve(int n, const std::vector<double>& phis, const std::vector<double>& gammas) {
  std::vector<WoptRow> rows;
  for (double g : gammas) {
    for (double phi : phis) {
      const ModelParams p{0.0, g, 1.0, phi};
      const LocationScheme ls = location_scheme(p, static_cast<std::size_t>(n));
      for (int t = 0; t < n; ++t) {
        rows.push_back({phi, g, t + 1, ls.w_opt[static_cast<std::size_t>(t)], ls.bounds_low, ls.bounds_high});
      }
    }
  }
  return rows;
}

void write_wopt_csv(std::ostream& out, const std::vector<WoptRow>& rows) {
  out << "phi,gamma,t,w_opt,bound_low,bound_high\n";
  for (const WoptRow& r : rows) {
    out << format_double(r.phi) << ',' << format_double(r.gamma) << ',' << r.t << ',' << format_double(r.w) << ','
        << format_double(r.low) << ',' << format_double(r.high) << '\n';
  }
}

std::vector<AoptRow> aopt_curve(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Cell {
    double sigma_eta_sq;
    int n;
    double phi;
  };
  std::vector<Cell> cells;
  for (double s : cfg.sigma_eta_sq_list) {
    for (int n : cfg.n_list) {
      for (double phi : cfg.phi_list) cells.push_back({s, n, phi});
    }
  }
  std::vector<AoptRow> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), cfg.threads, [&](int k) {
    const Cell& c = cells[static_cast<std::size_t>(k)];
    const ModelParams th{cfg.mu, c.sigma_eta_sq, cfg.sigma_eps_sq, c.phi};
    double sum = 0.0, sum2 = 0.0;
    int used = 0, nonpos = 0, failures = 0;
    for (int rep = 0; rep < cfg.replicates; ++rep) {
      const std::vector<double> y =
          simulate(th, static_cast<std::size_t>(c.n), cfg.seed + static_cast<std::uint64_t>(rep));
      double a = 0.0;
      try {
        a = scale_opt(y, th).a_opt;
      } catch (const DegenerateScaleError&) {
        a = 0.0;
        ++failures;
      }
      if (a <= 0.0) ++nonpos;
      sum += a;
      sum2 += a * a;
      ++used;
    }
    const double m = sum / used;
    const double var = used > 1 ? (sum2 - used * m * m) / (used - 1) : 0.0;
    rows[static_cast<std::size_t>(k)] = {c.phi,
                                         c.sigma_eta_sq,
                                         th.gamma(),
                                         c.n,
                                         used,
                                         m,
                                         std::sqrt(std::max(var, 0.0)),
                                         a_hat_asymptotic(th.gamma(), c.phi),
                                         nonpos,
                                         failures};
  });
  return rows;
}

void write_aopt_csv(std::ostream& out, const std::vector<AoptRow>& rows) {
  out << "phi,sigma_eta_sq,gamma,n,replicates,mean_a_opt,sd_a_opt,a_hat,nonpositive,degenerate\n";
  for (const AoptRow& r : rows) {
    out << format_double(r.phi) << ',' << format_double(r.sigma_eta_sq) << ',' << format_double(r.gamma) << ','
        << r.n << ',' << r.replicates << ',' << format_double(r.mean_a_opt) << ',' << format_double(r.sd_a_opt)
        << ',' << format_double(r.a_hat) << ',' << r.nonpositive << ',' << r.failures << '\n';
  }
}

double vb_measured_rate(const std::vector<double>& y, const ModelParams& params, const Parametrization& par) {
  VbState s = vb_init(y, params, par);
  s.m_mu += 1.0;
  const double m0 = s.m_mu;
  s = vb_iterate(y, params, par, s);
  const double m1 = s.m_mu;
  s = vb_iterate(y, params, par, s);
  const double m2 = s.m_mu;
  return (m2 - m1) / (m1 - m0);
}

std::vector<RateRow> rates(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<Setting> grid = settings(cfg);
  const char* kinds[] = {"0", "1", "opt"};
  std::vector<RateRow> rows(grid.size() * 3);
  parallel_for(static_cast<int>(rows.size()), cfg.threads, [&](int k) {
    const Setting& s = grid[static_cast<std::size_t>(k / 3)];
    const int kind = k % 3;
    const ModelParams th = truth(cfg, s);
    const std::vector<double> y = dataset(cfg, s, 0);
    const std::size_t n = y.size();
    std::vector<double> w = kind == 0   ? std::vector<double>(n, 0.0)
                            : kind == 1 ? std::vector<double>(n, 1.0)
                                        : w_opt_location(th, n);
    const Parametrization par{0.0, w};
    const double mu0 = sample_mean(y);
    RateRow r;
    r.phi = s.phi;
    r.gamma = s.gamma();
    r.w_kind = kinds[kind];
    r.formula = rate_location(th, w);
    r.em_fd = mu_map_derivative(y, th, w, mu0, 1e-5 * (1.0 + std::abs(mu0)));
    r.vb = vb_rate(th, par);
    r.vb_measured = vb_measured_rate(y, th, par);
    const Chain c = run_chain(y, th, par, cfg.gibbs_draws, cfg.gibbs_burnin,
                              cfg.seed + 1000003ULL * static_cast<std::uint64_t>(k + 1));
    r.gibbs = lag1_autocorr(c);
    rows[static_cast<std::size_t>(k)] = r;
  });
  return rows;
}

void write_rates_csv(std::ostream& out, const std::vector<RateRow>& rows) {
  out << "phi,gamma,w,rate_formula,rate_em_fd,rate_vb,rate_vb_measured,gibbs_lag1\n";
  for (const RateRow& r : rows) {
    out << format_double(r.phi) << ',' << format_double(r.gamma) << ',' << r.w_kind << ','
        << format_double(r.formula) << ',' << format_double(r.em_fd) << ',' << format_double(r.vb) << ','
        << format_double(r.vb_measured) << ',' << format_double(r.gibbs) << '\n';
  }
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace pncp::exp
