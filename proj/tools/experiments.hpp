#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "pncp/em.hpp"
#include "pncp/params.hpp"

namespace pncp::exp {

struct ExperimentConfig {
  int n = 2000;
  int replicates = 20;
  double mu = 1.0;
  double sigma_eps_sq = 0.1;
  std::vector<double> sigma_eta_sq_list{0.01, 0.1, 1.0};
  std::vector<double> phi_list{-0.95, 0.1, 0.95};
  std::vector<std::string> schemes;  // empty: every scheme of the command
  std::uint64_t seed = 20240601;
  double tol = 1e-8;
  int max_iter = 10000;
  int threads = 0;  // 0: hardware concurrency
  // Algorithm 1 start; NaN means the sample mean.
  double init_mu = 0.0;

  // figure commands
  std::vector<int> n_list{50, 500, 5000};
  std::vector<double> gamma_list{0.1, 1.0, 10.0};
  int gibbs_draws = 20000;
  int gibbs_burnin = 1000;

  // Throws std::invalid_argument on empty lists or non-positive sizes.
  void validate() const;
};

// Applies `key = value` lines ('#' starts a comment) and returns the keys
// seen. Lists are comma-separated. Throws std::invalid_argument on unknown
// keys or bad values.
std::vector<std::string> apply_config_text(ExperimentConfig& cfg, std::istream& in);
std::vector<std::string> apply_config_file(ExperimentConfig& cfg, const std::string& path);

struct Setting {
  double phi = 0.0;
  double sigma_eta_sq = 0.0;
  double sigma_eps_sq = 1.0;
  double gamma() const { return sigma_eta_sq / sigma_eps_sq; }
};

std::vector<Setting> settings(const ExperimentConfig& cfg);
ModelParams truth(const ExperimentConfig& cfg, const Setting& s);

// Replicate r of every setting uses seed + r, so settings share their
// underlying normal draws.
std::vector<double> dataset(const ExperimentConfig& cfg, const Setting& s, int replicate);

struct ResultRow {
  double phi = 0.0;
  double gamma = 0.0;
  std::string scheme;
  int replicate = 0;
  int iterations = 0;
  bool converged = false;
  ModelParams estimate;
  double loglik = 0.0;
  // Smallest per-cycle log-likelihood change; negative means ascent failed.
  double min_step = 0.0;
  int warnings = 0;
  std::string error;
};

// Algorithm 1: centered, noncentered, partial. mu starts at cfg.init_mu.
std::vector<ResultRow> run_table1(const ExperimentConfig& cfg);
// Algorithm 2: centered, noncentered, partial, approx. sigma_eta^2 starts at
// half the sample variance.
std::vector<ResultRow> run_table2(const ExperimentConfig& cfg);
// Algorithm 3: noncentered, centered, partial, approx, from default_init.
std::vector<ResultRow> run_table3(const ExperimentConfig& cfg);

Algorithm3Schemes table3_schemes(const std::string& name);

struct SummaryRow {
  double phi = 0.0;
  double gamma = 0.0;
  std::string scheme;
  int replicates = 0;
  int failures = 0;
  int not_converged = 0;
  double mean_iterations = 0.0;
  ModelParams mean;
  ModelParams se;  // Monte-Carlo standard errors of the means
  double mean_loglik = 0.0;
};

// Groups by (phi, gamma, scheme) in first-appearance order; failed rows are
// counted but excluded from the means.
std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows);

void write_rows_csv(std::ostream& out, const std::vector<ResultRow>& rows);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
// Settings as columns, one block per scheme: mean iterations then estimates.
void print_summary_text(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& title);

struct WoptRow {
  double phi, gamma;
  int t;  // 1-based
  double w, low, high;
};
std::vector<WoptRow> wopt_curve(int n, const std::vector<double>& phis, const std::vector<double>& gammas);
void write_wopt_csv(std::ostream& out, const std::vector<WoptRow>& rows);

struct AoptRow {
  double phi, sigma_eta_sq, gamma;
  int n, replicates;
  double mean_a_opt, sd_a_opt, a_hat;
  int nonpositive;
  int failures;
};
// mu and sigma_eps^2 from cfg; one row per (sigma_eta^2, n, phi).
std::vector<AoptRow> aopt_curve(const ExperimentConfig& cfg);
void write_aopt_csv(std::ostream& out, const std::vector<AoptRow>& rows);

struct RateRow {
  double phi, gamma;
  std::string w_kind;  // "0", "1", "opt"
  double formula, em_fd, vb, vb_measured, gibbs;
};
// Series of length cfg.n simulated per setting; Gibbs uses cfg.gibbs_draws.
std::vector<RateRow> rates(const ExperimentConfig& cfg);
void write_rates_csv(std::ostream& out, const std::vector<RateRow>& rows);

// Contraction factor of the VB m_mu recursion: ratio of the second to the
// first m_mu increment, starting one unit above the sample mean.
double vb_measured_rate(const std::vector<double>& y, const ModelParams& params, const Parametrization& par);

// Runs fn(0..count-1) on a worker pool; exceptions are rethrown after all
// workers stop.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

}  // namespace pncp::exp
