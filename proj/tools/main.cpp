#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "experiments.hpp"
#include "pncp/io.hpp"
#include "pncp/model.hpp"

namespace fs = std::filesystem;
using namespace pncp;
using namespace pncp::exp;

namespace {

constexpr int kConfigError = 1;
constexpr int kNumericalError = 2;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  int n = 0;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::string out = "out";
  std::string config;
  std::vector<std::string> schemes;
  std::vector<double> phi, sigma_eta_sq, gamma;
  std::vector<int> n_list;
  int threads = 0;
  int gibbs_draws = 0;
  bool full_scale = false;
  bool strict = false;
};

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> v;
  const int k = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= k; ++i) v.push_back(std::round((lo + i * step) * 1e10) / 1e10);
  return v;
}

// -0.99, -0.9, ..., 0.9, 0.99
std::vector<double> aopt_phi_grid() {
  std::vector<double> v{-0.99};
  for (double p : grid(-0.9, 0.9, 0.1)) v.push_back(p);
  v.push_back(0.99);
  return v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

fs::path out_dir(const Flags& fl) {
  const fs::path dir(fl.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

std::string tag(double v) {
  std::string s = format_double(v);
  std::replace(s.begin(), s.end(), '-', 'm');
  return s;
}

int strict_status(const Flags& fl, const std::vector<ResultRow>& rows) {
  const auto failed = std::count_if(rows.begin(), rows.end(), [](const ResultRow& r) { return !r.error.empty(); });
  if (failed > 0) std::cerr << failed << " fit(s) failed; see the error column\n";
  return fl.strict && failed > 0 ? kNumericalError : 0;
}

int run_table(const std::string& name, const Flags& fl, const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  std::string title;
  if (name == "table1") {
    rows = run_table1(cfg);
    title = "Algorithm 1 (mu unknown): mean iterations and estimates";
  } else if (name == "table2") {
    rows = run_table2(cfg);
    title = "Algorithm 2 (sigma_eta^2 unknown): mean iterations and estimates";
  } else {
    rows = run_table3(cfg);
    title = "Algorithm 3 (all unknown): mean iterations and estimates";
  }
  const std::vector<SummaryRow> summary = summarize(rows);
  const fs::path dir = out_dir(fl);
  {
    std::ofstream f = open_out(dir / (name + "_rows.csv"));
    write_rows_csv(f, rows);
  }
  {
    std::ofstream f = open_out(dir / (name + "_summary.csv"));
    write_summary_csv(f, summary);
  }
  std::ostringstream text;
  print_summary_text(text, summary, title + " (n=" + std::to_string(cfg.n) + ", " +
                                        std::to_string(cfg.replicates) + " replicates)");
  std::cout << text.str();
  {
    std::ofstream f = open_out(dir / (name + "_summary.txt"));
    f << text.str();
  }
  return strict_status(fl, rows);
}

int run_simulate(const Flags& fl, const ExperimentConfig& cfg) {
  cfg.validate();
  const fs::path dir = out_dir(fl);
  int files = 0;
  for (const Setting& s : settings(cfg)) {
    for (int r = 0; r < cfg.replicates; ++r) {
      const fs::path p = dir / ("y_phi" + tag(s.phi) + "_seta" + tag(s.sigma_eta_sq) + "_rep" + std::to_string(r) +
                                ".csv");
      std::ofstream f = open_out(p);
      write_column_csv(f, dataset(cfg, s, r), "y");
      if (!f) throw std::runtime_error("write failed: " + p.string());
      ++files;
    }
  }
  std::cout << "wrote " << files << " series to " << dir.string() << '\n';
  return 0;
}

int run_wopt(const Flags& fl, const ExperimentConfig& cfg, const std::vector<double>& phis) {
  cfg.validate();
  const std::vector<WoptRow> rows = wopt_curve(cfg.n, phis, cfg.gamma_list);
  std::ofstream f = open_out(out_dir(fl) / "wopt_curve.csv");
  write_wopt_csv(f, rows);
  const auto above = std::count_if(rows.begin(), rows.end(), [](const WoptRow& r) { return r.w > 1.0; });
  std::cout << "wopt-curve: " << rows.size() << " rows (n=" << cfg.n << "), " << above << " entries above 1\n";
  return 0;
}

int run_aopt(const Flags& fl, const ExperimentConfig& cfg) {
  const std::vector<AoptRow> rows = aopt_curve(cfg);
  std::ofstream f = open_out(out_dir(fl) / "aopt_curve.csv");
  write_aopt_csv(f, rows);
  std::cout << "aopt-curve: mean a_opt against the large-n estimate\n";
  std::cout << "      n  sigma_eta_sq     phi   mean_a_opt       a_hat  nonpositive\n";
  for (const AoptRow& r : rows) {
    std::cout << std::setw(7) << r.n << std::setw(14) << r.sigma_eta_sq << std::setw(8) << r.phi << std::fixed
              << std::setprecision(4) << std::setw(13) << r.mean_a_opt << std::setw(12) << r.a_hat
              << std::defaultfloat << std::setprecision(6) << std::setw(13) << r.nonpositive << '\n';
  }
  return 0;
}

int run_rates(const Flags& fl, const ExperimentConfig& cfg) {
  const std::vector<RateRow> rows = rates(cfg);
  std::ofstream f = open_out(out_dir(fl) / "rates.csv");
  write_rates_csv(f, rows);
  std::cout << "rates (n=" << cfg.n << ", Gibbs N=" << cfg.gibbs_draws << ")\n";
  std::cout << "    phi   gamma    w     formula       em_fd          vb  vb_measured  gibbs_lag1\n";
  for (const RateRow& r : rows) {
    std::cout << std::setw(7) << r.phi << std::setw(8) << r.gamma << std::setw(5) << r.w_kind << std::fixed
              << std::setprecision(6) << std::setw(12) << r.formula << std::setw(12) << r.em_fd << std::setw(12)
              << r.vb << std::setw(13) << r.vb_measured << std::setw(12) << r.gibbs << std::defaultfloat
              << std::setprecision(6) << '\n';
  }
  return 0;
}

void add_common(CLI::App* sub, Flags& fl) {
  sub->add_option("--n", fl.n, "series length");
  sub->add_option("--replicates", fl.replicates, "datasets per setting");
  sub->add_option("--seed", fl.seed, "base seed; replicate r uses seed + r");
  sub->add_option("--out", fl.out, "output directory")->capture_default_str();
  sub->add_option("--config", fl.config, "key = value config file; flags override it");
  sub->add_option("--scheme", fl.schemes, "schemes to run (comma-separated)")->delimiter(',');
  sub->add_option("--phi", fl.phi, "phi values")->delimiter(',');
  sub->add_option("--sigma-eta-sq", fl.sigma_eta_sq, "sigma_eta^2 values")->delimiter(',');
  sub->add_option("--gamma", fl.gamma, "signal-to-noise values (wopt-curve)")->delimiter(',');
  sub->add_option("--n-list", fl.n_list, "series lengths (aopt-curve)")->delimiter(',');
  sub->add_option("--threads", fl.threads, "worker threads (0: all cores)");
  sub->add_option("--gibbs-draws", fl.gibbs_draws, "Gibbs iterations including burn-in (rates)");
  sub->add_flag("--full-scale", fl.full_scale, "use the published experiment sizes");
  sub->add_flag("--strict", fl.strict, "exit with status 2 if any fit fails");
}

ExperimentConfig build_config(const std::string& cmd, const CLI::App& sub, const Flags& fl,
                              std::vector<double>& wopt_phis) {
  ExperimentConfig cfg;
  std::vector<std::string> file_keys;
  const bool figure = cmd == "wopt-curve" || cmd == "rates";
  if (cmd == "aopt-curve") {
    cfg.replicates = 200;
    cfg.phi_list = aopt_phi_grid();
  }
  if (figure) cfg.n = 10;
  wopt_phis = grid(-0.95, 0.95, 0.05);
  if (fl.full_scale) {
    cfg.n = figure ? 10 : 10000;
    cfg.replicates = 1000;
    if (cmd == "aopt-curve") cfg.phi_list = grid(-0.99, 0.99, 0.01);
    if (cmd == "wopt-curve") wopt_phis = grid(-0.99, 0.99, 0.01);
  }
  if (!fl.config.empty()) {
    try {
      file_keys = apply_config_file(cfg, fl.config);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    if (std::find(file_keys.begin(), file_keys.end(), "phi") != file_keys.end()) wopt_phis = cfg.phi_list;
  }
  auto given = [&](const char* name) { return sub.count(name) > 0; };
  if (given("--n")) cfg.n = fl.n;
  if (given("--replicates")) cfg.replicates = fl.replicates;
  if (given("--seed")) cfg.seed = fl.seed;
  if (given("--scheme")) cfg.schemes = fl.schemes;
  if (given("--phi")) cfg.phi_list = wopt_phis = fl.phi;
  if (given("--sigma-eta-sq")) cfg.sigma_eta_sq_list = fl.sigma_eta_sq;
  if (given("--gamma")) cfg.gamma_list = fl.gamma;
  if (given("--n-list")) cfg.n_list = fl.n_list;
  if (given("--threads")) cfg.threads = fl.threads;
  if (given("--gibbs-draws")) cfg.gibbs_draws = fl.gibbs_draws;
  try {
    cfg.validate();
    for (double p : wopt_phis) {
      if (!(std::abs(p) < 1.0)) throw std::invalid_argument("phi values must lie in (-1, 1)");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partially noncentered EM, Gibbs and VB experiments for the AR(1)-plus-noise model"};
  app.require_subcommand(1);
  Flags fl;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "write simulated series, one CSV per setting and replicate"},
      {"table1", "Algorithm 1 (mu) under each location scheme"},
      {"table2", "Algorithm 2 (sigma_eta^2) under each scale scheme"},
      {"table3", "Algorithm 3 (all parameters) under each scheme"},
      {"wopt-curve", "optimal location weights and their bounds against phi"},
      {"aopt-curve", "mean optimal scale power against its large-n estimate"},
      {"rates", "convergence rates: formula, EM map slope, VB and Gibbs lag-1"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, fl);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  for (CLI::App* sub : subs) {
    if (!sub->parsed()) continue;
    const std::string cmd = sub->get_name();
    try {
      std::vector<double> wopt_phis;
      const ExperimentConfig cfg = build_config(cmd, *sub, fl, wopt_phis);
      if (cmd == "simulate") return run_simulate(fl, cfg);
      if (cmd == "table1" || cmd == "table2" || cmd == "table3") return run_table(cmd, fl, cfg);
      if (cmd == "wopt-curve") return run_wopt(fl, cfg, wopt_phis);
      if (cmd == "aopt-curve") return run_aopt(fl, cfg);
      if (cmd == "rates") return run_rates(fl, cfg);
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::invalid_argument& e) {
      std::cerr << "config error: " << e.what() << '\n';
      return kConfigError;
    } catch (const NumericalError& e) {
      std::cerr << "numerical error: " << e.what() << '\n';
      return kNumericalError;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    }
  }
  return 0;
}
