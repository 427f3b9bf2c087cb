#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "nrc/config.hpp"
#include "nrc/errors.hpp"
#include "nrc/harness.hpp"
#include "nrc/newton_consensus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Options {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  std::optional<double> epsilon;
  std::string scheme;
  std::string algo;
  std::optional<int> probe;
  std::string param;
  std::string grid;
  int jobs = 1;
  std::string out_dir = "out";
  std::vector<std::string> set;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "Config file (TOML-style, or a metadata.json from an earlier run)");
  cmd->add_option("--preset", o.preset, "Named protocol preset")
      ->check(CLI::IsMember(nrc::preset_names()));
  cmd->add_option("--seed", o.seed, "Sets graph, cost, partition and init seeds");
  cmd->add_option("--rounds", o.rounds, "Number of synchronous rounds");
  cmd->add_option("--epsilon", o.epsilon, "NRC/FNRC step epsilon");
  cmd->add_option("--scheme", o.scheme, "Hessian surrogate")->check(CLI::IsMember({"nrc", "jc", "gdc"}));
  cmd->add_option("--algo", o.algo, "Algorithm")->check(CLI::IsMember({"nrc", "fnrc", "dsm", "dcm", "admm"}));
  cmd->add_option("--probe", o.probe, "Probe round of a sweep");
  cmd->add_option("--param", o.param, "Sweep parameter (epsilon, step_scale, mu, delta, phi)");
  cmd->add_option("--grid", o.grid, "Sweep grid: log:lo:hi:n, lin:lo:hi:n or a comma list");
  cmd->add_option("--jobs", o.jobs, "Worker threads for sweeps and Monte Carlo runs")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--set", o.set, "Override any config key: section.key=value");
  cmd->add_flag("--quiet", o.quiet, "Do not print the resolved config");
}

nrc::KeyMap resolve_keys(const Options& o) {
  if (o.config_path.empty() && o.preset.empty()) {
    throw nrc::ConfigError("no configuration given; pass --config FILE or --preset NAME");
  }
  nrc::KeyMap keys;
  if (!o.preset.empty()) keys = nrc::preset(o.preset);
  if (!o.config_path.empty()) {
    for (const auto& [k, v] : nrc::read_config_file(o.config_path)) keys[k] = v;
  }
  if (o.seed) {
    const std::string s = std::to_string(*o.seed);
    for (const char* k : {"graph.seed", "costs.seed", "costs.partition_seed", "init.seed"}) keys[k] = s;
  }
  if (o.rounds) keys["run.rounds"] = std::to_string(*o.rounds);
  if (o.epsilon) {
    std::ostringstream ss;
    ss.precision(17);
    ss << *o.epsilon;
    keys["algorithm.epsilon"] = ss.str();
  }
  if (!o.scheme.empty()) keys["algorithm.scheme"] = o.scheme;
  if (!o.algo.empty()) keys["algorithm.name"] = o.algo;
  if (o.probe) keys["sweep.probe"] = std::to_string(*o.probe);
  if (!o.param.empty()) keys["sweep.param"] = o.param;
  if (!o.grid.empty()) keys["sweep.grid"] = o.grid;
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw nrc::ConfigError("--set expects section.key=value, got '" + kv + "'");
    keys[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return keys;
}

std::vector<double> to_vector(const nrc::Vec& v) { return {v.data(), v.data() + v.size()}; }

json metadata(const std::string& command, const nrc::ExperimentConfig& config, const nrc::Problem& problem) {
  json meta;
  meta["command"] = command;
  meta["config"] = nrc::config_to_keys(config);
  meta["seeds"] = {{"graph", config.graph.seed},
                   {"costs", config.costs.seed},
                   {"partition", config.costs.partition_seed},
                   {"init", config.init.seed}};
  meta["oracle"] = {{"x_star", to_vector(problem.x_star)},
                    {"iterations", problem.oracle_iterations},
                    {"certificate", problem.oracle_certificate}};
  meta["problem"] = {{"agents", problem.agents()},
                     {"dim", problem.dim()},
                     {"edges", problem.graph.edges().size()},
                     {"max_degree", problem.graph.max_degree()},
                     {"rho", problem.P.rho()},
                     {"sigma", problem.P.sigma()},
                     {"dataset_rows", problem.examples}};
  return meta;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw nrc::ConfigError("cannot write " + path.string());
  return os;
}

void write_json(const fs::path& path, const json& doc) { open_out(path) << doc.dump(2) << '\n'; }

void print_problem(const nrc::Problem& p) {
  std::cout << "agents " << p.agents() << ", dim " << p.dim() << ", edges " << p.graph.edges().size() << ", rho(P) "
            << p.P.rho() << ", sigma(P) " << p.P.sigma() << '\n';
}

int cmd_run(const nrc::ExperimentConfig& config, const nrc::Problem& problem, const fs::path& out) {
  const nrc::RunResult result =
      nrc::run(problem, config.algorithm, config.init, config.rounds, nrc::RunOptions{config.record_every, false});
  {
    auto os = open_out(out / "summary.csv");
    nrc::write_summary_csv(os, result.trace);
  }
  if (config.record_every > 0) {
    auto os = open_out(out / "trace.csv");
    nrc::write_agent_trace_csv(os, result.trace);
  }
  json meta = metadata("run", config, problem);
  meta["result"] = {{"rounds_completed", result.trace.size()}, {"max_spread", result.max_spread}};
  if (result.error) meta["result"]["error"] = *result.error;
  write_json(out / "metadata.json", meta);

  print_problem(problem);
  if (!result.trace.empty()) {
    std::cout << "final relative MSE " << result.trace.back().relative_mse << " at k = " << result.trace.back().k
              << '\n';
  }
  std::cout << "max cross-agent spread " << result.max_spread << '\n';
  if (result.error) {
    std::cerr << "run stopped early: " << *result.error << '\n';
    return kRuntimeError;
  }
  return kOk;
}

int cmd_sweep(const nrc::ExperimentConfig& config, const nrc::Problem& problem, const fs::path& out, int jobs) {
  const nrc::SweepParam param = nrc::parse_sweep_param(config.sweep.param);
  const auto grid = nrc::admissible_grid(problem, param, nrc::parse_grid(config.sweep.grid));
  const auto rows = nrc::sweep(problem, config.algorithm, config.init, param, grid, config.sweep.probe, jobs);
  {
    auto os = open_out(out / "sweep.csv");
    nrc::write_sweep_csv(os, param, rows);
  }
  write_json(out / "metadata.json", metadata("sweep", config, problem));

  print_problem(problem);
  const auto best = nrc::best_row(rows);
  if (best) {
    std::cout << "best " << nrc::to_string(param) << " = " << best->value << " (relative MSE " << best->mse_at_probe
              << " at k = " << config.sweep.probe << ")\n";
  } else {
    std::cout << "no stable grid point\n";
  }
  return kOk;
}

int cmd_oracle(const nrc::ExperimentConfig& config, const nrc::Problem& problem, const fs::path& out) {
  json doc = metadata("oracle", config, problem);
  std::cout.precision(17);
  std::cout << "x* =";
  for (Eigen::Index i = 0; i < problem.x_star.size(); ++i) std::cout << ' ' << problem.x_star(i);
  std::cout << "\niterations " << problem.oracle_iterations << '\n';

  int code = kOk;
  if (config.costs.kind == nrc::CostKind::Quadratic) {
    nrc::Mat A = nrc::Mat::Zero(problem.dim(), problem.dim());
    nrc::Vec b = nrc::Vec::Zero(problem.dim());
    for (const auto& f : problem.costs) {
      const auto& q = dynamic_cast<const nrc::QuadraticCost&>(*f);
      A += q.A();
      b += q.A() * q.d();
    }
    const nrc::Vec closed = A.ldlt().solve(b);
    const double gap = (closed - problem.x_star).cwiseAbs().maxCoeff();
    const bool agrees = gap <= 1e-10;
    std::cout << "closed form (sum A_i)^-1 sum A_i d_i differs by " << gap << (agrees ? " (ok)" : " (FAIL)") << '\n';
    doc["closed_form"] = {{"x", to_vector(closed)}, {"max_abs_difference", gap}, {"agrees", agrees}};
    if (!agrees) code = kRuntimeError;
  }
  write_json(out / "oracle.json", doc);
  write_json(out / "metadata.json", metadata("oracle", config, problem));
  return code;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

int cmd_montecarlo(const nrc::ExperimentConfig& config, const nrc::Problem& problem, const fs::path& out, int jobs) {
  const auto samples =
      nrc::monte_carlo_perturbation(problem, config.algorithm, config.init, config.montecarlo.sigmas,
                                    config.montecarlo.runs, config.montecarlo.max_rounds, jobs);
  const int N = problem.agents();
  const int n = problem.dim();
  {
    auto os = open_out(out / "montecarlo.csv");
    os.precision(17);
    os << "sigma,run,agent,coord,error\n";
    for (const auto& s : samples) {
      for (int r = 0; r < config.montecarlo.runs; ++r)
        for (int i = 0; i < N; ++i)
          for (int c = 0; c < n; ++c)
            os << s.sigma << ',' << r << ',' << i << ',' << c << ','
               << s.errors[static_cast<std::size_t>(r * N * n + i * n + c)] << '\n';
    }
  }
  {
    auto os = open_out(out / "montecarlo_summary.csv");
    os.precision(17);
    os << "sigma,q25_abs_error,median_abs_error,q75_abs_error,max_abs_error,unconverged\n";
    std::cout << "sigma  median|x_i - x*|  max|x_i - x*|  unconverged\n";
    for (const auto& s : samples) {
      std::vector<double> abs_err;
      abs_err.reserve(s.errors.size());
      for (double e : s.errors) abs_err.push_back(std::abs(e));
      const double med = quantile(abs_err, 0.5);
      const double mx = *std::max_element(abs_err.begin(), abs_err.end());
      os << s.sigma << ',' << quantile(abs_err, 0.25) << ',' << med << ',' << quantile(abs_err, 0.75) << ',' << mx
         << ',' << s.unconverged << '\n';
      std::cout << s.sigma << "  " << med << "  " << mx << "  " << s.unconverged << '\n';
    }
  }
  write_json(out / "metadata.json", metadata("montecarlo", config, problem));
  return kOk;
}

int cmd_compare(const nrc::ExperimentConfig& config, const nrc::Problem& problem, const fs::path& out, int jobs) {
  nrc::ComparisonOptions opts;
  opts.algorithms.clear();
  for (const auto& a : config.compare.algorithms) opts.algorithms.push_back(nrc::parse_algorithm(a));
  opts.grid = config.sweep.grid;
  opts.probe = config.sweep.probe;
  opts.rounds = config.rounds;
  opts.threshold = config.compare.threshold;
  opts.jobs = jobs;
  const auto entries = nrc::compare_algorithms(problem, config.algorithm, opts);

  auto csv = open_out(out / "compare.csv");
  auto traces = open_out(out / "compare_traces.csv");
  auto sweeps = open_out(out / "compare_sweeps.csv");
  for (auto* os : {&csv, &traces, &sweeps}) os->precision(17);
  csv << "algorithm,param,best_value,mse_at_probe,rounds_to_threshold,final_mse\n";
  traces << "algorithm,k,relative_mse\n";
  sweeps << "algorithm,param,value,mse_at_probe,status\n";
  print_problem(problem);
  for (const auto& e : entries) {
    const std::string name(nrc::to_string(e.algorithm));
    const std::string reach = e.rounds_to_threshold ? std::to_string(*e.rounds_to_threshold) : "inf";
    if (e.best) {
      csv << name << ',' << nrc::to_string(e.param) << ',' << e.best->value << ',' << e.best->mse_at_probe << ','
          << reach << ',' << e.final_mse << '\n';
    } else {
      csv << name << ',' << nrc::to_string(e.param) << ",nan,nan,inf,nan\n";
    }
    for (const auto& rec : e.trace) traces << name << ',' << rec.k << ',' << rec.relative_mse << '\n';
    for (const auto& r : e.sweep)
      sweeps << name << ',' << nrc::to_string(e.param) << ',' << r.value << ',' << r.mse_at_probe << ',' << r.status
             << '\n';
    std::cout << name << ": best " << nrc::to_string(e.param) << " = " << (e.best ? e.best->value : std::nan(""))
              << ", rounds to relative MSE " << opts.threshold << ": " << reach << '\n';
  }
  write_json(out / "metadata.json", metadata("compare", config, problem));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Newton-Raphson consensus simulator"};
  app.require_subcommand(1);
  Options o;
  CLI::App* run = app.add_subcommand("run", "Run one experiment and write summary.csv");
  CLI::App* sweep = app.add_subcommand("sweep", "Sweep one parameter and write sweep.csv");
  CLI::App* oracle = app.add_subcommand("oracle", "Solve the centralized problem and write oracle.json");
  CLI::App* mc = app.add_subcommand("montecarlo", "Perturbed-initialization study, writes montecarlo.csv");
  CLI::App* compare = app.add_subcommand("compare", "Tune and compare all algorithms, writes compare.csv");
  for (auto* cmd : {run, sweep, oracle, mc, compare}) add_common(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  nrc::ExperimentConfig config;
  try {
    config = nrc::config_from_keys(resolve_keys(o));
  } catch (const nrc::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    if (o.config_path.empty() && o.preset.empty()) std::cerr << app.help();
    return kConfigError;
  }
  if (!o.quiet) std::cerr << "# resolved config\n" << nrc::format_config(nrc::config_to_keys(config));

  try {
    const nrc::Problem problem = nrc::build_problem(config);
    const fs::path out(o.out_dir);
    fs::create_directories(out);
    if (run->parsed()) return cmd_run(config, problem, out);
    if (sweep->parsed()) return cmd_sweep(config, problem, out, o.jobs);
    if (oracle->parsed()) return cmd_oracle(config, problem, out);
    if (mc->parsed()) return cmd_montecarlo(config, problem, out, o.jobs);
    return cmd_compare(config, problem, out, o.jobs);
  } catch (const nrc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nrc::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nrc::InvalidArgument& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
