#include "nrc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>
#include <thread>

#include "nrc/baselines.hpp"
#include "nrc/errors.hpp"
#include "nrc/newton_consensus.hpp"
#include "nrc/random.hpp"

#ifndef NRC_DATA_DIR
#define NRC_DATA_DIR "data"
#endif

namespace nrc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Runs f(0..count-1) on up to `jobs` threads. Each index writes only its own slot.
template <class F>
void parallel_for(int count, int jobs, F&& f) {
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (path.empty()) throw ConfigError("costs.data must name a dataset file");
  if (fs::exists(path)) return path;
  const fs::path fallback = fs::path(NRC_DATA_DIR) / fs::path(path).filename();
  if (fs::path(path).is_relative() && fs::exists(fallback)) return fallback.string();
  throw ConfigError("dataset file not found: " + path);
}

// ------------------------------------------------------------ steppers

class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual void step() = 0;
  virtual const Mat& x() const = 0;
  virtual long clamps_last() const { return 0; }
};

InitOptions make_init(const Problem& problem, const InitSpec& init) {
  InitOptions opts;
  const int N = problem.agents();
  const int n = problem.dim();
  Rng rng(init.seed);
  if (init.x0_range > 0.0) {
    Mat x0(N, n);
    for (int i = 0; i < N; ++i)
      for (int c = 0; c < n; ++c) x0(i, c) = rng.uniform(-init.x0_range, init.x0_range);
    opts.x0 = std::move(x0);
  }
  opts.registers_from_x0 = init.registers_from_x0;
  if (init.sigma > 0.0) {
    Mat y_off(N, n);
    Mat z_off(N, n * n);
    for (int i = 0; i < N; ++i) {
      for (int c = 0; c < n; ++c) y_off(i, c) = rng.uniform(-init.sigma, init.sigma);
      Mat s(n, n);
      for (int c = 0; c < n; ++c)
        for (int r = 0; r <= c; ++r) s(r, c) = s(c, r) = rng.uniform(-init.sigma, init.sigma);
      z_off.row(i) = Eigen::Map<const Vec>(s.data(), s.size()).transpose();
    }
    opts.y_offset = std::move(y_off);
    opts.z_offset = std::move(z_off);
  }
  return opts;
}

class NrcStepper final : public Stepper {
 public:
  NrcStepper(const Problem& p, const AlgorithmConfig& cfg, const InitSpec& init)
      : p_(p), params_{cfg.epsilon, cfg.c, cfg.scheme}, state_(nrc_init(p.costs, cfg.scheme, make_init(p, init))) {}
  void step() override { state_ = nrc_step(state_, p_.P, p_.costs, params_); }
  const Mat& x() const override { return state_.x; }
  long clamps_last() const override { return state_.clamps_last_step; }

 private:
  const Problem& p_;
  NrcParams params_;
  NrcState state_;
};

class FnrcStepper final : public Stepper {
 public:
  FnrcStepper(const Problem& p, const AlgorithmConfig& cfg, const InitSpec& init)
      : p_(p),
        params_{cfg.epsilon, cfg.c, cfg.scheme},
        phi_(cfg.phi > 0.0 ? cfg.phi : fnrc_phi(p.P.rho())),
        state_(fnrc_init(p.costs, cfg.scheme, make_init(p, init))) {}
  void step() override { state_ = fnrc_step(state_, p_.P, p_.costs, params_, phi_); }
  const Mat& x() const override { return state_.x; }
  long clamps_last() const override { return state_.clamps_last_step; }

 private:
  const Problem& p_;
  NrcParams params_;
  double phi_;
  FnrcState state_;
};

Mat initial_x(const Problem& p, const InitSpec& init) {
  auto opts = make_init(p, init);
  return opts.x0 ? *opts.x0 : Mat::Zero(p.agents(), p.dim());
}

class DsmStepper final : public Stepper {
 public:
  DsmStepper(const Problem& p, const AlgorithmConfig& cfg, const InitSpec& init)
      : p_(p), scale_(cfg.step_scale), state_(dsm_init(p.agents(), p.dim())) {
    if (!(scale_ > 0.0)) throw InvalidArgument("DSM step scale must be positive");
    state_.x = initial_x(p, init);
  }
  void step() override { state_ = dsm_step(state_, p_.P, p_.costs, scale_); }
  const Mat& x() const override { return state_.x; }

 private:
  const Problem& p_;
  double scale_;
  DsmState state_;
};

class DcmStepper final : public Stepper {
 public:
  DcmStepper(const Problem& p, const AlgorithmConfig& cfg, const InitSpec& init)
      : p_(p), params_{cfg.mu, cfg.nu}, state_(dcm_init(p.agents(), p.dim())) {
    const double bound = dcm_mu_bound(p.graph);
    if (!(params_.mu > 0.0 && params_.mu < bound)) {
      throw InvalidArgument("DCM mu must lie in (0, " + std::to_string(bound) + ")");
    }
    if (!(params_.nu > 0.0)) throw InvalidArgument("DCM nu must be positive");
    state_.x = initial_x(p, init);
  }
  void step() override { state_ = dcm_step(state_, p_.graph, p_.costs, params_); }
  const Mat& x() const override { return state_.x; }

 private:
  const Problem& p_;
  DcmParams params_;
  DcmState state_;
};

class AdmmStepper final : public Stepper {
 public:
  AdmmStepper(const Problem& p, const AlgorithmConfig& cfg, const InitSpec& init)
      : p_(p), delta_(cfg.delta), state_(admm_init(p.graph, p.dim())) {
    if (!(delta_ > 0.0 && delta_ < 1.0)) throw InvalidArgument("ADMM delta must lie in (0, 1)");
    state_.x = initial_x(p, init);
  }
  void step() override { state_ = admm_step(state_, p_.graph, p_.costs, delta_); }
  const Mat& x() const override { return state_.x; }

 private:
  const Problem& p_;
  double delta_;
  AdmmState state_;
};

std::unique_ptr<Stepper> make_stepper(const Problem& p, const AlgorithmConfig& cfg, const InitSpec& init) {
  switch (cfg.algorithm) {
    case Algorithm::Nrc:
      return std::make_unique<NrcStepper>(p, cfg, init);
    case Algorithm::Fnrc:
      return std::make_unique<FnrcStepper>(p, cfg, init);
    case Algorithm::Dsm:
      return std::make_unique<DsmStepper>(p, cfg, init);
    case Algorithm::Dcm:
      return std::make_unique<DcmStepper>(p, cfg, init);
    case Algorithm::Admm:
      return std::make_unique<AdmmStepper>(p, cfg, init);
  }
  throw InvalidArgument("unknown algorithm");
}

double mse_against(const Mat& x, const Vec& x_star) {
  return x_star.norm() > 0.0 ? relative_mse(x, x_star) : absolute_mse(x, x_star);
}

double spread(const Mat& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) worst = std::max(worst, (x.row(i) - mean).norm());
  return worst;
}

}  // namespace

// ---------------------------------------------------------------- names

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Nrc:
      return "nrc";
    case Algorithm::Fnrc:
      return "fnrc";
    case Algorithm::Dsm:
      return "dsm";
    case Algorithm::Dcm:
      return "dcm";
    case Algorithm::Admm:
      return "admm";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Nrc, Algorithm::Fnrc, Algorithm::Dsm, Algorithm::Dcm, Algorithm::Admm}) {
    if (to_string(a) == name) return a;
  }
  throw InvalidArgument("unknown algorithm '" + std::string(name) + "' (expected nrc, fnrc, dsm, dcm or admm)");
}

// ---------------------------------------------------------------- problem

Problem build_problem(const ExperimentConfig& config) {
  const GraphSpec& gs = config.graph;
  Graph graph = gs.kind == GraphKind::Ring ? ring_graph(gs.agents)
                                           : random_geometric_graph(gs.agents, gs.radius, gs.seed);
  if (gs.matrix == MatrixKind::PaperRing && gs.kind != GraphKind::Ring) {
    throw ConfigError("the 0.5/0.25 ring matrix needs graph.kind = ring");
  }
  ConsensusMatrix P = gs.matrix == MatrixKind::PaperRing ? paper_ring_matrix(gs.agents) : metropolis_matrix(graph);

  const CostSpec& cs = config.costs;
  CostSet costs;
  int examples = 0;
  switch (cs.kind) {
    case CostKind::Quadratic:
      costs = random_quadratic_costs(gs.agents, cs.dim, cs.seed);
      break;
    case CostKind::Exponential:
      costs = exponential_benchmark_costs(gs.agents, cs.seed);
      break;
    case CostKind::Classification:
    case CostKind::Regression: {
      const std::string path = resolve_data_path(cs.data_path);
      Dataset ds = cs.kind == CostKind::Classification ? load_spambase(path, cs.spambase_features)
                                                       : load_housing(path, cs.housing_columns);
      if (cs.standardize) standardize(ds);
      examples = static_cast<int>(ds.rows());
      costs = to_costs(partition(ds, gs.agents, cs.partition_seed), cs.loss);
      break;
    }
  }

  Vec x_star;
  int iterations = 0;
  std::vector<double> certificate;
  if (config.oracle) {
    if (config.oracle->size() != costs.front()->dim()) throw ConfigError("oracle has the wrong dimension");
    x_star = *config.oracle;
  } else {
    NewtonResult oracle = centralized_newton(costs, Vec::Zero(costs.front()->dim()));
    x_star = std::move(oracle.x);
    iterations = oracle.iterations;
    certificate = std::move(oracle.last_changes);
  }
  return Problem{std::move(graph), std::move(P), std::move(costs), std::move(x_star), iterations,
                 std::move(certificate), examples};
}

// ---------------------------------------------------------------- metrics

double absolute_mse(const Mat& x, const Vec& x_star) {
  if (x.cols() != x_star.size()) throw InvalidArgument("x* dimension does not match the iterates");
  return (x.rowwise() - x_star.transpose()).rowwise().squaredNorm().mean();
}

double relative_mse(const Mat& x, const Vec& x_star) {
  const double denom = x_star.squaredNorm();
  if (!(denom > 0.0)) throw InvalidArgument("relative MSE undefined for x* = 0; use absolute_mse");
  return absolute_mse(x, x_star) / denom;
}

bool PlateauDetector::push(double value) {
  if (last_ && std::abs(value - *last_) < tolerance_) {
    ++streak_;
  } else {
    streak_ = 0;
  }
  last_ = value;
  return converged();
}

std::optional<int> rounds_to_reach(const std::vector<TraceRecord>& trace, double threshold) {
  std::optional<int> first;
  for (const auto& rec : trace) {
    if (rec.relative_mse <= threshold) {
      if (!first) first = rec.k;
    } else {
      first.reset();
    }
  }
  return first;
}

// ---------------------------------------------------------------- run

RunResult run(const Problem& problem, const AlgorithmConfig& algorithm, const InitSpec& init, int rounds,
              const RunOptions& options) {
  if (rounds < 1) throw InvalidArgument("a run needs at least one round");
  const auto start = std::chrono::steady_clock::now();
  auto stepper = make_stepper(problem, algorithm, init);

  RunResult result;
  result.trace.reserve(static_cast<std::size_t>(rounds));
  result.max_spread = spread(stepper->x());
  PlateauDetector plateau;
  for (int k = 1; k <= rounds; ++k) {
    try {
      stepper->step();
    } catch (const Error& e) {
      result.error = "round " + std::to_string(k) + ": " + e.what();
      break;
    }
    const Mat& x = stepper->x();
    TraceRecord rec;
    rec.k = k;
    rec.relative_mse = mse_against(x, problem.x_star);
    rec.clamp_count = stepper->clamps_last();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.record_every > 0 && (k % options.record_every == 0 || k == rounds)) rec.x = x;
    result.max_spread = std::max(result.max_spread, spread(x));
    result.trace.push_back(std::move(rec));
    if (!std::isfinite(result.trace.back().relative_mse)) {
      result.error = "round " + std::to_string(k) + ": non-finite relative MSE";
      break;
    }
    if (options.stop_on_plateau && plateau.push(result.trace.back().relative_mse)) break;
  }
  result.final_x = stepper->x();
  return result;
}

RunResult run(const ExperimentConfig& config) {
  const Problem problem = build_problem(config);
  return run(problem, config.algorithm, config.init, config.rounds, RunOptions{config.record_every, false});
}

// ---------------------------------------------------------------- sweeps

std::string_view to_string(SweepParam param) {
  switch (param) {
    case SweepParam::Epsilon:
      return "epsilon";
    case SweepParam::StepScale:
      return "step_scale";
    case SweepParam::Mu:
      return "mu";
    case SweepParam::Delta:
      return "delta";
    case SweepParam::Phi:
      return "phi";
  }
  return "?";
}

SweepParam parse_sweep_param(std::string_view name) {
  for (SweepParam p : {SweepParam::Epsilon, SweepParam::StepScale, SweepParam::Mu, SweepParam::Delta, SweepParam::Phi}) {
    if (to_string(p) == name) return p;
  }
  if (name == "rho" || name == "varrho") return SweepParam::StepScale;
  throw InvalidArgument("unknown sweep parameter '" + std::string(name) +
                        "' (expected epsilon, step_scale, mu, delta or phi)");
}

SweepParam primary_param(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Nrc:
    case Algorithm::Fnrc:
      return SweepParam::Epsilon;
    case Algorithm::Dsm:
      return SweepParam::StepScale;
    case Algorithm::Dcm:
      return SweepParam::Mu;
    case Algorithm::Admm:
      return SweepParam::Delta;
  }
  return SweepParam::Epsilon;
}

void set_param(AlgorithmConfig& config, SweepParam param, double value) {
  switch (param) {
    case SweepParam::Epsilon:
      config.epsilon = value;
      break;
    case SweepParam::StepScale:
      config.step_scale = value;
      break;
    case SweepParam::Mu:
      config.mu = value;
      break;
    case SweepParam::Delta:
      config.delta = value;
      break;
    case SweepParam::Phi:
      config.phi = value;
      break;
  }
}

std::vector<double> parse_grid(std::string_view spec) {
  auto number = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("bad number '" + s + "' in grid '" + std::string(spec) + "'");
    }
  };
  std::vector<std::string> parts;
  std::string cur;
  const char sep = spec.find(':') != std::string_view::npos ? ':' : ',';
  for (char ch : spec) {
    if (ch == sep) {
      parts.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);

  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 4 || (parts[0] != "log" && parts[0] != "lin")) {
      throw InvalidArgument("grid must look like log:lo:hi:n, lin:lo:hi:n or a comma list");
    }
    const double lo = number(parts[1]);
    const double hi = number(parts[2]);
    const int count = static_cast<int>(number(parts[3]));
    if (count < 1) throw InvalidArgument("grid needs at least one point");
    if (parts[0] == "log" && !(lo > 0.0 && hi > 0.0)) throw InvalidArgument("log grid bounds must be positive");
    for (int i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      grid.push_back(parts[0] == "log" ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)))
                                       : lo + t * (hi - lo));
    }
    if (count > 1) grid.back() = hi;
  } else {
    for (const auto& p : parts) grid.push_back(number(p));
  }
  return grid;
}

std::vector<double> clamp_grid(std::vector<double> grid, double lo, double hi) {
  const double margin = 1e-3 * (hi - lo);
  for (double& v : grid) {
    if (v >= hi) v = hi - margin;
    if (v <= lo) v = lo + margin;
  }
  std::vector<double> out;
  for (double v : grid) {
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  }
  return out;
}

std::vector<double> admissible_grid(const Problem& problem, SweepParam param, std::vector<double> grid) {
  switch (param) {
    case SweepParam::Mu:
      return clamp_grid(std::move(grid), 0.0, dcm_mu_bound(problem.graph));
    case SweepParam::Delta:
      return clamp_grid(std::move(grid), 0.0, 1.0);
    case SweepParam::Epsilon:
      for (double& v : grid) v = std::min(v, 1.0);
      return clamp_grid(std::move(grid), 0.0, 2.0);
    case SweepParam::Phi:
      for (double& v : grid) v = std::max(v, 1.0);
      return clamp_grid(std::move(grid), 0.0, 2.0);
    case SweepParam::StepScale:
      break;
  }
  return grid;
}

std::vector<SweepRow> sweep(const Problem& problem, const AlgorithmConfig& base, const InitSpec& init,
                            SweepParam param, std::span<const double> grid, int probe_round, int jobs) {
  if (probe_round < 1) throw InvalidArgument("probe round must be at least 1");
  std::vector<SweepRow> rows(grid.size());
  parallel_for(static_cast<int>(grid.size()), jobs, [&](int idx) {
    SweepRow& row = rows[static_cast<std::size_t>(idx)];
    row.value = grid[static_cast<std::size_t>(idx)];
    AlgorithmConfig cfg = base;
    set_param(cfg, param, row.value);
    try {
      const RunResult r = run(problem, cfg, init, probe_round);
      const bool complete = !r.error && static_cast<int>(r.trace.size()) == probe_round;
      row.mse_at_probe = complete ? r.trace.back().relative_mse : kNaN;
      row.status = complete && std::isfinite(row.mse_at_probe) && row.mse_at_probe <= kUnstableMse ? "ok" : "unstable";
    } catch (const InvalidArgument&) {
      row.mse_at_probe = kNaN;
      row.status = "invalid";
    }
  });
  return rows;
}

std::optional<SweepRow> best_row(const std::vector<SweepRow>& rows) {
  std::optional<SweepRow> best;
  for (const auto& r : rows) {
    if (r.status != "ok") continue;
    if (!best || r.mse_at_probe < best->mse_at_probe) best = r;
  }
  return best;
}

// ---------------------------------------------------------------- perturbation study

std::vector<PerturbationSamples> monte_carlo_perturbation(const Problem& problem, const AlgorithmConfig& algorithm,
                                                          const InitSpec& base_init, std::span<const double> sigmas,
                                                          int runs, int max_rounds, int jobs) {
  if (runs < 1) throw InvalidArgument("need at least one run per sigma");
  if (max_rounds < 1) throw InvalidArgument("need at least one round");
  constexpr int kWindow = 50;
  constexpr double kStepTolerance = 1e-13;

  const int N = problem.agents();
  const int n = problem.dim();
  std::vector<PerturbationSamples> out(sigmas.size());
  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    out[s].sigma = sigmas[s];
    out[s].errors.assign(static_cast<std::size_t>(runs) * static_cast<std::size_t>(N * n), kNaN);
    out[s].run_errors.assign(static_cast<std::size_t>(runs), kNaN);
  }
  std::vector<char> converged(sigmas.size() * static_cast<std::size_t>(runs), 0);

  const int total = static_cast<int>(sigmas.size()) * runs;
  parallel_for(total, jobs, [&](int job) {
    const auto s = static_cast<std::size_t>(job / runs);
    const int r = job % runs;
    InitSpec init = base_init;
    init.sigma = sigmas[s];
    // Same seed for every sigma: the offsets are sigma times a common draw.
    init.seed = base_init.seed + static_cast<std::uint64_t>(r);

    Mat x;
    bool ok = false;
    try {
      auto stepper = make_stepper(problem, algorithm, init);
      Mat prev = stepper->x();
      int streak = 0;
      for (int k = 1; k <= max_rounds; ++k) {
        stepper->step();
        const Mat& cur = stepper->x();
        const double move = (cur - prev).cwiseAbs().maxCoeff();
        streak = move <= kStepTolerance * std::max(1.0, cur.cwiseAbs().maxCoeff()) ? streak + 1 : 0;
        prev = cur;
        if (streak >= kWindow) {
          ok = true;
          break;
        }
      }
      x = prev;
    } catch (const Error&) {
      x = Mat::Constant(N, n, kInf);
    }

    auto& samples = out[s];
    double worst = 0.0;
    for (int i = 0; i < N; ++i) {
      for (int c = 0; c < n; ++c) {
        const double e = x(i, c) - problem.x_star(c);
        samples.errors[static_cast<std::size_t>(r * N * n + i * n + c)] = std::isfinite(e) ? e : kInf;
        worst = std::isfinite(e) ? std::max(worst, std::abs(e)) : kInf;
      }
    }
    samples.run_errors[static_cast<std::size_t>(r)] = worst;
    converged[s * static_cast<std::size_t>(runs) + static_cast<std::size_t>(r)] = ok ? 1 : 0;
  });

  for (std::size_t s = 0; s < sigmas.size(); ++s) {
    for (int r = 0; r < runs; ++r) {
      if (!converged[s * static_cast<std::size_t>(runs) + static_cast<std::size_t>(r)]) ++out[s].unconverged;
    }
  }
  return out;
}

// ---------------------------------------------------------------- comparison

std::vector<ComparisonEntry> compare_algorithms(const Problem& problem, const AlgorithmConfig& base,
                                                const ComparisonOptions& options) {
  const std::vector<double> raw_grid = parse_grid(options.grid);
  std::vector<ComparisonEntry> entries(options.algorithms.size());
  std::vector<AlgorithmConfig> tuned(options.algorithms.size(), base);

  for (std::size_t a = 0; a < options.algorithms.size(); ++a) {
    auto& e = entries[a];
    e.algorithm = options.algorithms[a];
    e.param = primary_param(e.algorithm);
    tuned[a].algorithm = e.algorithm;
    const auto grid = admissible_grid(problem, e.param, raw_grid);
    e.sweep = sweep(problem, tuned[a], InitSpec{}, e.param, grid, options.probe, options.jobs);
    e.best = best_row(e.sweep);
    if (e.best) set_param(tuned[a], e.param, e.best->value);
  }

  parallel_for(static_cast<int>(entries.size()), options.jobs, [&](int idx) {
    auto& e = entries[static_cast<std::size_t>(idx)];
    if (!e.best) return;
    RunResult r = run(problem, tuned[static_cast<std::size_t>(idx)], InitSpec{}, options.rounds);
    e.rounds_to_threshold = r.error ? std::nullopt : rounds_to_reach(r.trace, options.threshold);
    e.final_mse = r.trace.empty() ? kNaN : r.trace.back().relative_mse;
    e.trace = std::move(r.trace);
  });
  return entries;
}

// ---------------------------------------------------------------- CSV

void write_summary_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  const auto old = os.precision(17);
  os << "k,relative_mse,clamp_count\n";
  for (const auto& rec : trace) os << rec.k << ',' << rec.relative_mse << ',' << rec.clamp_count << '\n';
  os.precision(old);
}

void write_agent_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace) {
  const auto old = os.precision(17);
  os << "k,agent,coord,value\n";
  for (const auto& rec : trace) {
    if (!rec.x) continue;
    for (Eigen::Index i = 0; i < rec.x->rows(); ++i)
      for (Eigen::Index c = 0; c < rec.x->cols(); ++c) os << rec.k << ',' << i << ',' << c << ',' << (*rec.x)(i, c) << '\n';
  }
  os.precision(old);
}

void write_sweep_csv(std::ostream& os, SweepParam param, const std::vector<SweepRow>& rows) {
  const auto old = os.precision(17);
  os << "param,value,mse_at_probe,status\n";
  for (const auto& r : rows) os << to_string(param) << ',' << r.value << ',' << r.mse_at_probe << ',' << r.status << '\n';
  os.precision(old);
}

}  // namespace nrc
