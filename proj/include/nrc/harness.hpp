#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nrc/costs.hpp"
#include "nrc/data.hpp"
#include "nrc/graph.hpp"

namespace nrc {

enum class Algorithm { Nrc, Fnrc, Dsm, Dcm, Admm };

std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

/// Parameters of every algorithm; each one reads only its own fields.
struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::Nrc;
  HessianScheme scheme = HessianScheme::Newton;
  double epsilon = 1.0;     ///< NRC/FNRC
  double c = 1e-3;          ///< NRC/FNRC clamp threshold
  double phi = 0.0;         ///< FNRC; <= 0 means 2 / (1 + sqrt(1 - rho^2))
  double step_scale = 1.0;  ///< DSM varrho
  double mu = 0.1;          ///< DCM
  double nu = 1.7;          ///< DCM
  double delta = 0.5;       ///< ADMM
};

enum class GraphKind { Ring, Geometric };
enum class MatrixKind { PaperRing, Metropolis };
enum class CostKind { Quadratic, Exponential, Classification, Regression };

struct GraphSpec {
  GraphKind kind = GraphKind::Ring;
  int agents = 30;
  double radius = 0.3;
  std::uint64_t seed = 1;
  MatrixKind matrix = MatrixKind::PaperRing;
};

struct CostSpec {
  CostKind kind = CostKind::Quadratic;
  int dim = 3;  ///< quadratic only
  std::uint64_t seed = 1;
  std::string data_path;
  std::vector<std::string> spambase_features{"make", "address", "all"};
  std::vector<int> housing_columns{0, 5, 8, 12};
  LossParams loss;
  bool standardize = false;
  std::uint64_t partition_seed = 1;
};

/// Initial conditions of a run.
struct InitSpec {
  double x0_range = 0.0;           ///< x_i(0) ~ U(-range, range); 0 keeps the zero start
  bool registers_from_x0 = false;  ///< start y, z and registers at g(x0), h(x0)
  double sigma = 0.0;              ///< i.i.d. U(-sigma, sigma) offsets on every y_i(0), z_i(0)
  std::uint64_t seed = 1;
};

struct SweepSpec {
  std::string param = "epsilon";
  std::string grid = "log:1e-3:1:20";
  int probe = 40;
};

struct MonteCarloSpec {
  std::vector<double> sigmas{0.0, 1e-3, 1e-2, 1e-1};
  int runs = 300;
  int max_rounds = 20000;
};

struct CompareSpec {
  std::vector<std::string> algorithms{"nrc", "fnrc", "dsm", "dcm", "admm"};
  double threshold = 1e-3;
};

struct ExperimentConfig {
  GraphSpec graph;
  CostSpec costs;
  AlgorithmConfig algorithm;
  InitSpec init;
  SweepSpec sweep;
  MonteCarloSpec montecarlo;
  CompareSpec compare;
  int rounds = 100;
  int record_every = 0;  ///< keep per-agent snapshots every this many rounds (0: none)
  std::optional<Vec> oracle;
};

/// Everything a run needs, built once from a config and shared read-only.
struct Problem {
  Graph graph;
  ConsensusMatrix P;
  CostSet costs;
  Vec x_star;
  int oracle_iterations = 0;
  std::vector<double> oracle_certificate;  ///< last relative changes of the oracle
  int examples = 0;                        ///< dataset rows, 0 for synthetic costs

  int agents() const { return graph.size(); }
  int dim() const { return static_cast<int>(x_star.size()); }
};

/// Builds graph, consensus matrix, costs and the oracle optimum.
Problem build_problem(const ExperimentConfig& config);

/// (1/N) sum_i |x_i - x*|^2 / |x*|^2. Throws InvalidArgument when x* = 0;
/// use absolute_mse then.
double relative_mse(const Mat& x, const Vec& x_star);
double absolute_mse(const Mat& x, const Vec& x_star);

struct TraceRecord {
  int k = 0;
  double relative_mse = 0.0;
  long clamp_count = 0;  ///< clamp activations in this round
  double wall_time = 0.0;  ///< seconds since the run started; excluded from CSV output
  std::optional<Mat> x;  ///< per-agent snapshot when recorded
};

struct RunResult {
  std::vector<TraceRecord> trace;
  Mat final_x;
  double max_spread = 0.0;  ///< max over rounds and agents of |x_i(k) - mean_j x_j(k)|
  std::optional<std::string> error;  ///< set when a step failed; the trace stops there
};

struct RunOptions {
  int record_every = 0;
  bool stop_on_plateau = false;
};

/// Deterministic synchronous simulation for `rounds` rounds.
RunResult run(const Problem& problem, const AlgorithmConfig& algorithm, const InitSpec& init, int rounds,
              const RunOptions& options = {});

/// Builds the problem and runs the configured algorithm.
RunResult run(const ExperimentConfig& config);

/// Converged once |m(k) - m(k-1)| < tolerance for `window` consecutive rounds.
class PlateauDetector {
 public:
  explicit PlateauDetector(double tolerance = 1e-12, int window = 50) : tolerance_(tolerance), window_(window) {}
  bool push(double value);
  bool converged() const { return streak_ >= window_; }

 private:
  double tolerance_;
  int window_;
  int streak_ = 0;
  std::optional<double> last_;
};

/// First round from which the relative MSE stays at or below `threshold`.
std::optional<int> rounds_to_reach(const std::vector<TraceRecord>& trace, double threshold);

// ---------------------------------------------------------------- sweeps

enum class SweepParam { Epsilon, StepScale, Mu, Delta, Phi };

std::string_view to_string(SweepParam param);
SweepParam parse_sweep_param(std::string_view name);
/// Parameter a best-of-grid search tunes for each algorithm.
SweepParam primary_param(Algorithm algorithm);
void set_param(AlgorithmConfig& config, SweepParam param, double value);

/// "log:lo:hi:n", "lin:lo:hi:n" or a comma-separated list.
std::vector<double> parse_grid(std::string_view spec);

/// Replaces points outside the open interval (lo, hi) by the nearest point
/// just inside it and removes resulting duplicates.
std::vector<double> clamp_grid(std::vector<double> grid, double lo, double hi);

/// Restricts a grid to the valid range of `param` for this problem
/// (DCM mu below its degree bound, ADMM delta below 1).
std::vector<double> admissible_grid(const Problem& problem, SweepParam param, std::vector<double> grid);

inline constexpr double kUnstableMse = 1e6;

struct SweepRow {
  double value = 0.0;
  double mse_at_probe = 0.0;
  std::string status;  ///< "ok", "unstable" or "invalid"
};

/// Independent runs per grid point; rows come back in grid order for any `jobs`.
std::vector<SweepRow> sweep(const Problem& problem, const AlgorithmConfig& base, const InitSpec& init,
                            SweepParam param, std::span<const double> grid, int probe_round, int jobs = 1);

/// Grid point with the lowest probe MSE among stable rows.
std::optional<SweepRow> best_row(const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------- perturbation study

struct PerturbationSamples {
  double sigma = 0.0;
  std::vector<double> errors;  ///< x_i(limit) - x* for every run, agent and coordinate
  std::vector<double> run_errors;  ///< max_i |x_i(limit) - x*| per run
  int unconverged = 0;
};

/// For each sigma, `runs` replicas with seeded x0 ~ U(-x0_range, x0_range),
/// consistent registers and i.i.d. U(-sigma, sigma) offsets on y_i(0), z_i(0),
/// each run until the iterates stop moving.
std::vector<PerturbationSamples> monte_carlo_perturbation(const Problem& problem, const AlgorithmConfig& algorithm,
                                                          const InitSpec& base_init, std::span<const double> sigmas,
                                                          int runs, int max_rounds, int jobs = 1);

// ---------------------------------------------------------------- algorithm comparison

struct ComparisonEntry {
  Algorithm algorithm = Algorithm::Nrc;
  SweepParam param = SweepParam::Epsilon;
  std::vector<SweepRow> sweep;
  std::optional<SweepRow> best;
  std::optional<int> rounds_to_threshold;
  double final_mse = 0.0;
  std::vector<TraceRecord> trace;
};

struct ComparisonOptions {
  std::vector<Algorithm> algorithms{Algorithm::Nrc, Algorithm::Fnrc, Algorithm::Dsm, Algorithm::Dcm,
                                    Algorithm::Admm};
  std::string grid = "log:1e-3:1:20";
  int probe = 40;
  int rounds = 3000;
  double threshold = 1e-3;
  int jobs = 1;
};

/// Tunes each algorithm on its grid at the probe round, then reruns the best
/// setting and reports when the relative MSE reaches the threshold.
std::vector<ComparisonEntry> compare_algorithms(const Problem& problem, const AlgorithmConfig& base,
                                                const ComparisonOptions& options);

// ---------------------------------------------------------------- CSV output

void write_summary_csv(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_agent_trace_csv(std::ostream& os, const std::vector<TraceRecord>& trace);
void write_sweep_csv(std::ostream& os, SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace nrc
