#include "nrc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "nrc/errors.hpp"
#include "nrc/random.hpp"

namespace nrc {

Graph::Graph(int n_agents, std::vector<Edge> edges) : n_(n_agents) {
  if (n_agents < 1) throw InvalidArgument("graph needs at least one agent");
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n_ || j >= n_) {
      throw InvalidArgument("edge (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
    }
    if (i == j) throw InvalidArgument("self-loop at agent " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);

  adjacency_.resize(static_cast<std::size_t>(n_));
  for (const auto& [i, j] : edges_) {
    adjacency_[static_cast<std::size_t>(i)].push_back(j);
    adjacency_[static_cast<std::size_t>(j)].push_back(i);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

int Graph::max_degree() const {
  int best = 0;
  for (int i = 0; i < n_; ++i) best = std::max(best, degree(i));
  return best;
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

bool Graph::connected() const {
  std::vector<char> seen(static_cast<std::size_t>(n_), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : neighbors(v)) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == n_;
}

Graph ring_graph(int n) {
  if (n < 3) throw InvalidArgument("ring needs at least 3 agents, got " + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return Graph(n, std::move(edges));
}

Graph random_geometric_graph(int n, double radius, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("geometric graph needs at least one agent");
  if (!(radius > 0.0)) throw InvalidArgument("geometric graph radius must be positive");

  const double r2 = radius * radius;
  for (int attempt = 0; attempt < kGeometricRetryBudget; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt));
    std::vector<double> px(static_cast<std::size_t>(n)), py(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      px[static_cast<std::size_t>(i)] = rng.uniform();
      py[static_cast<std::size_t>(i)] = rng.uniform();
    }
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dx = px[static_cast<std::size_t>(i)] - px[static_cast<std::size_t>(j)];
        const double dy = py[static_cast<std::size_t>(i)] - py[static_cast<std::size_t>(j)];
        if (dx * dx + dy * dy <= r2) edges.emplace_back(i, j);
      }
    }
    Graph g(n, std::move(edges));
    if (g.connected()) return g;
  }
  throw SolverError("no connected geometric graph within " + std::to_string(kGeometricRetryBudget) +
                    " attempts (n=" + std::to_string(n) + ", radius=" + std::to_string(radius) + ")");
}

SpectralInfo spectral_analysis(const Eigen::MatrixXd& P) {
  SpectralInfo info;
  if (P.rows() <= 1) return info;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(P, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigen-decomposition of consensus matrix failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();

  Eigen::Index unit = 0;
  (lambda.array() - 1.0).abs().minCoeff(&unit);

  double rho = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (i == unit) continue;
    rho = std::max(rho, std::abs(lambda(i)));
    if (std::abs(lambda(i) - 1.0) <= 1e-9) info.repeated_unit_eigenvalue = true;
  }
  info.rho = rho;
  info.sigma = 1.0 - rho;
  return info;
}

ConsensusMatrix::ConsensusMatrix(Eigen::MatrixXd P, const Graph& g) : P_(std::move(P)) {
  const int n = g.size();
  if (P_.rows() != n || P_.cols() != n) throw InvalidArgument("consensus matrix size does not match graph");
  constexpr double tol = 1e-12;
  if ((P_ - P_.transpose()).cwiseAbs().maxCoeff() > tol) throw InvalidArgument("consensus matrix not symmetric");
  if (P_.minCoeff() < 0.0) throw InvalidArgument("consensus matrix has negative entries");
  if ((P_.rowwise().sum().array() - 1.0).abs().maxCoeff() > tol) {
    throw InvalidArgument("consensus matrix rows do not sum to one");
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && P_(i, j) > 0.0 && !g.has_edge(i, j)) {
        throw InvalidArgument("consensus matrix weight on non-edge (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
      }
    }
  }
  spectrum_ = spectral_analysis(P_);
}

ConsensusMatrix paper_ring_matrix(int n) {
  const Graph g = ring_graph(n);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    P(i, i) = 0.5;
    P(i, (i + 1) % n) = 0.25;
    P(i, (i + n - 1) % n) = 0.25;
  }
  return ConsensusMatrix(std::move(P), g);
}

ConsensusMatrix metropolis_matrix(const Graph& g) {
  if (!g.connected()) throw InvalidArgument("Metropolis weights need a connected graph");
  const int n = g.size();
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j] : g.edges()) {
    const double w = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
    P(i, j) = w;
    P(j, i) = w;
  }
  for (int i = 0; i < n; ++i) P(i, i) = 1.0 - P.row(i).sum();
  return ConsensusMatrix(std::move(P), g);
}

double epsilon_rule_of_thumb(double sigma, double safety) {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw InvalidArgument("spectral gap must lie in (0, 1]");
  if (!(safety > 0.0 && safety < 1.0)) throw InvalidArgument("safety factor must lie in (0, 1)");
  return safety * sigma;
}

void write_edge_list(std::ostream& os, const Graph& g) {
  os << "n=" << g.size() << '\n';
  for (const auto& [i, j] : g.edges()) os << i << ' ' << j << '\n';
}

Graph read_edge_list(std::istream& is) {
  std::string line;
  int line_no = 0;
  int n = -1;
  std::vector<Edge> edges;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (n < 0) {
      if (line.rfind("n=", 0) != 0) throw ParseError("line " + std::to_string(line_no) + ": expected header n=<N>");
      try {
        n = std::stoi(line.substr(2));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": bad agent count");
      }
      continue;
    }
    std::istringstream ls(line);
    int i = 0, j = 0;
    std::string rest;
    if (!(ls >> i >> j) || (ls >> rest)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected \"i j\"");
    }
    edges.emplace_back(i, j);
  }
  if (n < 0) throw ParseError("edge list is missing its n=<N> header");
  return Graph(n, std::move(edges));
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& M) {
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) os << ',';
      os << M(i, j);
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace nrc
