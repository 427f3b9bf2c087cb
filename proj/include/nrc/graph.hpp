#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nrc {

using Edge = std::pair<int, int>;

/// Undirected communication graph on agents 0..n-1.
///
/// Edges are stored normalized (first < second), sorted and de-duplicated.
/// Self-loops and out-of-range indices are rejected at construction.
class Graph {
 public:
  Graph(int n_agents, std::vector<Edge> edges);

  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(static_cast<std::size_t>(i)); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  int max_degree() const;
  bool has_edge(int i, int j) const;
  bool connected() const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

/// Ring where agent i talks to (i-1) and (i+1) mod n. Requires n >= 3.
Graph ring_graph(int n);

/// Agents dropped uniformly on the unit square, linked when within `radius`.
/// Draws with seed, seed+1, ... until the graph is connected; gives up
/// after kGeometricRetryBudget attempts with a SolverError.
Graph random_geometric_graph(int n, double radius, std::uint64_t seed);

inline constexpr int kGeometricRetryBudget = 100;

struct SpectralInfo {
  double rho = 0.0;    ///< largest |eigenvalue| once the unit eigenvalue is removed
  double sigma = 1.0;  ///< spectral gap, 1 - rho
  bool repeated_unit_eigenvalue = false;  ///< a second eigenvalue within 1e-9 of 1
};

/// Spectrum summary of a symmetric stochastic matrix.
SpectralInfo spectral_analysis(const Eigen::MatrixXd& P);

/// Symmetric, doubly stochastic, nonnegative matrix whose pattern matches a graph.
class ConsensusMatrix {
 public:
  /// Validates the matrix against `g` and computes its spectrum.
  /// Throws InvalidArgument when any consensus-matrix property fails.
  ConsensusMatrix(Eigen::MatrixXd P, const Graph& g);

  const Eigen::MatrixXd& matrix() const { return P_; }
  int size() const { return static_cast<int>(P_.rows()); }
  double rho() const { return spectrum_.rho; }
  double sigma() const { return spectrum_.sigma; }
  const SpectralInfo& spectrum() const { return spectrum_; }
  double operator()(int i, int j) const { return P_(i, j); }

 private:
  Eigen::MatrixXd P_;
  SpectralInfo spectrum_;
};

/// Circulant ring matrix: 0.5 on the diagonal, 0.25 to each ring neighbor.
ConsensusMatrix paper_ring_matrix(int n);

/// Metropolis-Hastings weights p_ij = 1 / (1 + max(deg_i, deg_j)).
ConsensusMatrix metropolis_matrix(const Graph& g);

/// Suggested epsilon = safety * sigma, keeping the local updates slower
/// than the consensus dynamics.
double epsilon_rule_of_thumb(double sigma, double safety = 0.1);

// Edge-list text format: a header line "n=<N>" followed by one "i j" per line.
void write_edge_list(std::ostream& os, const Graph& g);
Graph read_edge_list(std::istream& is);

/// Row-major CSV with 17 significant digits.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& M);

}  // namespace nrc
