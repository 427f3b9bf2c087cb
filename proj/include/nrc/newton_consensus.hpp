#pragma once

#include <optional>

#include "nrc/costs.hpp"
#include "nrc/graph.hpp"

namespace nrc {

// Newton-Raphson Consensus and its second-order ("fast") variant.
//
// Per-agent quantities are stacked row-wise: row i of `x` is x_i. The n x n
// matrices z_i are flattened column-major into rows of length n*n, so one
// consensus round on every register is a single product P * Z.

/// Result of the [.]_c operator.
struct ClampResult {
  Mat matrix;
  bool activated = false;  ///< true when z was replaced by (c/2) I
};

/// Returns z unchanged if its smallest eigenvalue is at least c/2, otherwise
/// (c/2) I. The whole matrix is replaced; eigenvalues are not floored one by one.
ClampResult clamp_c(const Mat& z, double c);

struct NrcState {
  int k = 0;
  Mat x;      ///< x_i(k)
  Mat y;      ///< y_i(k)
  Mat z;      ///< z_i(k), flattened
  Mat g_lag;  ///< g_i(x_i(k-1)); the "g(x(-1))" register at k = 0
  Mat h_lag;  ///< h_i(x_i(k-1)), flattened
  int clamps_last_step = 0;
  long clamps_total = 0;

  int agents() const { return static_cast<int>(x.rows()); }
  int dim() const { return static_cast<int>(x.cols()); }
  Vec x_of(int i) const { return x.row(i).transpose(); }
  Mat z_of(int i) const;
};

struct FnrcState : NrcState {
  Mat y_lag;   ///< y_i(k-1)
  Mat z_lag;   ///< z_i(k-1), flattened
  Mat g_lag2;  ///< g_i(x_i(k-2))
  Mat h_lag2;  ///< h_i(x_i(k-2)), flattened
};

/// Initial conditions. With everything left empty this is the zero start:
/// x, y, z and the g/h registers all vanish.
struct InitOptions {
  std::optional<Mat> x0;  ///< N x n starting points
  /// Set y_i(0) = g_i(x_i(0)) and z_i(0) = h_i(x_i(0)) and load the same
  /// values into the registers, so the offsets xi_y, xi_z stay zero for any x0.
  bool registers_from_x0 = false;
  std::optional<Mat> y_offset;  ///< N x n, added to y_i(0)
  std::optional<Mat> z_offset;  ///< N x n*n (symmetric rows), added to z_i(0)

  /// Adds the same xi_y, xi_z to every agent.
  static InitOptions uniform_perturbation(int agents, const Vec& xi_y, const Mat& xi_z);
};

NrcState nrc_init(const CostSet& costs, HessianScheme scheme, const InitOptions& options = {});

/// Registers of the fast variant start as copies of the one-step lags.
FnrcState fnrc_init(const CostSet& costs, HessianScheme scheme, const InitOptions& options = {});

struct NrcParams {
  double epsilon = 1.0;
  double c = 1e-3;
  HessianScheme scheme = HessianScheme::Newton;
};

/// One synchronous round of Newton-Raphson Consensus.
NrcState nrc_step(const NrcState& state, const ConsensusMatrix& P, const CostSet& costs, const NrcParams& params);

/// One synchronous round of the fast variant with memory weight phi in [1, 2).
FnrcState fnrc_step(const FnrcState& state, const ConsensusMatrix& P, const CostSet& costs, const NrcParams& params,
                    double phi);

/// phi = 2 / (1 + sqrt(1 - rho^2)).
double fnrc_phi(double rho);

/// xi_y = mean_i (y_i(0) - g_i(x_i(-1))) for a freshly initialized state.
Vec offset_y(const NrcState& state);
/// xi_z, flattened.
Vec offset_z(const NrcState& state);

}  // namespace nrc
