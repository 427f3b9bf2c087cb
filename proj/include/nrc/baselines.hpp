#pragma once

#include <vector>

#include "nrc/costs.hpp"
#include "nrc/graph.hpp"

namespace nrc {

// Reference algorithms used for comparison: distributed subgradient (DSM),
// distributed control (DCM) and edge-based ADMM. Each step is a synchronous
// round reading only the neighbors' previous-round values.

// ---------------------------------------------------------------- DSM

struct DsmState {
  Mat x;      ///< N x n
  int k = 1;  ///< step size at this round is step_scale / k
};

DsmState dsm_init(int agents, int dim);

/// x_i(k+1) = sum_j p_ij (x_j(k) - (step_scale / k) grad f_j(x_j(k))).
DsmState dsm_step(const DsmState& state, const ConsensusMatrix& P, const CostSet& costs, double step_scale);

// ---------------------------------------------------------------- DCM

struct DcmParams {
  double mu = 0.1;
  double nu = 1.7;
};

struct DcmState {
  Mat x;
  Mat z;
};

/// Open upper bound 2 / (2 max_i |N_i| + 1) on mu.
double dcm_mu_bound(const Graph& g);

DcmState dcm_init(int agents, int dim);

/// Throws InvalidArgument when mu is outside (0, dcm_mu_bound(g)) or nu <= 0.
DcmState dcm_step(const DcmState& state, const Graph& g, const CostSet& costs, const DcmParams& params);

// ---------------------------------------------------------------- ADMM

/// Edge variables are kept per directed pair: row t of z[i] (and y[i]) belongs
/// to the edge (i, g.neighbors(i)[t]).
struct AdmmState {
  Mat x;
  std::vector<Mat> z;
  std::vector<Mat> y;
};

struct AdmmInnerOptions {
  double tolerance = 1e-10;  ///< on the Newton step, relative to 1 + |x_i|
  int max_iterations = 100;
  int max_halvings = 30;
};

AdmmState admm_init(const Graph& g, int dim);

/// Gradient of the local augmented Lagrangian
/// L_i(x) = f_i(x) + sum_t [ y_t.(x - z_t) + delta/2 |x - z_t|^2 ].
Vec admm_lagrangian_gradient(const CostFunction& f, const Mat& z_i, const Mat& y_i, double delta, const Vec& x);

/// argmin_x L_i by damped Newton started at `start`. Throws SolverError when
/// the tolerance is not met within the iteration cap.
Vec admm_local_argmin(const CostFunction& f, const Mat& z_i, const Mat& y_i, double delta, const Vec& start,
                      const AdmmInnerOptions& options = {});

/// One ADMM round; delta must lie in (0, 1).
AdmmState admm_step(const AdmmState& state, const Graph& g, const CostSet& costs, double delta,
                    const AdmmInnerOptions& options = {});

}  // namespace nrc
