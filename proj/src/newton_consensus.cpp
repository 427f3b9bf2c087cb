#include "nrc/newton_consensus.hpp"

#include <cmath>
#include <string>

#include "nrc/errors.hpp"

namespace nrc {

namespace {

Vec flatten(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unflatten(const Eigen::Ref<const Eigen::RowVectorXd>& row, int n) {
  Mat m(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) m(r, c) = row(c * n + r);
  return m;
}

void check_costs(const CostSet& costs) {
  if (costs.empty()) throw InvalidArgument("need at least one agent cost");
  const int n = costs.front()->dim();
  for (const auto& f : costs) {
    if (f->dim() != n) throw InvalidArgument("agent costs disagree on dimension");
  }
}

void check_params(const NrcParams& params) {
  if (!(params.epsilon >= 0.0 && params.epsilon <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  if (!(params.c > 0.0)) throw InvalidArgument("clamp threshold c must be positive");
}

// g_i and h_i of every agent at its current x_i.
void evaluate_all(const Mat& x, const CostSet& costs, HessianScheme scheme, Mat& g, Mat& h) {
  const int N = static_cast<int>(x.rows());
  const int n = static_cast<int>(x.cols());
  g.resize(N, n);
  h.resize(N, n * n);
  for (int i = 0; i < N; ++i) {
    const LocalTerms t = local_terms(*costs[static_cast<std::size_t>(i)], scheme, x.row(i).transpose());
    g.row(i) = t.g.transpose();
    h.row(i) = flatten(t.h).transpose();
  }
}

// x_i(k) = (1 - eps) x_i(k-1) + eps [z_i(k-1)]_c^{-1} y_i(k-1); returns clamp activations.
int update_x(const NrcState& prev, NrcState& next, const NrcParams& params) {
  const int N = prev.agents();
  const int n = prev.dim();
  int clamps = 0;
  next.x.resize(N, n);
  for (int i = 0; i < N; ++i) {
    const ClampResult zc = clamp_c(prev.z_of(i), params.c);
    clamps += zc.activated ? 1 : 0;
    Eigen::LLT<Mat> llt(zc.matrix);
    if (llt.info() != Eigen::Success) {
      throw NumericError("factorization failed after clamp at agent " + std::to_string(i) + ", round " +
                         std::to_string(prev.k + 1));
    }
    const Vec direction = llt.solve(prev.y.row(i).transpose());
    next.x.row(i) = ((1.0 - params.epsilon) * prev.x.row(i).transpose() + params.epsilon * direction).transpose();
  }
  if (!next.x.allFinite()) throw NumericError("non-finite x at round " + std::to_string(prev.k + 1));
  return clamps;
}

}  // namespace

ClampResult clamp_c(const Mat& z, double c) {
  if (z.rows() != z.cols()) throw InvalidArgument("clamp expects a square matrix");
  if (!(c > 0.0)) throw InvalidArgument("clamp threshold c must be positive");
  if ((z - z.transpose()).cwiseAbs().maxCoeff() > 1e-9) throw InvalidArgument("clamp expects a symmetric matrix");
  const double floor = 0.5 * c;
  double min_eig = 0.0;
  if (z.rows() == 1) {
    min_eig = z(0, 0);
  } else {
    Eigen::SelfAdjointEigenSolver<Mat> solver(z, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("eigenvalues of z did not converge");
    min_eig = solver.eigenvalues().minCoeff();
  }
  // NaN fails this comparison and is replaced as well.
  if (min_eig >= floor - 1e-10 * floor) return {z, false};
  return {Mat::Identity(z.rows(), z.cols()) * floor, true};
}

Mat NrcState::z_of(int i) const { return unflatten(z.row(i), dim()); }

InitOptions InitOptions::uniform_perturbation(int agents, const Vec& xi_y, const Mat& xi_z) {
  InitOptions opts;
  opts.y_offset = xi_y.transpose().replicate(agents, 1);
  opts.z_offset = flatten(xi_z).transpose().replicate(agents, 1);
  return opts;
}

NrcState nrc_init(const CostSet& costs, HessianScheme scheme, const InitOptions& options) {
  check_costs(costs);
  const int N = static_cast<int>(costs.size());
  const int n = costs.front()->dim();

  NrcState s;
  s.x = Mat::Zero(N, n);
  s.y = Mat::Zero(N, n);
  s.z = Mat::Zero(N, n * n);
  s.g_lag = Mat::Zero(N, n);
  s.h_lag = Mat::Zero(N, n * n);

  if (options.x0) {
    if (options.x0->rows() != N || options.x0->cols() != n) throw InvalidArgument("x0 must be agents x dim");
    s.x = *options.x0;
  }
  if (options.registers_from_x0) {
    evaluate_all(s.x, costs, scheme, s.g_lag, s.h_lag);
    s.y = s.g_lag;
    s.z = s.h_lag;
  }
  if (options.y_offset) {
    if (options.y_offset->rows() != N || options.y_offset->cols() != n) {
      throw InvalidArgument("y offset must be agents x dim");
    }
    s.y += *options.y_offset;
  }
  if (options.z_offset) {
    if (options.z_offset->rows() != N || options.z_offset->cols() != n * n) {
      throw InvalidArgument("z offset must be agents x dim^2");
    }
    s.z += *options.z_offset;
  }
  return s;
}

FnrcState fnrc_init(const CostSet& costs, HessianScheme scheme, const InitOptions& options) {
  FnrcState s;
  static_cast<NrcState&>(s) = nrc_init(costs, scheme, options);
  s.y_lag = s.y;
  s.z_lag = s.z;
  s.g_lag2 = s.g_lag;
  s.h_lag2 = s.h_lag;
  return s;
}

NrcState nrc_step(const NrcState& state, const ConsensusMatrix& P, const CostSet& costs, const NrcParams& params) {
  check_params(params);
  if (static_cast<int>(costs.size()) != state.agents() || P.size() != state.agents()) {
    throw InvalidArgument("state, consensus matrix and costs disagree on the number of agents");
  }

  NrcState next;
  next.k = state.k + 1;
  const int clamps = update_x(state, next, params);

  // g, h at x(k-1), i.e. the iterate held by `state`.
  Mat g, h;
  evaluate_all(state.x, costs, params.scheme, g, h);

  next.y = P.matrix() * (state.y + g - state.g_lag);
  next.z = P.matrix() * (state.z + h - state.h_lag);
  next.g_lag = std::move(g);
  next.h_lag = std::move(h);
  next.clamps_last_step = clamps;
  next.clamps_total = state.clamps_total + clamps;
  return next;
}

FnrcState fnrc_step(const FnrcState& state, const ConsensusMatrix& P, const CostSet& costs, const NrcParams& params,
                    double phi) {
  check_params(params);
  if (!(phi >= 1.0 && phi < 2.0)) throw InvalidArgument("phi must lie in [1, 2)");
  if (static_cast<int>(costs.size()) != state.agents() || P.size() != state.agents()) {
    throw InvalidArgument("state, consensus matrix and costs disagree on the number of agents");
  }

  FnrcState next;
  next.k = state.k + 1;
  const int clamps = update_x(state, next, params);

  Mat g, h;
  evaluate_all(state.x, costs, params.scheme, g, h);

  const double w1 = 1.0 / phi;
  const double w3 = (1.0 - phi) / phi;
  const Mat y_tilde = state.y + w1 * g - state.g_lag - w3 * state.g_lag2;
  const Mat z_tilde = state.z + w1 * h - state.h_lag - w3 * state.h_lag2;
  next.y = phi * (P.matrix() * y_tilde) + (1.0 - phi) * state.y_lag;
  next.z = phi * (P.matrix() * z_tilde) + (1.0 - phi) * state.z_lag;

  next.y_lag = state.y;
  next.z_lag = state.z;
  next.g_lag2 = state.g_lag;
  next.h_lag2 = state.h_lag;
  next.g_lag = std::move(g);
  next.h_lag = std::move(h);
  next.clamps_last_step = clamps;
  next.clamps_total = state.clamps_total + clamps;
  return next;
}

double fnrc_phi(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidArgument("phi needs a spectral radius in [0, 1)");
  return 2.0 / (1.0 + std::sqrt(1.0 - rho * rho));
}

Vec offset_y(const NrcState& state) { return (state.y - state.g_lag).colwise().mean().transpose(); }

Vec offset_z(const NrcState& state) { return (state.z - state.h_lag).colwise().mean().transpose(); }

}  // namespace nrc
