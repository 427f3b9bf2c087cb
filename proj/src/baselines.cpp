#include "nrc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "nrc/errors.hpp"

namespace nrc {

namespace {

void check_agents(const Mat& x, const CostSet& costs, int graph_size) {
  if (static_cast<int>(costs.size()) != x.rows() || graph_size != x.rows()) {
    throw InvalidArgument("state, graph and costs disagree on the number of agents");
  }
}

}  // namespace

// ---------------------------------------------------------------- DSM

DsmState dsm_init(int agents, int dim) { return DsmState{Mat::Zero(agents, dim), 1}; }

DsmState dsm_step(const DsmState& state, const ConsensusMatrix& P, const CostSet& costs, double step_scale) {
  if (!(step_scale > 0.0)) throw InvalidArgument("DSM step scale must be positive");
  if (state.k < 1) throw InvalidArgument("DSM round index starts at 1");
  check_agents(state.x, costs, P.size());

  const double alpha = step_scale / static_cast<double>(state.k);
  Mat local = state.x;
  for (Eigen::Index i = 0; i < local.rows(); ++i) {
    local.row(i) -= alpha * costs[static_cast<std::size_t>(i)]->gradient(state.x.row(i).transpose()).transpose();
  }
  DsmState next{P.matrix() * local, state.k + 1};
  if (!next.x.allFinite()) throw NumericError("DSM produced non-finite iterates at round " + std::to_string(state.k));
  return next;
}

// ---------------------------------------------------------------- DCM

double dcm_mu_bound(const Graph& g) { return 2.0 / (2.0 * g.max_degree() + 1.0); }

DcmState dcm_init(int agents, int dim) { return DcmState{Mat::Zero(agents, dim), Mat::Zero(agents, dim)}; }

DcmState dcm_step(const DcmState& state, const Graph& g, const CostSet& costs, const DcmParams& params) {
  const double bound = dcm_mu_bound(g);
  if (!(params.mu > 0.0 && params.mu < bound)) {
    throw InvalidArgument("DCM mu must lie in (0, " + std::to_string(bound) + ")");
  }
  if (!(params.nu > 0.0)) throw InvalidArgument("DCM nu must be positive");
  check_agents(state.x, costs, g.size());

  DcmState next{state.x, state.z};
  for (int i = 0; i < g.size(); ++i) {
    Eigen::RowVectorXd dx = Eigen::RowVectorXd::Zero(state.x.cols());
    Eigen::RowVectorXd dz = Eigen::RowVectorXd::Zero(state.x.cols());
    for (int j : g.neighbors(i)) {
      dx += state.x.row(j) - state.x.row(i);
      dz += state.z.row(j) - state.z.row(i);
    }
    const Vec grad = costs[static_cast<std::size_t>(i)]->gradient(state.x.row(i).transpose());
    next.z.row(i) -= params.mu * dx;
    next.x.row(i) += params.mu * dx + params.mu * dz - params.mu * params.nu * grad.transpose();
  }
  if (!next.x.allFinite() || !next.z.allFinite()) throw NumericError("DCM produced non-finite iterates");
  return next;
}

// ---------------------------------------------------------------- ADMM

AdmmState admm_init(const Graph& g, int dim) {
  AdmmState s;
  s.x = Mat::Zero(g.size(), dim);
  for (int i = 0; i < g.size(); ++i) {
    s.z.push_back(Mat::Zero(g.degree(i), dim));
    s.y.push_back(Mat::Zero(g.degree(i), dim));
  }
  return s;
}

namespace {

double lagrangian(const CostFunction& f, const Mat& z_i, const Mat& y_i, double delta, const Vec& x) {
  double total = f.value(x);
  for (Eigen::Index t = 0; t < z_i.rows(); ++t) {
    const Vec r = x - z_i.row(t).transpose();
    total += y_i.row(t).dot(r) + 0.5 * delta * r.squaredNorm();
  }
  return total;
}

}  // namespace

Vec admm_lagrangian_gradient(const CostFunction& f, const Mat& z_i, const Mat& y_i, double delta, const Vec& x) {
  Vec grad = f.gradient(x);
  for (Eigen::Index t = 0; t < z_i.rows(); ++t) {
    grad += y_i.row(t).transpose() + delta * (x - z_i.row(t).transpose());
  }
  return grad;
}

Vec admm_local_argmin(const CostFunction& f, const Mat& z_i, const Mat& y_i, double delta, const Vec& start,
                      const AdmmInnerOptions& options) {
  const auto edges = static_cast<double>(z_i.rows());
  Vec x = start;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vec grad = admm_lagrangian_gradient(f, z_i, y_i, delta, x);
    if (!grad.allFinite()) throw NumericError("non-finite augmented Lagrangian gradient");

    Mat hess = f.hessian(x);
    hess.diagonal().array() += delta * edges;
    Eigen::LLT<Mat> llt(hess);
    if (llt.info() != Eigen::Success) throw NumericError("augmented Lagrangian Hessian not positive definite");
    const Vec step = llt.solve(grad);
    const double scale = 1.0 + x.norm();
    if (step.norm() <= options.tolerance * scale) return x - step;

    const double l0 = lagrangian(f, z_i, y_i, delta, x);
    const double slack = 1e-12 * (1.0 + std::abs(l0));
    double t = 1.0;
    Vec next = x - step;
    bool decreased = false;
    for (int h = 0; h <= options.max_halvings; ++h) {
      const double l1 = lagrangian(f, z_i, y_i, delta, next);
      if (std::isfinite(l1) && l1 <= l0 + slack) {
        decreased = true;
        break;
      }
      t *= 0.5;
      next = x - t * step;
    }
    if (!decreased) break;
    x = next;
  }
  std::ostringstream msg;
  msg << "ADMM local minimization did not converge, |grad L| = " << admm_lagrangian_gradient(f, z_i, y_i, delta, x).norm();
  throw SolverError(msg.str());
}

AdmmState admm_step(const AdmmState& state, const Graph& g, const CostSet& costs, double delta,
                    const AdmmInnerOptions& options) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("ADMM delta must lie in (0, 1)");
  check_agents(state.x, costs, g.size());

  AdmmState next;
  next.x.resize(state.x.rows(), state.x.cols());
  for (int i = 0; i < g.size(); ++i) {
    try {
      next.x.row(i) = admm_local_argmin(*costs[static_cast<std::size_t>(i)], state.z[static_cast<std::size_t>(i)],
                                        state.y[static_cast<std::size_t>(i)], delta, state.x.row(i).transpose(),
                                        options)
                          .transpose();
    } catch (const SolverError& e) {
      throw SolverError("agent " + std::to_string(i) + ": " + e.what());
    }
  }

  next.z = state.z;
  next.y = state.y;
  for (int i = 0; i < g.size(); ++i) {
    const auto& nbrs = g.neighbors(i);
    for (std::size_t t = 0; t < nbrs.size(); ++t) {
      const int j = nbrs[t];
      const auto& back = g.neighbors(j);
      const auto s = static_cast<Eigen::Index>(std::lower_bound(back.begin(), back.end(), i) - back.begin());
      const auto ti = static_cast<Eigen::Index>(t);
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      next.z[ui].row(ti) = (state.y[ui].row(ti) + state.y[uj].row(s)) / (2.0 * delta) +
                           0.5 * (next.x.row(i) + next.x.row(j));
      next.y[ui].row(ti) = state.y[ui].row(ti) + delta * (next.x.row(i) - next.z[ui].row(ti));
    }
  }
  return next;
}

}  // namespace nrc
