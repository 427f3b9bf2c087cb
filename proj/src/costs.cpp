#include "nrc/costs.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "nrc/errors.hpp"
#include "nrc/random.hpp"

namespace nrc {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// 1 / (1 + exp(-t)) without overflow.
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// X^T W X is symmetric only up to rounding; the consensus registers need it exact.
Mat symmetrized(const Mat& H) { return 0.5 * (H + H.transpose()); }

// Design row (chi_j, 1).
Mat with_intercept(const Mat& features) {
  Mat U(features.rows(), features.cols() + 1);
  U.leftCols(features.cols()) = features;
  U.col(features.cols()).setOnes();
  return U;
}

Vec ridge_part(const Vec& x) {
  Vec w = x;
  w(w.size() - 1) = 0.0;
  return w;
}

void check_dim(const Vec& x, int dim) {
  if (x.size() != dim) {
    throw InvalidArgument("cost of dimension " + std::to_string(dim) + " evaluated at a " +
                          std::to_string(x.size()) + "-vector");
  }
}

}  // namespace

// ---------------------------------------------------------------- quadratic

QuadraticCost::QuadraticCost(Mat A, Vec d, double e) : A_(std::move(A)), d_(std::move(d)), e_(e) {
  if (A_.rows() != A_.cols() || A_.rows() != d_.size() || d_.size() == 0) {
    throw InvalidArgument("quadratic cost: A must be square and match d");
  }
  const double scale = std::max(1.0, A_.cwiseAbs().maxCoeff());
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw InvalidArgument("quadratic cost: A not symmetric");
  }
  A_ = symmetrized(A_);
  if (Eigen::LLT<Mat>(A_).info() != Eigen::Success) throw InvalidArgument("quadratic cost: A not positive definite");
}

double QuadraticCost::value(const Vec& x) const {
  check_dim(x, dim());
  const Vec r = x - d_;
  return 0.5 * r.dot(A_ * r) + e_;
}

Vec QuadraticCost::gradient(const Vec& x) const {
  check_dim(x, dim());
  return A_ * (x - d_);
}

Mat QuadraticCost::hessian(const Vec& x) const {
  check_dim(x, dim());
  return A_;
}

std::string QuadraticCost::describe() const { return "quadratic(n=" + std::to_string(dim()) + ")"; }

// ---------------------------------------------------------------- exponential

ExpSumCost::ExpSumCost(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {
  if (!(a > 0 && b > 0 && c > 0 && d > 0)) throw InvalidArgument("exp-sum cost needs positive a, b, c, d");
}

double ExpSumCost::value(const Vec& x) const {
  check_dim(x, 1);
  return c_ * std::exp(a_ * x(0)) + d_ * std::exp(-b_ * x(0));
}

Vec ExpSumCost::gradient(const Vec& x) const {
  check_dim(x, 1);
  return Vec::Constant(1, c_ * a_ * std::exp(a_ * x(0)) - d_ * b_ * std::exp(-b_ * x(0)));
}

Mat ExpSumCost::hessian(const Vec& x) const {
  check_dim(x, 1);
  return Mat::Constant(1, 1, c_ * a_ * a_ * std::exp(a_ * x(0)) + d_ * b_ * b_ * std::exp(-b_ * x(0)));
}

std::string ExpSumCost::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "expsum(a=" << a_ << ",b=" << b_ << ",c=" << c_ << ",d=" << d_ << ")";
  return os.str();
}

// ---------------------------------------------------------------- deviance

BinomialDevianceCost::BinomialDevianceCost(Mat features, Vec labels, double gamma)
    : features_(with_intercept(features)), labels_(std::move(labels)), gamma_(gamma) {
  if (features_.rows() != labels_.size()) throw InvalidArgument("deviance cost: one label per example");
  if (!(gamma >= 0.0)) throw InvalidArgument("deviance cost: gamma must be nonnegative");
  for (Eigen::Index j = 0; j < labels_.size(); ++j) {
    if (labels_(j) != 1.0 && labels_(j) != -1.0) throw InvalidArgument("deviance cost: labels must be -1 or +1");
  }
}

double BinomialDevianceCost::value(const Vec& x) const {
  check_dim(x, dim());
  const Vec margin = labels_.cwiseProduct(features_ * x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < margin.size(); ++j) total += softplus(-margin(j));
  return total + gamma_ * ridge_part(x).squaredNorm();
}

Vec BinomialDevianceCost::gradient(const Vec& x) const {
  check_dim(x, dim());
  const Vec margin = labels_.cwiseProduct(features_ * x);
  Vec weight(margin.size());
  for (Eigen::Index j = 0; j < margin.size(); ++j) weight(j) = -labels_(j) * logistic(-margin(j));
  return features_.transpose() * weight + 2.0 * gamma_ * ridge_part(x);
}

Mat BinomialDevianceCost::hessian(const Vec& x) const {
  check_dim(x, dim());
  const Vec margin = labels_.cwiseProduct(features_ * x);
  Vec weight(margin.size());
  for (Eigen::Index j = 0; j < margin.size(); ++j) weight(j) = logistic(margin(j)) * logistic(-margin(j));
  Mat H = features_.transpose() * weight.asDiagonal() * features_;
  H.diagonal().head(dim() - 1).array() += 2.0 * gamma_;
  return symmetrized(H);
}

std::string BinomialDevianceCost::describe() const {
  return "deviance(examples=" + std::to_string(features_.rows()) + ",n=" + std::to_string(dim()) + ")";
}

// ---------------------------------------------------------------- smooth Huber

SmoothHuberCost::SmoothHuberCost(Mat features, Vec targets, double beta, double gamma)
    : features_(with_intercept(features)), targets_(std::move(targets)), beta_(beta), gamma_(gamma) {
  if (features_.rows() != targets_.size()) throw InvalidArgument("huber cost: one target per example");
  if (!(beta > 0.0)) throw InvalidArgument("huber cost: beta must be positive");
  if (!(gamma >= 0.0)) throw InvalidArgument("huber cost: gamma must be nonnegative");
}

double SmoothHuberCost::loss(double r, double beta) { return r * r / (std::abs(r) + beta); }

double SmoothHuberCost::loss_d1(double r, double beta) {
  const double s = std::abs(r) + beta;
  return r * (std::abs(r) + 2.0 * beta) / (s * s);
}

double SmoothHuberCost::loss_d2(double r, double beta) {
  const double s = std::abs(r) + beta;
  return 2.0 * beta * beta / (s * s * s);
}

Vec SmoothHuberCost::residuals(const Vec& x) const { return targets_ - features_ * x; }

double SmoothHuberCost::value(const Vec& x) const {
  check_dim(x, dim());
  const Vec r = residuals(x);
  double total = 0.0;
  for (Eigen::Index j = 0; j < r.size(); ++j) total += loss(r(j), beta_);
  return total + gamma_ * ridge_part(x).squaredNorm();
}

Vec SmoothHuberCost::gradient(const Vec& x) const {
  check_dim(x, dim());
  const Vec r = residuals(x);
  Vec weight(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) weight(j) = -loss_d1(r(j), beta_);
  return features_.transpose() * weight + 2.0 * gamma_ * ridge_part(x);
}

Mat SmoothHuberCost::hessian(const Vec& x) const {
  check_dim(x, dim());
  const Vec r = residuals(x);
  Vec weight(r.size());
  for (Eigen::Index j = 0; j < r.size(); ++j) weight(j) = loss_d2(r(j), beta_);
  Mat H = features_.transpose() * weight.asDiagonal() * features_;
  H.diagonal().head(dim() - 1).array() += 2.0 * gamma_;
  return symmetrized(H);
}

std::string SmoothHuberCost::describe() const {
  return "smooth-huber(examples=" + std::to_string(features_.rows()) + ",n=" + std::to_string(dim()) + ")";
}

// ---------------------------------------------------------------- schemes

std::string_view to_string(HessianScheme scheme) {
  switch (scheme) {
    case HessianScheme::Newton:
      return "nrc";
    case HessianScheme::Jacobi:
      return "jc";
    case HessianScheme::Gradient:
      return "gdc";
  }
  return "?";
}

HessianScheme parse_scheme(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "nrc") return HessianScheme::Newton;
  if (lower == "jc") return HessianScheme::Jacobi;
  if (lower == "gdc") return HessianScheme::Gradient;
  throw InvalidArgument("unknown Hessian scheme '" + std::string(name) + "' (expected nrc, jc or gdc)");
}

namespace {

Mat surrogate(Mat hessian, HessianScheme scheme) {
  switch (scheme) {
    case HessianScheme::Newton:
      return hessian;
    case HessianScheme::Jacobi:
      return Mat(hessian.diagonal().asDiagonal());
    case HessianScheme::Gradient:
      return Mat::Identity(hessian.rows(), hessian.cols());
  }
  return hessian;
}

}  // namespace

Mat h_of(const CostFunction& f, HessianScheme scheme, const Vec& x) {
  if (scheme == HessianScheme::Gradient) return Mat::Identity(f.dim(), f.dim());
  return surrogate(f.hessian(x), scheme);
}

LocalTerms local_terms(const CostFunction& f, HessianScheme scheme, const Vec& x) {
  LocalTerms out;
  out.h = h_of(f, scheme, x);
  out.g = out.h * x - f.gradient(x);
  if (!out.g.allFinite() || !out.h.allFinite()) throw NumericError("non-finite g/h in " + f.describe());
  return out;
}

Vec g_of(const CostFunction& f, HessianScheme scheme, const Vec& x) { return local_terms(f, scheme, x).g; }

// ---------------------------------------------------------------- oracle

NewtonResult centralized_newton(std::span<const CostPtr> costs, const Vec& x0, const NewtonOptions& options) {
  if (costs.empty()) throw InvalidArgument("centralized Newton needs at least one cost");
  const int n = costs.front()->dim();
  for (const auto& f : costs) {
    if (f->dim() != n) throw InvalidArgument("costs disagree on dimension");
  }
  if (x0.size() != n) throw InvalidArgument("starting point has the wrong dimension");

  const double inv_n = 1.0 / static_cast<double>(costs.size());
  auto average_value = [&](const Vec& x) {
    double total = 0.0;
    for (const auto& f : costs) total += f->value(x);
    return total * inv_n;
  };

  NewtonResult result;
  Vec x = x0;
  int stable = 0;
  std::vector<double> changes;
  for (int it = 1; it <= options.max_iterations; ++it) {
    Vec grad = Vec::Zero(n);
    Mat hess = Mat::Zero(n, n);
    for (const auto& f : costs) {
      grad += f->gradient(x);
      hess += f->hessian(x);
    }
    grad *= inv_n;
    hess *= inv_n;
    if (!grad.allFinite() || !hess.allFinite()) throw NumericError("non-finite derivatives in centralized Newton");

    Eigen::LLT<Mat> llt(hess);
    if (llt.info() != Eigen::Success) {
      throw NumericError("summed Hessian not positive definite at iteration " + std::to_string(it));
    }
    const Vec step = llt.solve(grad);

    const double f0 = average_value(x);
    double t = 1.0;
    Vec next = x - step;
    for (int h = 0; h < options.max_halvings; ++h) {
      const double f1 = average_value(next);
      if (std::isfinite(f1) && f1 <= f0 + 1e-12 * (1.0 + std::abs(f0))) break;
      t *= 0.5;
      next = x - t * step;
    }

    const double change = (next - x).norm() / std::max(x.norm(), 1.0);
    x = next;
    changes.push_back(change);
    stable = change < options.relative_tolerance ? stable + 1 : 0;
    if (stable >= options.stable_steps) {
      result.x = x;
      result.iterations = it;
      result.last_changes.assign(changes.end() - options.stable_steps, changes.end());
      return result;
    }
  }
  throw SolverError("centralized Newton did not converge in " + std::to_string(options.max_iterations) +
                    " iterations");
}

// ---------------------------------------------------------------- finite differences

DerivativeReport finite_difference_check(const CostFunction& f, const Vec& x) {
  const int n = f.dim();
  const double h = 1e-6 * (1.0 + x.norm());
  const Vec grad = f.gradient(x);
  const Mat hess = f.hessian(x);

  DerivativeReport report;
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    const double fd = (f.value(xp) - f.value(xm)) / (2.0 * h);
    report.gradient_error = std::max(report.gradient_error, std::abs(fd - grad(k)) / std::max(std::abs(grad(k)), 1.0));

    const Vec col = (f.gradient(xp) - f.gradient(xm)) / (2.0 * h);
    for (int j = 0; j < n; ++j) {
      report.hessian_error =
          std::max(report.hessian_error, std::abs(col(j) - hess(j, k)) / std::max(std::abs(hess(j, k)), 1.0));
    }
  }
  return report;
}

// ---------------------------------------------------------------- generators

CostSet random_quadratic_costs(int agents, int dim, std::uint64_t seed, double min_eig, double max_eig) {
  if (agents < 1 || dim < 1) throw InvalidArgument("random quadratics need agents >= 1 and dim >= 1");
  if (!(min_eig > 0.0 && max_eig >= min_eig)) throw InvalidArgument("random quadratics need 0 < min_eig <= max_eig");
  Rng rng(seed);
  CostSet costs;
  costs.reserve(static_cast<std::size_t>(agents));
  for (int i = 0; i < agents; ++i) {
    Mat G(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) G(r, c) = rng.uniform(-1.0, 1.0);
    const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
    Vec lambda(dim);
    for (int k = 0; k < dim; ++k) lambda(k) = rng.uniform(min_eig, max_eig);
    Mat A = Q * lambda.asDiagonal() * Q.transpose();
    A = 0.5 * (A + A.transpose());
    Vec d(dim);
    for (int k = 0; k < dim; ++k) d(k) = rng.uniform(-1.0, 1.0);
    costs.push_back(std::make_shared<QuadraticCost>(std::move(A), std::move(d)));
  }
  return costs;
}

CostSet exponential_benchmark_costs(int agents, std::uint64_t seed) {
  if (agents < 1) throw InvalidArgument("need at least one agent");
  Rng rng(seed);
  // 1 - u lies in (0, 1], so every parameter is strictly positive.
  auto draw = [&](double hi) { return hi * (1.0 - rng.uniform()); };
  CostSet costs;
  costs.reserve(static_cast<std::size_t>(agents));
  for (int i = 0; i < agents; ++i) {
    const double a = draw(0.2), b = draw(0.2), c = draw(1.0), d = draw(1.0);
    costs.push_back(std::make_shared<ExpSumCost>(a, b, c, d));
  }
  return costs;
}

}  // namespace nrc
