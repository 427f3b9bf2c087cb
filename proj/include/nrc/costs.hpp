#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nrc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A twice-differentiable local cost f_i with analytic derivatives.
/// Implementations are immutable and safe to evaluate concurrently.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual int dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual Vec gradient(const Vec& x) const = 0;
  virtual Mat hessian(const Vec& x) const = 0;
  /// Short human-readable tag used in run metadata.
  virtual std::string describe() const = 0;
};

using CostPtr = std::shared_ptr<const CostFunction>;
using CostSet = std::vector<CostPtr>;

/// f(x) = 1/2 (x - d)^T A (x - d) + e with A symmetric positive definite.
class QuadraticCost final : public CostFunction {
 public:
  QuadraticCost(Mat A, Vec d, double e = 0.0);

  int dim() const override { return static_cast<int>(d_.size()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string describe() const override;

  const Mat& A() const { return A_; }
  const Vec& d() const { return d_; }

 private:
  Mat A_;
  Vec d_;
  double e_;
};

/// Scalar f(x) = c exp(a x) + d exp(-b x); strictly convex for positive a, b, c, d.
class ExpSumCost final : public CostFunction {
 public:
  ExpSumCost(double a, double b, double c, double d);

  int dim() const override { return 1; }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string describe() const override;

 private:
  double a_, b_, c_, d_;
};

/// Ridge-regularized logistic loss on labeled examples.
///
/// The parameter is x = (w, b): `w` has one entry per feature column and the
/// intercept `b` sits in the last slot. The ridge term gamma*|w|^2 leaves the
/// intercept alone.
class BinomialDevianceCost final : public CostFunction {
 public:
  /// `features` is examples x features, `labels` entries must be -1 or +1.
  BinomialDevianceCost(Mat features, Vec labels, double gamma);

  int dim() const override { return static_cast<int>(features_.cols()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string describe() const override;

  Eigen::Index examples() const { return features_.rows(); }

 private:
  Mat features_;  ///< examples x (features + 1), last column all ones
  Vec labels_;
  double gamma_;
};

/// Robust regression with the C^2 loss r^2 / (|r| + beta), r = y - w.chi - b,
/// plus gamma*|w|^2. Same (w, b) layout as BinomialDevianceCost.
class SmoothHuberCost final : public CostFunction {
 public:
  SmoothHuberCost(Mat features, Vec targets, double beta, double gamma);

  int dim() const override { return static_cast<int>(features_.cols()); }
  double value(const Vec& x) const override;
  Vec gradient(const Vec& x) const override;
  Mat hessian(const Vec& x) const override;
  std::string describe() const override;

  Eigen::Index examples() const { return features_.rows(); }

  // Per-residual loss and its first two derivatives.
  static double loss(double r, double beta);
  static double loss_d1(double r, double beta);
  static double loss_d2(double r, double beta);

 private:
  Vec residuals(const Vec& x) const;

  Mat features_;  ///< with the intercept column, as above
  Vec targets_;
  double beta_;
  double gamma_;
};

/// Hessian surrogate h_i used by the consensus algorithms.
enum class HessianScheme {
  Newton,    ///< h = full Hessian (NRC)
  Jacobi,    ///< h = diagonal of the Hessian (JC)
  Gradient,  ///< h = identity (GDC)
};

std::string_view to_string(HessianScheme scheme);
/// Accepts "nrc", "jc", "gdc" (case-insensitive).
HessianScheme parse_scheme(std::string_view name);

/// h(x) according to `scheme`.
Mat h_of(const CostFunction& f, HessianScheme scheme, const Vec& x);

/// g(x) = h(x) x - grad f(x). Throws NumericError on non-finite results.
Vec g_of(const CostFunction& f, HessianScheme scheme, const Vec& x);

struct LocalTerms {
  Vec g;
  Mat h;
};

/// g and h together, evaluating the Hessian once.
LocalTerms local_terms(const CostFunction& f, HessianScheme scheme, const Vec& x);

struct NewtonOptions {
  int max_iterations = 10000;
  double relative_tolerance = 1e-11;  ///< |x_{k+1}-x_k| / max(|x_k|, 1)
  int stable_steps = 5;               ///< consecutive steps under tolerance
  int max_halvings = 30;
};

struct NewtonResult {
  Vec x;
  int iterations = 0;
  std::vector<double> last_changes;  ///< relative changes of the final `stable_steps` steps
};

/// Centralized damped Newton on the average cost (1/N) sum_i f_i, used as
/// the ground-truth optimum. Throws NumericError if the summed Hessian is not
/// positive definite at an iterate and SolverError if the cap is hit.
NewtonResult centralized_newton(std::span<const CostPtr> costs, const Vec& x0, const NewtonOptions& options = {});

struct DerivativeReport {
  double gradient_error = 0.0;  ///< worst component |fd - analytic| / max(|analytic|, 1)
  double hessian_error = 0.0;
};

/// Central differences with step 1e-6 * (1 + |x|).
DerivativeReport finite_difference_check(const CostFunction& f, const Vec& x);

/// Random SPD quadratics: A = Q diag(lambda) Q^T with eigenvalues in
/// [min_eig, max_eig], d uniform on [-1, 1]^dim.
CostSet random_quadratic_costs(int agents, int dim, std::uint64_t seed, double min_eig = 0.5,
                               double max_eig = 2.0);

/// Exponential benchmark costs with a, b ~ U(0, 0.2) and c, d ~ U(0, 1).
CostSet exponential_benchmark_costs(int agents, std::uint64_t seed);

}  // namespace nrc
