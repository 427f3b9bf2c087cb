#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "nrc/baselines.hpp"
#include "nrc/errors.hpp"

using namespace nrc;

namespace {

CostSet scalar_quadratics(std::initializer_list<std::pair<double, double>> ad) {
  CostSet out;
  for (auto [a, d] : ad) out.push_back(std::make_shared<QuadraticCost>(Mat::Constant(1, 1, a), Vec::Constant(1, d)));
  return out;
}

Vec quadratic_optimum(const CostSet& costs) {
  const int n = costs.front()->dim();
  Mat A = Mat::Zero(n, n);
  Vec b = Vec::Zero(n);
  for (const auto& f : costs) {
    const auto& q = dynamic_cast<const QuadraticCost&>(*f);
    A += q.A();
    b += q.A() * q.d();
  }
  return A.llt().solve(b);
}

}  // namespace

TEST_CASE("DSM first rounds by hand") {
  // Two agents, f_0 = (x - 1)^2 / 2, f_1 = (x - 3)^2 / 2, P all 1/2.
  const Graph g(2, {{0, 1}});
  const ConsensusMatrix P = metropolis_matrix(g);
  const CostSet costs = scalar_quadratics({{1.0, 1.0}, {1.0, 3.0}});
  DsmState s = dsm_init(2, 1);
  CHECK(s.k == 1);

  // k = 1, step 0.5: locals 0 - 0.5 (0 - 1) = 0.5 and 1.5, averaged to 1.
  s = dsm_step(s, P, costs, 0.5);
  CHECK(s.k == 2);
  CHECK(s.x(0, 0) == doctest::Approx(1.0));
  CHECK(s.x(1, 0) == doctest::Approx(1.0));

  // k = 2, step 0.25: locals 1 and 1.5, averaged to 1.25.
  s = dsm_step(s, P, costs, 0.5);
  CHECK(s.x(0, 0) == doctest::Approx(1.25));
  CHECK(s.x(1, 0) == doctest::Approx(1.25));

  CHECK_THROWS_AS(dsm_step(s, P, costs, 0.0), InvalidArgument);
  CHECK_THROWS_AS(dsm_step(DsmState{Mat::Zero(2, 1), 0}, P, costs, 1.0), InvalidArgument);
}

TEST_CASE("DSM approaches the optimum") {
  const Graph g = ring_graph(8);
  const ConsensusMatrix P = metropolis_matrix(g);
  const CostSet costs = random_quadratic_costs(8, 2, 5);
  const Vec x_star = quadratic_optimum(costs);
  DsmState s = dsm_init(8, 2);
  for (int k = 0; k < 20000; ++k) s = dsm_step(s, P, costs, 0.5);
  for (int i = 0; i < 8; ++i) CHECK((s.x.row(i).transpose() - x_star).norm() < 0.05);
}

TEST_CASE("dcm_mu_bound") {
  CHECK(dcm_mu_bound(ring_graph(30)) == doctest::Approx(0.4));
  CHECK(dcm_mu_bound(Graph(4, {{0, 1}, {0, 2}, {0, 3}})) == doctest::Approx(2.0 / 7.0));
}

TEST_CASE("DCM keeps sum z at zero and converges to the optimum") {
  const Graph g = ring_graph(6);
  const CostSet costs = random_quadratic_costs(6, 2, 9);
  const Vec x_star = quadratic_optimum(costs);
  DcmState s = dcm_init(6, 2);
  const DcmParams params{0.2, 1.7};
  for (int k = 0; k < 20000; ++k) {
    s = dcm_step(s, g, costs, params);
    REQUIRE(s.z.colwise().sum().norm() <= 1e-10);
  }
  for (int i = 0; i < 6; ++i) CHECK((s.x.row(i).transpose() - x_star).norm() < 1e-8);
}

TEST_CASE("DCM fixed point") {
  // At x_i = x*, z is stationary exactly and x stays put when the z
  // differences balance nu * grad f_i(x*).
  const Graph g(2, {{0, 1}});
  const CostSet costs = scalar_quadratics({{1.0, 1.0}, {1.0, 3.0}});
  const double nu = 1.7;
  DcmState s = dcm_init(2, 1);
  s.x.setConstant(2.0);
  // grad f_0(2) = 1, grad f_1(2) = -1: z_1 - z_0 = nu.
  s.z(0, 0) = -nu / 2;
  s.z(1, 0) = nu / 2;
  const DcmState next = dcm_step(s, g, costs, DcmParams{0.3, nu});
  CHECK(next.x(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(next.x(1, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(next.z == s.z);
}

TEST_CASE("DCM parameter checks") {
  const Graph g = ring_graph(5);
  const CostSet costs = random_quadratic_costs(5, 1, 1);
  const DcmState s = dcm_init(5, 1);
  CHECK_THROWS_AS(dcm_step(s, g, costs, DcmParams{0.4, 1.7}), InvalidArgument);
  CHECK_THROWS_AS(dcm_step(s, g, costs, DcmParams{0.0, 1.7}), InvalidArgument);
  CHECK_THROWS_AS(dcm_step(s, g, costs, DcmParams{0.1, 0.0}), InvalidArgument);
  CHECK_NOTHROW(dcm_step(s, g, costs, DcmParams{0.399, 1.7}));
}

TEST_CASE("ADMM inner solve matches the closed form on quadratics") {
  const CostSet costs = random_quadratic_costs(1, 3, 21);
  const auto& q = dynamic_cast<const QuadraticCost&>(*costs[0]);
  Mat z(2, 3), y(2, 3);
  z << 0.1, -0.4, 2.0, 1.0, 0.0, -1.0;
  y << 0.3, 0.2, -0.1, -0.5, 0.0, 0.25;
  const double delta = 0.7;
  // (A + delta |E_i| I) x = A d - sum_t y_t + delta sum_t z_t
  const Mat lhs = q.A() + 2.0 * delta * Mat::Identity(3, 3);
  const Vec rhs = q.A() * q.d() - y.colwise().sum().transpose() + delta * z.colwise().sum().transpose();
  const Vec expected = lhs.llt().solve(rhs);
  const Vec got = admm_local_argmin(q, z, y, delta, Vec::Constant(3, 5.0));
  CHECK((got - expected).norm() < 1e-12);
  CHECK(admm_lagrangian_gradient(q, z, y, delta, got).norm() < 1e-10);
}

TEST_CASE("ADMM inner solve on a nonlinear cost") {
  const CostSet costs = exponential_benchmark_costs(1, 3);
  Mat z(1, 1), y(1, 1);
  z << 0.4;
  y << -0.2;
  const Vec x = admm_local_argmin(*costs[0], z, y, 0.5, Vec::Zero(1));
  CHECK(std::abs(admm_lagrangian_gradient(*costs[0], z, y, 0.5, x)(0)) < 1e-8);

  AdmmInnerOptions tight;
  tight.max_iterations = 0;
  CHECK_THROWS_AS(admm_local_argmin(*costs[0], z, y, 0.5, Vec::Zero(1), tight), SolverError);
}

TEST_CASE("ADMM edge variables") {
  const Graph g = ring_graph(5);
  const CostSet costs = random_quadratic_costs(5, 2, 2);
  AdmmState s = admm_init(g, 2);
  for (int i = 0; i < 5; ++i) {
    CHECK(s.z[static_cast<std::size_t>(i)].rows() == 2);
    CHECK(s.y[static_cast<std::size_t>(i)].isZero(0.0));
  }
  for (int k = 0; k < 5; ++k) {
    s = admm_step(s, g, costs, 0.5);
    for (int i = 0; i < 5; ++i) {
      const auto& nbrs = g.neighbors(i);
      for (std::size_t t = 0; t < nbrs.size(); ++t) {
        const int j = nbrs[t];
        const auto& back = g.neighbors(j);
        const auto r = static_cast<Eigen::Index>(std::find(back.begin(), back.end(), i) - back.begin());
        const auto ti = static_cast<Eigen::Index>(t);
        const auto ui = static_cast<std::size_t>(i);
        const auto uj = static_cast<std::size_t>(j);
        // Both ends agree on z, it sits at the midpoint, and the duals cancel.
        CHECK((s.z[ui].row(ti) - s.z[uj].row(r)).norm() < 1e-12);
        CHECK((s.z[ui].row(ti) - 0.5 * (s.x.row(i) + s.x.row(j))).norm() < 1e-12);
        CHECK((s.y[ui].row(ti) + s.y[uj].row(r)).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("ADMM leaves y unchanged at consensus on the optimum") {
  const Graph g(2, {{0, 1}});
  const CostSet costs = scalar_quadratics({{1.0, 1.0}, {1.0, 3.0}});
  AdmmState s = admm_init(g, 1);
  s.x.setConstant(2.0);
  s.z[0](0, 0) = 2.0;
  s.z[1](0, 0) = 2.0;
  // Stationarity of agent 0: (2 - 1) + y = 0.
  s.y[0](0, 0) = -1.0;
  s.y[1](0, 0) = 1.0;
  const AdmmState next = admm_step(s, g, costs, 0.5);
  CHECK(next.x(0, 0) == doctest::Approx(2.0));
  CHECK(next.x(1, 0) == doctest::Approx(2.0));
  CHECK(next.y[0](0, 0) == doctest::Approx(-1.0));
  CHECK(next.y[1](0, 0) == doctest::Approx(1.0));
}

TEST_CASE("ADMM converges to the optimum") {
  const Graph g = ring_graph(6);
  const CostSet costs = random_quadratic_costs(6, 2, 13);
  const Vec x_star = quadratic_optimum(costs);
  AdmmState s = admm_init(g, 2);
  for (int k = 0; k < 2000; ++k) s = admm_step(s, g, costs, 0.5);
  for (int i = 0; i < 6; ++i) CHECK((s.x.row(i).transpose() - x_star).norm() < 1e-8);
  CHECK_THROWS_AS(admm_step(s, g, costs, 1.0), InvalidArgument);
  CHECK_THROWS_AS(admm_step(s, g, costs, 0.0), InvalidArgument);
}
