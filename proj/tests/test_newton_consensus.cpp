#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <memory>

#include "nrc/errors.hpp"
#include "nrc/newton_consensus.hpp"
#include "nrc/random.hpp"

using namespace nrc;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

Vec sum_rows(const Mat& m) { return m.colwise().sum().transpose(); }

Mat stacked_g(const CostSet& costs, HessianScheme scheme, const Mat& x) {
  Mat g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    g.row(i) = g_of(*costs[static_cast<std::size_t>(i)], scheme, x.row(i).transpose()).transpose();
  return g;
}

Mat stacked_h(const CostSet& costs, HessianScheme scheme, const Mat& x) {
  const auto n = x.cols();
  Mat h(x.rows(), n * n);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Mat hi = h_of(*costs[static_cast<std::size_t>(i)], scheme, x.row(i).transpose());
    h.row(i) = Eigen::Map<const Vec>(hi.data(), n * n).transpose();
  }
  return h;
}

double rel_gap(const Vec& a, const Vec& b) { return (a - b).norm() / (1.0 + b.norm()); }

}  // namespace

TEST_CASE("clamp_c") {
  const ClampResult same = clamp_c(0.7 * Mat::Identity(3, 3), 0.7);
  CHECK(same.matrix == 0.7 * Mat::Identity(3, 3));
  CHECK_FALSE(same.activated);

  const ClampResult scalar = clamp_c(Mat::Constant(1, 1, 0.1), 1.0);
  CHECK(scalar.matrix(0, 0) == 0.5);
  CHECK(scalar.activated);

  const ClampResult whole = clamp_c(diag2(2.0, 0.1), 1.0);
  CHECK(whole.matrix == diag2(0.5, 0.5));
  CHECK(whole.activated);

  // Exactly at the boundary c/2 passes.
  CHECK_FALSE(clamp_c(diag2(0.5, 3.0), 1.0).activated);

  Mat asym = diag2(1, 1);
  asym(0, 1) = 1e-6;
  CHECK_THROWS_AS(clamp_c(asym, 1.0), InvalidArgument);
  CHECK_THROWS_AS(clamp_c(diag2(1, 1), 0.0), InvalidArgument);
}

TEST_CASE("nrc_init") {
  const auto costs = random_quadratic_costs(5, 2, 1);

  SUBCASE("default start is all zeros") {
    const NrcState s = nrc_init(costs, HessianScheme::Newton);
    CHECK(s.k == 0);
    for (const Mat* m : {&s.x, &s.y, &s.z, &s.g_lag, &s.h_lag}) CHECK(m->isZero(0.0));
    CHECK(s.z.cols() == 4);
    CHECK(offset_y(s).isZero(0.0));
  }
  SUBCASE("uniform perturbation gives the requested offsets") {
    Vec xi_y(2);
    xi_y << 0.01, -0.02;
    Mat xi_z(2, 2);
    xi_z << 0.03, 0.001, 0.001, -0.01;
    const NrcState s = nrc_init(costs, HessianScheme::Newton, InitOptions::uniform_perturbation(5, xi_y, xi_z));
    CHECK((offset_y(s) - xi_y).norm() < 1e-15);
    CHECK((offset_z(s) - Eigen::Map<const Vec>(xi_z.data(), 4)).norm() < 1e-15);
    CHECK((sum_rows(s.y - s.g_lag) - 5.0 * xi_y).norm() < 1e-14);
  }
  SUBCASE("registers loaded from x0 keep the offsets at zero") {
    InitOptions opts;
    opts.x0 = Mat::Constant(5, 2, 1.5);
    opts.registers_from_x0 = true;
    const NrcState s = nrc_init(costs, HessianScheme::Newton, opts);
    CHECK(offset_y(s).norm() < 1e-15);
    CHECK(offset_z(s).norm() < 1e-15);
    CHECK(s.y == s.g_lag);
    CHECK(s.x == *opts.x0);
  }
  SUBCASE("dimension mismatch") {
    InitOptions opts;
    opts.x0 = Mat::Zero(4, 2);
    CHECK_THROWS_AS(nrc_init(costs, HessianScheme::Newton, opts), InvalidArgument);
    CHECK_THROWS_AS(nrc_init(CostSet{}, HessianScheme::Newton), InvalidArgument);
  }
}

TEST_CASE("single agent quadratic reaches d after two rounds") {
  const CostSet costs{std::make_shared<QuadraticCost>(Mat::Identity(1, 1), Vec::Constant(1, 0.8))};
  const ConsensusMatrix P(Mat::Identity(1, 1), Graph(1, {}));
  NrcState s = nrc_init(costs, HessianScheme::Newton);
  for (int k = 1; k <= 5; ++k) {
    s = nrc_step(s, P, costs, NrcParams{1.0, 1e-3, HessianScheme::Newton});
    if (k >= 2) CHECK(s.x(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  }
  CHECK(s.k == 5);
}

TEST_CASE("quadratic network follows the reduced recursion") {
  // Oracle written directly from the reduced form: y(k+1) = P y(k),
  // z(k+1) = P z(k), x(k+1) = z_i(k)^{-1} y_i(k), from y(1) = P A_i d_i, z(1) = P A_i.
  const int N = 12;
  const int n = 3;
  const auto costs = random_quadratic_costs(N, n, 4);
  const ConsensusMatrix P = paper_ring_matrix(N);
  Mat y(N, n);
  Mat z(N, n * n);
  for (int i = 0; i < N; ++i) {
    const auto& q = dynamic_cast<const QuadraticCost&>(*costs[static_cast<std::size_t>(i)]);
    y.row(i) = (q.A() * q.d()).transpose();
    z.row(i) = Eigen::Map<const Vec>(q.A().data(), n * n).transpose();
  }
  y = P.matrix() * y;
  z = P.matrix() * z;

  NrcState s = nrc_init(costs, HessianScheme::Newton);
  s = nrc_step(s, P, costs, NrcParams{});
  CHECK(s.x.isZero(0.0));
  double worst = 0.0;
  for (int k = 2; k <= 100; ++k) {
    Mat x_ref(N, n);
    for (int i = 0; i < N; ++i) {
      const Mat zi = Eigen::Map<const Mat>(z.row(i).eval().data(), n, n);
      x_ref.row(i) = zi.llt().solve(y.row(i).transpose()).transpose();
    }
    y = P.matrix() * y;
    z = P.matrix() * z;
    s = nrc_step(s, P, costs, NrcParams{});
    CHECK(s.clamps_last_step == 0);
    worst = std::max(worst, (s.x - x_ref).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("epsilon = 0 freezes x while y and z consense") {
  const int N = 8;
  const auto costs = exponential_benchmark_costs(N, 2);
  const ConsensusMatrix P = paper_ring_matrix(N);
  InitOptions opts;
  Mat x0(N, 1);
  for (int i = 0; i < N; ++i) x0(i, 0) = 0.1 * i;
  opts.x0 = x0;
  opts.registers_from_x0 = true;
  NrcState s = nrc_init(costs, HessianScheme::Newton, opts);
  const Mat g0 = stacked_g(costs, HessianScheme::Newton, x0);
  for (int k = 0; k < 3000; ++k) s = nrc_step(s, P, costs, NrcParams{0.0, 1e-3, HessianScheme::Newton});
  CHECK(s.x == x0);
  const double mean_g = g0.mean();
  CHECK((s.y.array() - mean_g).abs().maxCoeff() < 1e-10);
}

TEST_CASE("parameter validation") {
  const auto costs = random_quadratic_costs(3, 2, 1);
  const ConsensusMatrix P = paper_ring_matrix(3);
  const NrcState s = nrc_init(costs, HessianScheme::Newton);
  CHECK_THROWS_AS(nrc_step(s, P, costs, NrcParams{1.5, 1e-3, HessianScheme::Newton}), InvalidArgument);
  CHECK_THROWS_AS(nrc_step(s, P, costs, NrcParams{0.5, 0.0, HessianScheme::Newton}), InvalidArgument);
  CHECK_THROWS_AS(nrc_step(s, paper_ring_matrix(4), costs, NrcParams{}), InvalidArgument);
  const FnrcState f = fnrc_init(costs, HessianScheme::Newton);
  CHECK_THROWS_AS(fnrc_step(f, P, costs, NrcParams{}, 2.0), InvalidArgument);
  CHECK_THROWS_AS(fnrc_step(f, P, costs, NrcParams{}, 0.9), InvalidArgument);
}

TEST_CASE("FNRC with phi = 1 is NRC") {
  const int N = 10;
  const auto costs = exponential_benchmark_costs(N, 7);
  const ConsensusMatrix P = paper_ring_matrix(N);
  const NrcParams params{0.2, 1e-3, HessianScheme::Newton};
  NrcState a = nrc_init(costs, params.scheme);
  FnrcState b = fnrc_init(costs, params.scheme);
  for (int k = 0; k < 200; ++k) {
    a = nrc_step(a, P, costs, params);
    b = fnrc_step(b, P, costs, params, 1.0);
    REQUIRE((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("tracking identity every round") {
  const int N = 15;
  const ConsensusMatrix P = paper_ring_matrix(N);
  for (HessianScheme scheme : {HessianScheme::Newton, HessianScheme::Jacobi, HessianScheme::Gradient}) {
    const auto costs = random_quadratic_costs(N, 2, 12);
    const NrcParams params{0.1, 1e-3, scheme};
    NrcState a = nrc_init(costs, scheme);
    FnrcState b = fnrc_init(costs, scheme);
    const double phi = fnrc_phi(P.rho());
    for (int k = 1; k <= 300; ++k) {
      const Mat ga = stacked_g(costs, scheme, a.x);
      const Mat ha = stacked_h(costs, scheme, a.x);
      const Mat gb = stacked_g(costs, scheme, b.x);
      a = nrc_step(a, P, costs, params);
      b = fnrc_step(b, P, costs, params, phi);
      REQUIRE(rel_gap(sum_rows(a.y), sum_rows(ga)) <= 1e-9);
      REQUIRE(rel_gap(sum_rows(a.z), sum_rows(ha)) <= 1e-9);
      REQUIRE(rel_gap(sum_rows(b.y), sum_rows(gb)) <= 1e-9);
    }
  }
}

TEST_CASE("FNRC on quadratics keeps sum y at sum A_i d_i") {
  const int N = 9;
  const auto costs = random_quadratic_costs(N, 2, 30);
  const ConsensusMatrix P = paper_ring_matrix(N);
  Vec target = Vec::Zero(2);
  for (const auto& f : costs) {
    const auto& q = dynamic_cast<const QuadraticCost&>(*f);
    target += q.A() * q.d();
  }
  FnrcState s = fnrc_init(costs, HessianScheme::Newton);
  for (int k = 1; k <= 100; ++k) {
    s = fnrc_step(s, P, costs, NrcParams{}, fnrc_phi(P.rho()));
    CHECK(rel_gap(sum_rows(s.y), target) <= 1e-12);
  }
}

TEST_CASE("z stays symmetric") {
  const int N = 6;
  Rng rng(8);
  CostSet costs;
  for (int i = 0; i < N; ++i) {
    Mat X(5, 2);
    Vec y(5);
    for (int r = 0; r < 5; ++r) {
      X(r, 0) = rng.uniform(-1, 1);
      X(r, 1) = rng.uniform(-1, 1);
      y(r) = rng.uniform() < 0.5 ? -1 : 1;
    }
    costs.push_back(std::make_shared<BinomialDevianceCost>(X, y, 0.5));
  }
  const ConsensusMatrix P = metropolis_matrix(ring_graph(N));
  NrcState s = nrc_init(costs, HessianScheme::Newton);
  for (int k = 0; k < 50; ++k) {
    s = nrc_step(s, P, costs, NrcParams{});
    for (int i = 0; i < N; ++i) {
      const Mat zi = s.z_of(i);
      CHECK((zi - zi.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("clamp activations are counted") {
  const auto costs = exponential_benchmark_costs(5, 1);
  const ConsensusMatrix P = paper_ring_matrix(5);
  NrcState s = nrc_init(costs, HessianScheme::Newton);
  s = nrc_step(s, P, costs, NrcParams{});
  // z(0) = 0 sits below c/2 for every agent in the first round.
  CHECK(s.clamps_last_step == 5);
  CHECK(s.clamps_total == 5);
}

TEST_CASE("fnrc_phi") {
  CHECK(fnrc_phi(0.0) == 1.0);
  CHECK(fnrc_phi(0.9338) == doctest::Approx(1.4730).epsilon(1e-4));
  double prev = fnrc_phi(0.0);
  for (int i = 1; i < 1000; ++i) {
    const double phi = fnrc_phi(i / 1000.0);
    CHECK(phi > prev);
    CHECK(phi < 2.0);
    prev = phi;
  }
  CHECK_THROWS_AS(fnrc_phi(1.0), InvalidArgument);
  CHECK_THROWS_AS(fnrc_phi(-0.1), InvalidArgument);
}

TEST_CASE("steps are pure") {
  const auto costs = random_quadratic_costs(4, 2, 3);
  const ConsensusMatrix P = paper_ring_matrix(4);
  const NrcState s0 = nrc_step(nrc_init(costs, HessianScheme::Newton), P, costs, NrcParams{});
  const NrcState a = nrc_step(s0, P, costs, NrcParams{});
  const NrcState b = nrc_step(s0, P, costs, NrcParams{});
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.z == b.z);
  CHECK(s0.k == 1);
}
