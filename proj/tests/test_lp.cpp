#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "strata/linsys.hpp"
#include "strata/lp.hpp"

using namespace strata;

TEST_CASE("textbook minimum") {
  StandardLP lp;
  lp.M = Matrix::Ones(1, 2);
  lp.b = Vector::Ones(1);
  lp.c.resize(2);
  lp.c << 1.0, 0.0;
  LPResult res = solve(lp);
  REQUIRE(res.status == LPStatus::optimal);
  CHECK(res.value == doctest::Approx(0.0));
  CHECK(res.solution[0] == doctest::Approx(0.0));
  CHECK(res.solution[1] == doctest::Approx(1.0));
  CHECK(res.dual.size() == 1);
  CHECK(res.dual.dot(lp.b) == doctest::Approx(res.value));
}

TEST_CASE("infeasible system yields a certificate") {
  StandardLP lp;
  lp.M.resize(1, 1);
  lp.M << 1.0;
  lp.b.resize(1);
  lp.b << -1.0;
  lp.c = Vector::Zero(1);
  LPResult res = solve(lp);
  REQUIRE(res.status == LPStatus::infeasible);
  // Farkas: y'M <= 0 and y'b > 0
  Vector yM = lp.M.transpose() * res.dual;
  CHECK(yM.maxCoeff() <= 1e-9);
  CHECK(res.dual.dot(lp.b) > 1e-9);
}

TEST_CASE("unbounded direction is detected") {
  StandardLP lp;
  lp.M.resize(1, 2);
  lp.M << 0.0, 1.0;
  lp.b = Vector::Ones(1);
  lp.c.resize(2);
  lp.c << -1.0, 0.0;
  LPResult res = solve(lp);
  CHECK(res.status == LPStatus::unbounded);
}

TEST_CASE("max sense mirrors min") {
  StandardLP lp;
  lp.M = Matrix::Ones(1, 2);
  lp.b = Vector::Ones(1);
  lp.c.resize(2);
  lp.c << 1.0, 3.0;
  lp.sense = Sense::max;
  LPResult res = solve(lp);
  REQUIRE(res.status == LPStatus::optimal);
  CHECK(res.value == doctest::Approx(3.0));
  CHECK(res.dual.dot(lp.b) == doctest::Approx(res.value));
}

TEST_CASE("deterministic pivoting") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  StandardLP lp;
  lp.M.resize(4, 9);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 9; ++j) lp.M(i, j) = unif(gen);
  lp.b = lp.M * Vector::Constant(9, 0.3);
  lp.c.resize(9);
  for (Index j = 0; j < 9; ++j) lp.c[j] = unif(gen) - 0.5;
  LPResult a = solve(lp);
  LPResult b = solve(lp);
  REQUIRE(a.status == LPStatus::optimal);
  CHECK(a.value == b.value);
  CHECK(a.iterations == b.iterations);
  CHECK((a.solution - b.solution).norm() == 0.0);
}

TEST_CASE("strong duality holds on random feasible instances") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Index m = 3 + trial % 4, n = m + 2 + trial % 5;
    StandardLP lp;
    lp.M.resize(m, n);
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) lp.M(i, j) = unif(gen);
    Vector x0(n);
    for (Index j = 0; j < n; ++j) x0[j] = unif(gen);
    lp.b = lp.M * x0; // feasible by construction
    lp.c.resize(n);
    for (Index j = 0; j < n; ++j) lp.c[j] = unif(gen) - 0.2;
    LPResult res = solve(lp);
    REQUIRE(res.status == LPStatus::optimal);
    CHECK((lp.M * res.solution - lp.b).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(res.solution.minCoeff() >= -1e-12);
    CHECK(std::abs(res.dual.dot(lp.b) - res.value) <= 1e-9 * (1.0 + std::abs(res.value)));
    // dual feasibility of the minimization: c - M'y >= 0
    CHECK((lp.c - lp.M.transpose() * res.dual).minCoeff() >= -1e-8);
  }
}

TEST_CASE("binary-instrument effect bound matches the published envelope") {
  Support s = Support::integers(2, 2, 2);
  std::vector<std::int64_t> all(16);
  for (std::int64_t i = 0; i < 16; ++i) all[i] = i;
  StrataModel model = StrataModel::from_indices(s, all);
  StratumSpec cond;
  cond.all = true;
  ParameterSpec ate = standard_parameters("ate_contrast", 1, 0, cond);
  SystemMatrix sys = build_A(model, ate, 0.0, true);
  MaterializedParameter mat = materialize(ate, model);

  auto gen = oracle::rng(29);
  for (int trial = 0; trial < 60; ++trial) {
    ObservedDistribution p =
        oracle::observed_from_latent(model, oracle::random_latent(model, gen));
    StandardLP lp;
    lp.M = sys.A0();
    lp.b = beta0_from_observed(p, sys);
    lp.c.resize(sys.cols());
    for (Index j = 0; j < sys.cols(); ++j) lp.c[j] = mat.g_values[j];
    LPResult res = solve(lp);
    REQUIRE(res.status == LPStatus::optimal);
    CHECK(res.value == doctest::Approx(oracle::balke_pearl_ate_lower(p)).epsilon(1e-7));
  }
}

TEST_CASE("general-form wrapper handles free variables and inequalities") {
  // max x - y subject to x <= 3, -x + y <= 1, x free, y >= 0
  InequalityLP lp;
  lp.sense = Sense::max;
  lp.c.resize(2);
  lp.c << 1.0, -1.0;
  lp.A_eq.resize(0, 2);
  lp.b_eq.resize(0);
  lp.A_le.resize(2, 2);
  lp.A_le << 1.0, 0.0, -1.0, 1.0;
  lp.b_le.resize(2);
  lp.b_le << 3.0, 1.0;
  lp.nonneg = {0, 1};
  LPResult res = solve(lp);
  REQUIRE(res.status == LPStatus::optimal);
  CHECK(res.value == doctest::Approx(3.0));
  CHECK(res.solution[0] == doctest::Approx(3.0));

  // drop the x cap: unbounded
  InequalityLP ub = lp;
  ub.A_le = Matrix(1, 2);
  ub.A_le << -1.0, 1.0;
  ub.b_le = Vector::Ones(1);
  CHECK(solve(ub).status == LPStatus::unbounded);

  // negative lower-bounded optimum through the free split
  InequalityLP neg;
  neg.sense = Sense::min;
  neg.c = Vector::Ones(1);
  neg.A_eq.resize(0, 1);
  neg.b_eq.resize(0);
  neg.A_le.resize(1, 1);
  neg.A_le << -1.0;
  neg.b_le = Vector::Constant(1, 2.0); // -x <= 2, i.e. x >= -2
  neg.nonneg = {0};
  LPResult nres = solve(neg);
  REQUIRE(nres.status == LPStatus::optimal);
  CHECK(nres.value == doctest::Approx(-2.0));
  CHECK(nres.solution[0] == doctest::Approx(-2.0));
}

TEST_CASE("dimension mismatches are rejected") {
  StandardLP lp;
  lp.M = Matrix::Ones(2, 3);
  lp.b = Vector::Ones(1);
  lp.c = Vector::Zero(3);
  CHECK_THROWS_AS(solve(lp), std::invalid_argument);
}
