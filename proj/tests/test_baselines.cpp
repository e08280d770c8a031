#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "oracles.hpp"
#include "saif/baselines.hpp"
#include "saif/data_io.hpp"

using namespace saif;
using Catch::Approx;

namespace {
Problem make_problem(Eigen::Index n, Eigen::Index p, double ratio,
                     std::uint64_t seed, LossKind loss = LossKind::squared) {
  DeterministicRng rng(seed);
  Matrix X(n, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < n; ++j) X(j, i) = rng.normal();
  Vector y(n);
  if (loss == LossKind::logistic) {
    for (Eigen::Index j = 0; j < n; ++j) y[j] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  } else {
    Vector bt = Vector::Zero(p);
    for (Eigen::Index i = 0; i < p / 10 + 1; ++i)
      bt[Eigen::Index(rng.below(std::uint64_t(p)))] =
          (rng.uniform01() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    for (Eigen::Index j = 0; j < n; ++j) y[j] = 0.3 * rng.normal();
    y += X * bt;
  }
  Problem probe(DesignMatrix(X), y, loss, 1.0);
  return Problem(probe.X, probe.y, loss, ratio * lambda_max(probe));
}
}  // namespace

TEST_CASE("plain solver honours its stopping contract") {
  Problem pb = make_problem(15, 40, 0.2, 401);
  SaifConfig cfg;
  cfg.epsilon = 1e-8;
  SolveResult res = solve_plain(pb, cfg);
  CHECK(res.gap < cfg.epsilon);
  CHECK(res.certificate);

  Problem high(pb.X, pb.y, pb.loss, lambda_max(pb) * 2.0);
  SolveResult zero = solve_plain(high, cfg);
  CHECK(zero.beta.cwiseAbs().maxCoeff() == 0.0);
  CHECK(zero.support_size() == 0);
}

TEST_CASE("plain solver agrees with the active-set solver") {
  Problem pb = make_problem(20, 100, 0.1, 411);
  SaifConfig cfg;
  cfg.epsilon = 1e-8;
  SolveResult plain = solve_plain(pb, cfg);
  SolveResult active = solve(pb, cfg);
  CHECK(std::abs(plain.objective - active.objective) <= 2.0 * cfg.epsilon);
}

TEST_CASE("dynamic screening removes nothing while the ball is large") {
  Problem pb = make_problem(15, 50, 0.3, 421);
  SaifConfig cfg;
  cfg.epsilon = 1e-8;
  SolveResult res = solve_dynamic(pb, cfg);
  REQUIRE_FALSE(res.trace.empty());
  // the first record is taken after one epoch from beta = 0: the gap is
  // still of the order of the objective at zero and nothing screens
  CHECK(res.trace.front().p_t == 50);
  CHECK(res.gap < cfg.epsilon);
}

TEST_CASE("dynamic screening never removes an oracle-support feature") {
  for (std::uint64_t seed : {431, 432, 433}) {
    Problem pb = make_problem(18, 60, 0.15, seed);
    SaifConfig cfg;
    cfg.epsilon = 1e-8;
    SolveResult res = solve_dynamic(pb, cfg);
    const auto oracle =
        oracles::prox_grad_lasso(pb.X.matrix(), pb.y, false, pb.lambda, 1e-10);
    // removed features have beta pinned at exactly zero
    for (int i = 0; i < 60; ++i)
      if (std::abs(oracle.beta[i]) > 1e-7)
        REQUIRE(std::abs(res.beta[i]) > 0.0);
    CHECK(std::abs(res.objective - oracle.objective) <= 2e-8);
  }
}

TEST_CASE("path rejects bad grids") {
  Problem pb = make_problem(10, 20, 0.3, 441);
  SaifConfig cfg;
  const double lm = lambda_max(pb);
  CHECK_THROWS_AS(
      solve_path(pb, {0.5 * lm, 0.5 * lm}, PathMethod::plain, cfg),
      std::invalid_argument);
  CHECK_THROWS_AS(
      solve_path(pb, {0.1 * lm, 0.5 * lm}, PathMethod::plain, cfg),
      std::invalid_argument);
  CHECK_THROWS_AS(solve_path(pb, {}, PathMethod::plain, cfg),
                  std::invalid_argument);
}

TEST_CASE("single-entry path equals the corresponding single solve") {
  Problem pb = make_problem(12, 30, 0.2, 451);
  SaifConfig cfg;
  cfg.epsilon = 1e-8;
  auto path = solve_path(pb, {pb.lambda}, PathMethod::saif, cfg);
  REQUIRE(path.size() == 1);
  SolveResult single = solve(pb, cfg);
  CHECK(path[0].objective == Approx(single.objective).margin(1e-12));
  CHECK(path[0].cum_time_s >= path[0].time_s * 0.999);
}

TEST_CASE("warm-started paths match cold-start oracles at every penalty") {
  Problem pb = make_problem(20, 100, 1.0, 461);
  SaifConfig cfg;
  cfg.epsilon = 1e-8;
  const double lm = lambda_max(pb);
  std::vector<double> lambdas;
  for (int k = 0; k < 10; ++k)
    lambdas.push_back(lm * std::pow(10.0, -2.0 * k / 9.0));
  lambdas.front() = lm * 0.999;  // strictly below lambda_max

  for (PathMethod method :
       {PathMethod::saif, PathMethod::dynamic, PathMethod::sequential}) {
    auto path = solve_path(pb, lambdas, method, cfg);
    REQUIRE(path.size() == lambdas.size());
    double prev_cum = 0.0;
    for (size_t k = 0; k < path.size(); ++k) {
      Problem pk(pb.X, pb.y, pb.loss, lambdas[k]);
      SolveResult cold = solve_plain(pk, cfg);
      REQUIRE(std::abs(path[k].objective - cold.objective) <=
              2.0 * cfg.epsilon);
      CHECK(path[k].cum_time_s >= prev_cum);
      prev_cum = path[k].cum_time_s;
    }
  }
}
