#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "saif/data_io.hpp"
#include "saif/solver_cm.hpp"

using namespace saif;
using Catch::Approx;

namespace {
Problem random_problem(Eigen::Index n, Eigen::Index p, LossKind loss,
                       double lambda, std::uint64_t seed) {
  DeterministicRng rng(seed);
  Matrix X(n, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < n; ++j) X(j, i) = rng.normal();
  Vector y(n);
  if (loss == LossKind::logistic) {
    for (Eigen::Index j = 0; j < n; ++j) y[j] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  } else {
    for (Eigen::Index j = 0; j < n; ++j) y[j] = rng.normal();
  }
  return Problem(DesignMatrix(X), y, loss, lambda);
}

CmWorkspace fresh_workspace(const Problem& pb) {
  CmWorkspace ws(pb.n(), pb.p());
  for (Eigen::Index i = 0; i < pb.p(); ++i)
    if (pb.penalized(i)) ws.active_columns.push_back(int(i));
  return ws;
}
}  // namespace

TEST_CASE("soft threshold") {
  CHECK(soft_threshold(3.0, 1.0) == Approx(2.0));
  CHECK(soft_threshold(-0.5, 1.0) == 0.0);
  CHECK(soft_threshold(-3.0, 1.0) == Approx(-2.0));
  CHECK(soft_threshold(0.0, 0.0) == 0.0);
}

TEST_CASE("single-feature squared pass has the closed form") {
  const double s = 1.0 / std::sqrt(2.0);
  Matrix X(2, 1);
  X << s, s;
  Vector y(2);
  y << s, s;
  Problem pb(DesignMatrix(X), y, LossKind::squared, 0.4);
  CmWorkspace ws = fresh_workspace(pb);
  cm_epochs(ws, pb, 1);
  CHECK(ws.beta[0] == Approx(0.6).epsilon(1e-12));
  CHECK(ws.base_op_count == 1);
}

TEST_CASE("at or above lambda_max everything thresholds to zero") {
  Problem base = random_problem(8, 6, LossKind::squared, 1.0, 7);
  Vector g0 = -base.y;  // f'(0) for the squared loss
  double lmax = 0.0;
  for (Eigen::Index i = 0; i < 6; ++i)
    lmax = std::max(lmax, std::abs(base.X.col(i).dot(g0)));
  Problem pb(base.X, base.y, LossKind::squared, lmax * 1.01);
  CmWorkspace ws = fresh_workspace(pb);
  cm_epochs(ws, pb, 25);
  CHECK(ws.beta.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("squared objective matches the proximal-gradient oracle") {
  Problem pb = random_problem(10, 20, LossKind::squared, 0.8, 17);
  const auto oracle =
      oracles::prox_grad_lasso(pb.X.matrix(), pb.y, false, pb.lambda, 1e-10);
  CmWorkspace ws = fresh_workspace(pb);
  cm_epochs(ws, pb, 3000);
  CHECK(primal_objective(pb, ws.beta) ==
        Approx(oracle.objective).margin(1e-8));
}

TEST_CASE("logistic objective matches the proximal-gradient oracle") {
  Problem pb = random_problem(12, 8, LossKind::logistic, 0.15, 18);
  const auto oracle =
      oracles::prox_grad_lasso(pb.X.matrix(), pb.y, true, pb.lambda, 1e-10);
  CmWorkspace ws = fresh_workspace(pb);
  cm_epochs(ws, pb, 5000);
  CHECK(primal_objective(pb, ws.beta) ==
        Approx(oracle.objective).margin(1e-8));
}

TEST_CASE("objective is non-increasing across epochs") {
  for (LossKind loss : {LossKind::squared, LossKind::logistic}) {
    Problem pb = random_problem(9, 14, loss, 0.4, 23);
    CmWorkspace ws = fresh_workspace(pb);
    double prev = primal_objective(pb, ws.beta);
    for (int e = 0; e < 60; ++e) {
      cm_epochs(ws, pb, 1);
      const double cur = primal_objective(pb, ws.beta);
      REQUIRE(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("incremental predictor tracks the recomputed product") {
  for (LossKind loss : {LossKind::squared, LossKind::logistic}) {
    Problem pb = random_problem(11, 9, loss, 0.3, 29);
    CmWorkspace ws = fresh_workspace(pb);
    for (int e = 0; e < 7; ++e) {
      cm_epochs(ws, pb, 1);
      Vector direct = pb.X.matrix() * ws.beta;
      const double scale = std::max(1.0, direct.norm());
      REQUIRE((direct - ws.linear_predictor).norm() <= 1e-8 * scale);
    }
  }
}

TEST_CASE("an epoch at the fixed point moves nothing") {
  Problem pb = random_problem(10, 12, LossKind::squared, 0.6, 31);
  CmWorkspace ws = fresh_workspace(pb);
  cm_epochs(ws, pb, 4000);
  Vector before = ws.beta;
  cm_epochs(ws, pb, 1);
  CHECK((ws.beta - before).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("zero-norm columns are pinned at zero") {
  Matrix X(4, 3);
  X.setZero();
  X.col(0) << 1, 2, -1, 0.5;
  X.col(2) << -2, 1, 1, 1;
  Vector y(4);
  y << 1, -1, 2, 0;
  Problem pb(DesignMatrix(X), y, LossKind::squared, 0.1);
  CmWorkspace ws = fresh_workspace(pb);
  ws.beta[1] = 3.0;  // stale value on a zero column
  cm_epochs(ws, pb, 5);
  CHECK(ws.beta[1] == 0.0);
  Vector direct = pb.X.matrix() * ws.beta;
  CHECK((direct - ws.linear_predictor).norm() <= 1e-10);
}

TEST_CASE("unpenalized coordinate: exact squared minimization") {
  {
    // residual orthogonal to the column leaves it unchanged
    Matrix X(4, 2);
    X.setZero();
    X.col(0) << 1, 0, 0, 0;
    X.col(1) << 0, 1, 0, 0;
    Vector y(4);
    y << 0, 0, 2, -1;  // orthogonal to both columns
    Problem po(DesignMatrix(X), y, LossKind::squared, 1.0, 1);
    CmWorkspace ws(4, 2);
    unpenalized_coordinate_update(ws, po, 1);
    CHECK(ws.beta[1] == Approx(0.0).margin(1e-14));
  }
  {
    Problem pb = random_problem(8, 4, LossKind::squared, 1.0, 37);
    Problem pu(pb.X, pb.y, pb.loss, pb.lambda, 2);
    CmWorkspace ws(pu.n(), pu.p());
    unpenalized_coordinate_update(ws, pu, 2);
    const double expected = pu.X.col(2).dot(pu.y) / pu.X.col_sqnorm(2);
    CHECK(ws.beta[2] == Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("unpenalized coordinate: logistic 1-D gradient vanishes") {
  DeterministicRng rng(43);
  Matrix X(10, 1);
  for (int j = 0; j < 10; ++j) X(j, 0) = rng.normal();
  Vector y(10);
  for (int j = 0; j < 10; ++j) y[j] = rng.uniform01() < 0.4 ? -1.0 : 1.0;
  Problem pb(DesignMatrix(X), y, LossKind::logistic, 1.0, 0);
  CmWorkspace ws(10, 1);
  unpenalized_coordinate_update(ws, pb, 0);

  const auto grad = [&](double b) {
    double g = 0.0;
    for (int j = 0; j < 10; ++j)
      g += X(j, 0) * (-y[j] * oracles::sigmoid(-y[j] * X(j, 0) * b));
    return g;
  };
  CHECK(std::abs(grad(ws.beta[0])) <= 1e-10);
  const double bisect = oracles::bisect_grad_zero(grad, 1.0, 1e-13);
  CHECK(ws.beta[0] == Approx(bisect).margin(1e-8));
}

TEST_CASE("zero-norm unpenalized column is a no-op") {
  Matrix X = Matrix::Zero(3, 1);
  Vector y(3);
  y << 1, 2, 3;
  Problem pb(DesignMatrix(X), y, LossKind::squared, 1.0, 0);
  CmWorkspace ws(3, 1);
  unpenalized_coordinate_update(ws, pb, 0);
  CHECK(ws.beta[0] == 0.0);
}
