#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "saif/baselines.hpp"
#include "saif/data_io.hpp"
#include "saif/fused.hpp"

using namespace saif;
using Catch::Approx;

namespace {
DesignMatrix random_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  DeterministicRng rng(seed);
  Matrix X(n, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < n; ++j) X(j, i) = rng.normal();
  return DesignMatrix(std::move(X));
}

double fused_penalty(const FeatureTree& tree, const Vector& beta) {
  double s = 0.0;
  for (auto [a, b] : tree.edges) s += std::abs(beta[a - 1] - beta[b - 1]);
  return s;
}
}  // namespace

TEST_CASE("chain transform matches the hand-derived matrix") {
  FeatureTree tree = make_feature_tree(3, {{1, 2}, {2, 3}}, /*root=*/3);
  TransformMatrix T = build_transform(tree);
  Matrix Td = T.dense();
  Matrix expected(3, 3);
  expected << 1, 1, 1, 0, 1, 1, 0, 0, 1;
  CHECK(Td == expected);

  Matrix D = tree_difference_matrix(tree);
  Matrix DT = D * Td;
  Matrix id_pad = Matrix::Zero(2, 3);
  id_pad(0, 0) = 1.0;
  id_pad(1, 1) = 1.0;
  CHECK(DT == id_pad);
}

TEST_CASE("single-node tree transform is the identity") {
  FeatureTree tree = make_feature_tree(1, {});
  TransformMatrix T = build_transform(tree);
  CHECK(T.dense() == Matrix::Ones(1, 1));
}

TEST_CASE("random trees give exactly diagonalizing transforms") {
  for (std::uint64_t seed : {501, 502, 503}) {
    FeatureTree tree = gen_random_tree(20, seed);
    TransformMatrix T = build_transform(tree);
    Matrix DT = tree_difference_matrix(tree) * T.dense();
    // entries are small integers, so the comparison is exact
    for (int e = 0; e < 19; ++e)
      for (int i = 0; i < 20; ++i)
        REQUIRE(DT(e, i) == (i == e ? 1.0 : 0.0));
  }
}

TEST_CASE("round trip through the transform recovers edge differences") {
  FeatureTree tree = gen_random_tree(15, 511);
  TransformMatrix T = build_transform(tree);
  Matrix D = tree_difference_matrix(tree);
  DeterministicRng rng(512);
  for (int rep = 0; rep < 20; ++rep) {
    Vector stacked(15);
    for (int i = 0; i < 15; ++i) stacked[i] = rng.normal();
    Vector beta = T.apply(stacked);
    Vector diffs = D * beta;
    REQUIRE((diffs - stacked.head(14)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("design transform equals the dense product") {
  FeatureTree chain = make_feature_tree(3, {{1, 2}, {2, 3}}, 3);
  TransformMatrix T = build_transform(chain);
  DesignMatrix X = random_design(6, 3, 521);
  DesignMatrix Xt = transform_design(X, T);
  CHECK((Xt.col(0) - X.col(0)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((Xt.col(1) - (X.col(0) + X.col(1))).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((Xt.col(2) - (X.col(0) + X.col(1) + X.col(2))).cwiseAbs().maxCoeff() <=
        1e-12);

  FeatureTree tree = gen_random_tree(25, 522);
  TransformMatrix Tr = build_transform(tree);
  DesignMatrix Xr = random_design(10, 25, 523);
  DesignMatrix Xrt = transform_design(Xr, Tr);
  Matrix dense = Xr.matrix() * Tr.dense();
  CHECK((Xrt.matrix() - dense).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fused lambda_max hand example") {
  FeatureTree tree = make_feature_tree(3, {{1, 2}, {2, 3}}, 3);
  TransformMatrix T = build_transform(tree);
  DesignMatrix X(Matrix::Identity(3, 3));
  DesignMatrix Xt = transform_design(X, T);
  Vector y(3);
  y << 1, 2, 3;
  CHECK(fused_lambda_max(Xt, y, LossKind::squared) == Approx(1.0).epsilon(1e-12));

  // y in the span of the all-ones column: zero residual, zero lambda_max
  Vector span = 4.0 * Vector::Ones(3);
  CHECK(fused_lambda_max(Xt, span, LossKind::squared) ==
        Approx(0.0).margin(1e-12));
}

TEST_CASE("fused dual scaling clamps") {
  // Xbar with a single column; engineer the two clamp regimes
  Matrix xb(2, 1);
  xb << 2.0, 0.0;
  DesignMatrix Xbar(xb);
  Vector theta(2);
  theta << 1.0, 0.0;  // |Xbar' theta| = 2 so the cap is 0.5

  // unconstrained optimum 0.3 sits inside the cap
  {
    Vector y(2);
    y << 0.3, 0.0;  // y'theta / (lambda |theta|^2) = 0.3
    CHECK(fused_dual_scale(theta, Xbar, y, 1.0) == Approx(0.3));
  }
  // unconstrained optimum 5 clamps to 0.5
  {
    Vector y(2);
    y << 5.0, 0.0;
    CHECK(fused_dual_scale(theta, Xbar, y, 1.0) == Approx(0.5));
  }
  CHECK(fused_dual_scale(Vector::Zero(2), Xbar, Vector::Zero(2), 1.0) == 0.0);
}

TEST_CASE("fused dual scaling beats plain feasibility scaling") {
  DeterministicRng rng(531);
  Matrix xb(8, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 8; ++j) xb(j, i) = rng.normal();
  DesignMatrix Xbar(xb);
  Vector y(8), theta(8);
  for (int j = 0; j < 8; ++j) {
    y[j] = rng.normal();
    theta[j] = rng.normal();
  }
  const double lambda = 0.7;
  const double tau = fused_dual_scale(theta, Xbar, y, lambda);
  double mx = 0.0;
  for (int i = 0; i < 5; ++i) mx = std::max(mx, std::abs(xb.col(i).dot(theta)));
  const double plain = std::min(1.0, mx > 0.0 ? 1.0 / mx : 1.0);

  // feasibility of the scaled point
  for (int i = 0; i < 5; ++i)
    REQUIRE(std::abs(xb.col(i).dot(tau * theta)) <= 1.0 + 1e-12);
  const auto dual_of = [&](double t) {
    return lambda * y.dot(t * theta) -
           0.5 * lambda * lambda * (t * theta).squaredNorm();
  };
  CHECK(dual_of(tau) >= dual_of(plain) - 1e-12);
}

TEST_CASE("huge penalty returns a constant vector") {
  FeatureTree tree = gen_chain_tree(6);
  DesignMatrix X = random_design(9, 6, 541);
  DeterministicRng rng(542);
  Vector y(9);
  for (int j = 0; j < 9; ++j) y[j] = rng.normal();
  SaifConfig cfg;
  SolveResult res = solve_fused(X, y, tree, 1e9, LossKind::squared, cfg);
  for (int i = 1; i < 6; ++i) CHECK(res.beta[i] == Approx(res.beta[0]).margin(1e-12));
  CHECK(res.certificate);
}

TEST_CASE("fused solve matches the transformed-problem oracle") {
  FeatureTree tree = gen_chain_tree(10);
  DesignMatrix X = random_design(15, 10, 551);
  DeterministicRng rng(552);
  Vector beta_true(10);
  // piecewise-constant truth so the fused penalty is informative
  for (int i = 0; i < 10; ++i) beta_true[i] = i < 5 ? 1.0 : -0.5;
  Vector y = X.matrix() * beta_true;
  for (int j = 0; j < 15; ++j) y[j] += 0.1 * rng.normal();

  TransformMatrix T = build_transform(tree);
  DesignMatrix Xt = transform_design(X, T);
  const double lmax = fused_lambda_max(Xt, y, LossKind::squared);
  const double lambda = 0.3 * lmax;

  SaifConfig cfg;
  cfg.epsilon = 1e-10;
  SolveResult res = solve_fused(X, y, tree, lambda, LossKind::squared, cfg);
  REQUIRE(res.certificate);

  Problem transformed(Xt, y, LossKind::squared, lambda,
                      Eigen::Index(tree.node_count - 1));
  SaifConfig oracle_cfg;
  oracle_cfg.epsilon = 1e-12;
  SolveResult oracle = solve_plain(transformed, oracle_cfg);

  const double fused_obj =
      loss_sum(Problem(X, y, LossKind::squared, lambda), X.matrix() * res.beta) +
      lambda * fused_penalty(tree, res.beta);
  CHECK(fused_obj == Approx(oracle.objective).margin(1e-8));

  // penalty identity between coordinate systems
  SolveResult transformed_run = solve(transformed, cfg);
  double l1 = 0.0;
  for (int i = 0; i + 1 < 10; ++i) l1 += std::abs(transformed_run.beta[i]);
  CHECK(fused_penalty(tree, T.apply(transformed_run.beta)) ==
        Approx(l1).margin(1e-10));

  // the unpenalized coordinate's optimality doubles as the equality
  // constraint of the reduced dual
  Vector pred = Xt.matrix() * transformed_run.beta;
  Vector g = loss_grad(pred, y, LossKind::squared);
  CHECK(std::abs(Xt.col(9).dot(g)) <=
        1e-8 * Xt.col_norm(9) * std::max(1.0, g.norm()));
}

TEST_CASE("fused solve on a random tree with the logistic loss") {
  FeatureTree tree = gen_random_tree(8, 561);
  DesignMatrix X = random_design(20, 8, 562);
  DeterministicRng rng(563);
  Vector y(20);
  for (int j = 0; j < 20; ++j) y[j] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
  TransformMatrix T = build_transform(tree);
  DesignMatrix Xt = transform_design(X, T);
  const double lmax = fused_lambda_max(Xt, y, LossKind::logistic);
  SaifConfig cfg;
  cfg.epsilon = 1e-8;
  SolveResult res = solve_fused(X, y, tree, 0.4 * lmax, LossKind::logistic, cfg);
  REQUIRE(res.certificate);

  Problem transformed(Xt, y, LossKind::logistic, 0.4 * lmax, 7);
  SaifConfig oracle_cfg;
  oracle_cfg.epsilon = 1e-10;
  SolveResult oracle = solve_plain(transformed, oracle_cfg);
  const double fused_obj =
      loss_sum(Problem(X, y, LossKind::logistic, 1.0), X.matrix() * res.beta) +
      0.4 * lmax * fused_penalty(tree, res.beta);
  CHECK(fused_obj == Approx(oracle.objective).margin(1e-7));
}

TEST_CASE("tree validation names the defect") {
  CHECK_THROWS_WITH(make_feature_tree(3, {{1, 2}, {1, 2}}),
                    Catch::Matchers::ContainsSubstring("cycle"));
  CHECK_THROWS_WITH(make_feature_tree(3, {{1, 2}}),
                    Catch::Matchers::ContainsSubstring("expected 2 edges"));
  CHECK_THROWS_WITH(make_feature_tree(3, {{1, 2}, {4, 2}}),
                    Catch::Matchers::ContainsSubstring("out of range"));
  CHECK_THROWS_WITH(make_feature_tree(2, {{1, 1}}),
                    Catch::Matchers::ContainsSubstring("self-loop"));
}
