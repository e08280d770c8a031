#ifndef SAIF_LOSSES_HPP
#define SAIF_LOSSES_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "saif/design_matrix.hpp"

namespace saif {

enum class LossKind { squared, logistic };

/// Smoothness constant of the per-sample loss (upper bound on f'').
inline double smoothness_alpha(LossKind loss) {
  return loss == LossKind::squared ? 1.0 : 0.25;
}

/// Strong-convexity constant, recorded for instrumentation only.
/// The logistic loss has none on an unbounded domain.
inline std::optional<double> strong_convexity_gamma(LossKind loss) {
  if (loss == LossKind::squared) return 1.0;
  return std::nullopt;
}

inline double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

inline double loss_value(double z, double y, LossKind loss) {
  if (loss == LossKind::squared) {
    double d = z - y;
    return 0.5 * d * d;
  }
  // log(1 + exp(-yz)) computed without overflow
  double m = -y * z;
  if (m > 0.0) return m + std::log1p(std::exp(-m));
  return std::log1p(std::exp(m));
}

inline double loss_grad_scalar(double z, double y, LossKind loss) {
  if (loss == LossKind::squared) return z - y;
  return -y * sigmoid(-y * z);
}

/// Elementwise derivative of the loss at the given linear predictor.
inline Vector loss_grad(const Vector& linear_predictor, const Vector& y,
                        LossKind loss) {
  if (linear_predictor.size() != y.size())
    throw std::invalid_argument("loss_grad: predictor/label length mismatch");
  Vector g(y.size());
  for (Eigen::Index j = 0; j < y.size(); ++j)
    g[j] = loss_grad_scalar(linear_predictor[j], y[j], loss);
  return g;
}

namespace detail {
inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }
}  // namespace detail

/// Convex conjugate of the per-sample loss.
/// Logistic requires v*y in [-1, 0]; outside that the dual point is
/// infeasible and a domain_error is raised (tiny slack tolerated).
inline double conjugate(double v, double y, LossKind loss) {
  if (loss == LossKind::squared) return 0.5 * v * v + v * y;
  double vy = v * y;
  constexpr double slack = 1e-12;
  if (vy > slack || vy < -1.0 - slack)
    throw std::domain_error("logistic conjugate: v*y outside [-1, 0]");
  vy = std::min(0.0, std::max(-1.0, vy));
  return detail::xlogx(-vy) + detail::xlogx(1.0 + vy);
}

/// Derivative of the conjugate w.r.t. v (the inverse map of the loss
/// derivative). Unbounded at the logistic domain boundary.
inline double conjugate_grad(double v, double y, LossKind loss) {
  if (loss == LossKind::squared) return v + y;
  double vy = v * y;
  constexpr double slack = 1e-12;
  if (vy > slack || vy < -1.0 - slack)
    throw std::domain_error("logistic conjugate_grad: v*y outside [-1, 0]");
  vy = std::min(-1e-300, std::max(-1.0 + 1e-300, vy));
  return y * std::log((1.0 + vy) / (-vy));
}

struct Problem {
  DesignMatrix X;
  Vector y;
  LossKind loss = LossKind::squared;
  double lambda = 1.0;
  // When set, that column carries no L1 penalty and is excluded from the
  // dual constraint set (used by the fused reparameterization).
  std::optional<Eigen::Index> unpenalized_col;

  Problem() = default;
  Problem(DesignMatrix X_, Vector y_, LossKind loss_, double lambda_,
          std::optional<Eigen::Index> unpenalized = std::nullopt)
      : X(std::move(X_)), y(std::move(y_)), loss(loss_), lambda(lambda_),
        unpenalized_col(unpenalized) {
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    if (X.rows() != y.size())
      throw std::invalid_argument("row count of X must match y");
    if (X.rows() == 0 || X.cols() == 0)
      throw std::invalid_argument("problem needs at least one sample and feature");
    if (loss == LossKind::logistic) {
      for (Eigen::Index j = 0; j < y.size(); ++j)
        if (y[j] != 1.0 && y[j] != -1.0)
          throw std::invalid_argument("logistic labels must be in {-1,+1}");
    }
  }

  Eigen::Index n() const { return X.rows(); }
  Eigen::Index p() const { return X.cols(); }
  bool penalized(Eigen::Index i) const {
    return !unpenalized_col || *unpenalized_col != i;
  }
};

inline double loss_sum(const Problem& pb, const Vector& predictor) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < pb.n(); ++j)
    s += loss_value(predictor[j], pb.y[j], pb.loss);
  return s;
}

/// Objective value at a precomputed predictor; the L1 part is supplied by
/// the caller so restricted active sets need no full-length vector.
inline double primal_objective_at(const Problem& pb, const Vector& predictor,
                                  double penalized_l1) {
  return loss_sum(pb, predictor) + pb.lambda * penalized_l1;
}

/// Full primal objective; entries outside the support contribute zero.
inline double primal_objective(const Problem& pb, const Vector& beta) {
  if (beta.size() != pb.p())
    throw std::invalid_argument("primal_objective: beta length mismatch");
  Vector pred = pb.X.matrix() * beta;
  double l1 = 0.0;
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    if (pb.penalized(i)) l1 += std::abs(beta[i]);
  return primal_objective_at(pb, pred, l1);
}

/// Dual objective -sum_j f*(-lambda * theta_j, y_j). For the squared loss
/// this equals lambda*y'theta - (lambda^2/2)*|theta|^2.
inline double dual_objective(const Problem& pb, const Vector& theta) {
  if (theta.size() != pb.n())
    throw std::invalid_argument("dual_objective: theta length mismatch");
  double s = 0.0;
  for (Eigen::Index j = 0; j < pb.n(); ++j)
    s -= conjugate(-pb.lambda * theta[j], pb.y[j], pb.loss);
  return s;
}

/// Duality gaps may come out as tiny negatives from rounding; clamp those
/// and treat anything materially negative as an internal inconsistency.
inline double clamp_gap(double gap) {
  if (gap >= 0.0) return gap;
  if (gap >= -1e-12) return 0.0;
  throw std::runtime_error("negative duality gap beyond tolerance");
}

/// Scale-aware variant for solver loops, where the objective magnitude
/// sets the rounding floor of the primal/dual difference.
inline double clamp_gap(double gap, double objective_scale) {
  if (gap >= 0.0) return gap;
  if (gap >= -1e-12 * std::max(1.0, std::abs(objective_scale))) return 0.0;
  throw std::runtime_error("negative duality gap beyond tolerance");
}

}  // namespace saif

#endif  // SAIF_LOSSES_HPP
