#ifndef SAIF_DUAL_GEOMETRY_HPP
#define SAIF_DUAL_GEOMETRY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "saif/losses.hpp"

namespace saif {

/// A ball region in dual space certified to contain an optimal dual point.
struct Ball {
  Vector center;
  double radius = 0.0;
  bool near_empty_intersection = false;
};

struct DualPoint {
  Vector theta;
  double tau = 1.0;
};

namespace detail {
/// max_i |x_i' v| over the given columns (0 when the set is empty).
inline double max_abs_correlation(const DesignMatrix& X, const Vector& v,
                                  std::span<const int> cols) {
  double m = 0.0;
  for (int i : cols) m = std::max(m, std::abs(X.col(i).dot(v)));
  return m;
}
}  // namespace detail

/// Scales the gradient-mapped point theta_hat = -f'(X beta)/lambda into the
/// dual region cut out by the given constraint columns. The plain scaling
/// shrinks by the worst constraint violation and never scales up; with
/// `refine` (squared loss only) tau instead maximizes the dual objective
/// over the feasible range of scalings.
inline DualPoint dual_point(const Vector& beta_predictor, const Problem& pb,
                            std::span<const int> constraint_columns,
                            bool refine = false) {
  Vector theta_hat = -loss_grad(beta_predictor, pb.y, pb.loss) / pb.lambda;
  const double mx = detail::max_abs_correlation(pb.X, theta_hat, constraint_columns);

  double tau;
  if (refine && pb.loss == LossKind::squared) {
    const double sq = theta_hat.squaredNorm();
    if (sq == 0.0) return {std::move(theta_hat), 1.0};
    const double best = pb.y.dot(theta_hat) / (pb.lambda * sq);
    const double cap = mx > 0.0 ? 1.0 / mx
                                : std::numeric_limits<double>::infinity();
    tau = std::min(std::max(best, -cap), cap);
  } else {
    tau = mx > 1.0 ? 1.0 / mx : 1.0;
    if (pb.loss == LossKind::logistic) tau = std::min(tau, 1.0);
  }
  return {tau * theta_hat, tau};
}

/// A dual point together with the sign-fixed coefficients that produced
/// it; the coefficients double as a primal candidate when present.
struct PolishedDual {
  Vector theta;
  std::vector<int> support;  // penalized pattern the solve was run on
  Vector coef;               // matching coefficients; empty in the
                             // overdetermined branch
  double unpenalized_coef = 0.0;
};

/// Squared-loss dual candidate from the sign-fixed quadratic on the
/// current support: solving X_S' X_S b = X_S' y - lambda*s puts the mapped
/// residual exactly on the support's constraint faces, where the dual
/// objective is first-order flat. The ray-scaled point cannot certify
/// small gaps on badly scaled problems (any interior correction pays the
/// full dual gradient); this one can, once the support has stabilized.
/// Undecided coordinates hover near zero, so trimmed patterns are tried
/// as fallbacks. Returns nothing when every candidate violates a
/// constraint in `constraint_columns`.
inline std::optional<PolishedDual> support_polished_dual(
    const Problem& pb, const Vector& beta, std::span<const int> constraint_columns) {
  if (pb.loss != LossKind::squared) return std::nullopt;
  std::vector<int> support;
  for (Eigen::Index i = 0; i < beta.size(); ++i)
    if (beta[i] != 0.0 && pb.penalized(i)) support.push_back(int(i));
  if (support.empty()) return std::nullopt;
  std::sort(support.begin(), support.end(), [&](int a, int b) {
    return std::abs(beta[a]) > std::abs(beta[b]);
  });

  const Eigen::Index extra = pb.unpenalized_col ? 1 : 0;
  const Eigen::Index full = Eigen::Index(support.size());
  const Eigen::Index n_fit = std::min(full, pb.n() - extra);
  std::vector<Eigen::Index> keeps{full};
  for (Eigen::Index k = n_fit; k > n_fit - 4 && k > 0; --k)
    if (k != full) keeps.push_back(k);

  for (Eigen::Index keep : keeps) {
    const Eigen::Index s = keep + extra;
    Matrix Xs(pb.n(), s);
    Vector target(s);  // prescribed values of x_i' theta on the faces
    for (Eigen::Index k = 0; k < keep; ++k) {
      Xs.col(k) = pb.X.col(support[size_t(k)]);
      target[k] = beta[support[size_t(k)]] > 0.0 ? 1.0 : -1.0;
    }
    if (extra) {
      // the unpenalized coordinate pins x_p' theta = 0
      Xs.col(keep) = pb.X.col(*pb.unpenalized_col);
      target[keep] = 0.0;
    }

    PolishedDual out;
    if (s <= pb.n()) {
      // maximize the dual on the affine slice: theta = (y - Xs*coef)/lambda
      // with coef from the sign-fixed quadratic
      Vector rhs(s);
      for (Eigen::Index k = 0; k < s; ++k)
        rhs[k] = Xs.col(k).dot(pb.y) - pb.lambda * target[k];
      Eigen::LDLT<Matrix> ldlt(Xs.transpose() * Xs);
      if (ldlt.info() != Eigen::Success) continue;
      Vector coef = ldlt.solve(rhs);
      if (!coef.allFinite()) continue;
      out.theta = (pb.y - Xs * coef) / pb.lambda;
      out.support.assign(support.begin(), support.begin() + keep);
      if (extra) {
        out.unpenalized_coef = coef[keep];
        out.coef = coef.head(keep);
      } else {
        out.coef = std::move(coef);
      }
    } else {
      // more faces than dual dimensions: least-squares onto them, which
      // recovers the optimum exactly when the pattern is consistent
      Eigen::LDLT<Matrix> ldlt(Xs * Xs.transpose());
      if (ldlt.info() != Eigen::Success) continue;
      out.theta = ldlt.solve(Xs * target);
      if (!out.theta.allFinite()) continue;
    }
    bool feasible = true;
    for (int i : constraint_columns) {
      if (std::abs(pb.X.col(i).dot(out.theta)) > 1.0 + 1e-12) {
        feasible = false;
        break;
      }
    }
    if (feasible) return out;
  }
  return std::nullopt;
}

/// Ball around a feasible dual point with radius sqrt(2*alpha*gap)/lambda,
/// the gap taken against the primal restricted to `restricted_set`.
inline Ball gap_ball(const Problem& pb, const Vector& beta,
                     const Vector& theta, std::span<const int> restricted_set) {
  const double feas = detail::max_abs_correlation(pb.X, theta, restricted_set);
  if (feas > 1.0 + 1e-12)
    throw std::invalid_argument("gap_ball: theta infeasible for restricted set");

  Vector pred = Vector::Zero(pb.n());
  double l1 = 0.0;
  for (int i : restricted_set) {
    if (beta[i] != 0.0) pred += beta[i] * pb.X.col(i);
    if (pb.penalized(i)) l1 += std::abs(beta[i]);
  }
  if (pb.unpenalized_col && beta[*pb.unpenalized_col] != 0.0)
    pred += beta[*pb.unpenalized_col] * pb.X.col(*pb.unpenalized_col);

  const double gap = clamp_gap(primal_objective_at(pb, pred, l1) -
                               dual_objective(pb, theta));
  const double r = std::sqrt(2.0 * smoothness_alpha(pb.loss) * gap) / pb.lambda;
  return {theta, r};
}

/// Same ball from precomputed objective values (engine fast path).
inline Ball gap_ball_from_values(const Problem& pb, const Vector& theta,
                                 double primal_value, double dual_value) {
  const double gap = clamp_gap(primal_value - dual_value);
  const double r = std::sqrt(2.0 * smoothness_alpha(pb.loss) * gap) / pb.lambda;
  return {theta, r};
}

namespace detail {
inline double conjugate_sum(const Problem& pb, const Vector& v) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < pb.n(); ++j)
    s += conjugate(v[j], pb.y[j], pb.loss);
  return s;
}

inline double golden_section_min(const std::function<double(double)>& f,
                                 double lo, double hi, double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a); fd = f(d);
    }
  }
  return 0.5 * (a + b);
}
}  // namespace detail

/// Dual-optimum ball transported from a heavier penalty lambda0 down to
/// lambda: center (lambda0/lambda)*theta0_star, radius from the strong
/// convexity of the conjugate. Supplying a feasible dual point tightens
/// the leading conjugate term by a 1-D line search toward the transported
/// optimum; the search always includes the untightened endpoint, so the
/// refined radius never exceeds the plain one.
inline Ball sequential_ball(const Vector& theta0_star, double lambda0,
                            double lambda, const Problem& pb,
                            const std::optional<Vector>& feasible_theta =
                                std::nullopt) {
  if (lambda > lambda0 || lambda <= 0.0)
    throw std::invalid_argument("sequential_ball: requires 0 < lambda <= lambda0");

  const double alpha = smoothness_alpha(pb.loss);
  const Vector v0 = -lambda0 * theta0_star;
  const double f_at_v0 = detail::conjugate_sum(pb, v0);

  double inner = 0.0;
  for (Eigen::Index j = 0; j < pb.n(); ++j)
    inner += conjugate_grad(v0[j], pb.y[j], pb.loss) * theta0_star[j];

  double lead;
  if (feasible_theta) {
    const Vector transported = (lambda / lambda0) * theta0_star;
    const Vector& th = *feasible_theta;
    const auto value = [&](double rho) {
      Vector mix = (1.0 - rho) * th + rho * transported;
      return detail::conjugate_sum(pb, -lambda * mix);
    };
    double rho;
    if (pb.loss == LossKind::squared) {
      // quadratic in rho: minimize |lambda*mix|^2/2 - lambda*y'mix
      const Vector w = transported - th;
      const double wsq = w.squaredNorm();
      if (wsq == 0.0) {
        rho = 1.0;
      } else {
        rho = (pb.y.dot(w) / lambda - th.dot(w)) / wsq;
        rho = std::min(1.0, std::max(0.0, rho));
      }
    } else {
      rho = detail::golden_section_min(value, 0.0, 1.0, 1e-10);
    }
    lead = std::min(value(rho), value(1.0));
  } else {
    lead = detail::conjugate_sum(pb, -(lambda * lambda / lambda0) * theta0_star);
  }

  double rad_sq = (2.0 * alpha / (lambda * lambda)) *
                  (lead - f_at_v0 + (lambda - lambda0) * inner);
  if (rad_sq < 0.0) {
    if (rad_sq < -1e-12)
      throw std::runtime_error("sequential_ball: negative radius-squared");
    rad_sq = 0.0;
  }
  return {(lambda0 / lambda) * theta0_star, std::sqrt(rad_sq)};
}

/// Smallest of: ball covering the lens of b1 and b2 (Heron construction),
/// or the smaller input ball. The Heron ball is valid only when the
/// perpendicular foot lies between the centers (d^2 >= |r1^2 - r2^2|);
/// every other configuration falls back to the smaller input. Disjoint
/// inputs flag a near-empty intersection.
inline Ball intersect_balls(const Ball& b1, const Ball& b2) {
  const Ball& small_ball = b1.radius <= b2.radius ? b1 : b2;
  const double d = (b1.center - b2.center).norm();
  const double r1 = b1.radius, r2 = b2.radius;

  if (d <= std::abs(r1 - r2)) return {small_ball.center, small_ball.radius};
  if (d >= r1 + r2) return {small_ball.center, small_ball.radius, true};
  if (d * d < std::abs(r1 * r1 - r2 * r2))
    return {small_ball.center, small_ball.radius};

  const double s = 0.5 * (r1 + r2 + d);
  const double area_sq = s * (s - r1) * (s - r2) * (s - d);
  if (area_sq <= 0.0) return {small_ball.center, small_ball.radius};
  const double r = 2.0 * std::sqrt(area_sq) / d;
  if (!(r < std::min(r1, r2)))
    return {small_ball.center, small_ball.radius};
  const double d1 = std::sqrt(std::max(0.0, r1 * r1 - r * r));
  Vector center = (1.0 - d1 / d) * b1.center + (d1 / d) * b2.center;
  return {std::move(center), r};
}

/// Smallest penalty with an all-zero solution: max_i |x_i' f'(0)| over the
/// penalized columns.
inline double lambda_max(const Problem& pb) {
  Vector g0 = loss_grad(Vector::Zero(pb.n()), pb.y, pb.loss);
  double m = 0.0;
  for (Eigen::Index i = 0; i < pb.p(); ++i)
    if (pb.penalized(i)) m = std::max(m, std::abs(pb.X.col(i).dot(g0)));
  return m;
}

}  // namespace saif

#endif  // SAIF_DUAL_GEOMETRY_HPP
