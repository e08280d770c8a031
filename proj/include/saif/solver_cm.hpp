#ifndef SAIF_SOLVER_CM_HPP
#define SAIF_SOLVER_CM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "saif/losses.hpp"

namespace saif {

/// sign(z) * max(|z| - t, 0), the base operation of coordinate minimization.
inline double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

/// Mutable state of a cyclic coordinate-minimization run restricted to an
/// ordered set of columns. `beta` is kept full-length with entries outside
/// `active_columns` equal to zero; `linear_predictor` tracks X*beta
/// incrementally and is re-synced periodically as floating-point hygiene.
struct CmWorkspace {
  Vector beta;              // length p
  Vector linear_predictor;  // length n
  std::vector<int> active_columns;
  std::uint64_t base_op_count = 0;
  std::uint64_t weighted_op_count = 0;  // each update weighted by |active|
  std::uint64_t epoch_count = 0;

  CmWorkspace() = default;
  CmWorkspace(Eigen::Index n, Eigen::Index p)
      : beta(Vector::Zero(p)), linear_predictor(Vector::Zero(n)) {}

  void resync_predictor(const Problem& pb) {
    linear_predictor.setZero();
    for (int i : active_columns)
      if (beta[i] != 0.0) linear_predictor += beta[i] * pb.X.col(i);
    if (pb.unpenalized_col && beta[*pb.unpenalized_col] != 0.0)
      linear_predictor += beta[*pb.unpenalized_col] * pb.X.col(*pb.unpenalized_col);
  }
};

namespace detail {
constexpr std::uint64_t kResyncPeriod = 1000;
}

/// Runs K full cyclic passes over the workspace's active columns.
/// Squared loss performs the exact coordinate minimization via
/// soft-thresholding on the residual; logistic takes a proximal step with
/// the per-coordinate bound |x_i|^2 / 4. Zero-norm columns stay at zero.
inline void cm_epochs(CmWorkspace& ws, const Problem& pb, int K) {
  if (K <= 0 || ws.active_columns.empty()) return;
  const double lam = pb.lambda;
  const std::uint64_t weight = ws.active_columns.size();

  if (pb.loss == LossKind::squared) {
    Vector r = pb.y - ws.linear_predictor;
    for (int k = 0; k < K; ++k) {
      for (int i : ws.active_columns) {
        const double sq = pb.X.col_sqnorm(i);
        ++ws.base_op_count;
        ws.weighted_op_count += weight;
        if (sq == 0.0) {
          ws.beta[i] = 0.0;
          continue;
        }
        const double u = pb.X.col(i).dot(r) + sq * ws.beta[i];
        const double nb = soft_threshold(u, lam) / sq;
        const double d = nb - ws.beta[i];
        if (d != 0.0) {
          r -= d * pb.X.col(i);
          ws.beta[i] = nb;
        }
      }
      if (++ws.epoch_count % detail::kResyncPeriod == 0) {
        ws.resync_predictor(pb);
        r = pb.y - ws.linear_predictor;
      }
    }
    ws.linear_predictor = pb.y - r;
  } else {
    for (int k = 0; k < K; ++k) {
      for (int i : ws.active_columns) {
        const double sq = pb.X.col_sqnorm(i);
        ++ws.base_op_count;
        ws.weighted_op_count += weight;
        if (sq == 0.0) {
          ws.beta[i] = 0.0;
          continue;
        }
        const double L = sq * 0.25;
        double g = 0.0;
        for (Eigen::Index j = 0; j < pb.n(); ++j)
          g += pb.X.matrix()(j, i) *
               loss_grad_scalar(ws.linear_predictor[j], pb.y[j], pb.loss);
        const double nb = soft_threshold(ws.beta[i] * L - g, lam) / L;
        const double d = nb - ws.beta[i];
        if (d != 0.0) {
          ws.linear_predictor += d * pb.X.col(i);
          ws.beta[i] = nb;
        }
      }
      if (++ws.epoch_count % detail::kResyncPeriod == 0) ws.resync_predictor(pb);
    }
  }
}

/// Exact single-coordinate minimization without an L1 penalty. Squared
/// loss has the closed form; logistic uses a safeguarded Newton iteration
/// (bisection fallback) on the 1-D gradient, tolerance 1e-12.
inline void unpenalized_coordinate_update(CmWorkspace& ws, const Problem& pb,
                                          Eigen::Index column_index) {
  const double sq = pb.X.col_sqnorm(column_index);
  if (sq == 0.0) return;
  ++ws.base_op_count;
  ws.weighted_op_count += ws.active_columns.empty() ? 1 : ws.active_columns.size();

  if (pb.loss == LossKind::squared) {
    const double step = pb.X.col(column_index).dot(pb.y - ws.linear_predictor) / sq;
    if (step != 0.0) {
      ws.linear_predictor += step * pb.X.col(column_index);
      ws.beta[column_index] += step;
    }
    return;
  }

  const auto grad1d = [&](double dz) {
    double g = 0.0;
    for (Eigen::Index j = 0; j < pb.n(); ++j)
      g += pb.X.matrix()(j, column_index) *
           loss_grad_scalar(ws.linear_predictor[j] +
                                dz * pb.X.matrix()(j, column_index),
                            pb.y[j], pb.loss);
    return g;
  };
  const auto curv1d = [&](double dz) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < pb.n(); ++j) {
      const double xji = pb.X.matrix()(j, column_index);
      const double z = ws.linear_predictor[j] + dz * xji;
      const double s = sigmoid(-pb.y[j] * z);
      h += xji * xji * s * (1.0 - s);
    }
    return h;
  };

  double g0 = grad1d(0.0);
  if (std::abs(g0) <= 1e-12) return;
  // bracket a sign change, expanding away from the descent direction
  double lo = 0.0, hi = 0.0;
  double step = 1.0 / std::sqrt(sq);
  if (g0 > 0.0) {
    hi = 0.0;
    lo = -step;
    while (grad1d(lo) > 0.0 && std::isfinite(lo)) lo *= 2.0;
  } else {
    lo = 0.0;
    hi = step;
    while (grad1d(hi) < 0.0 && std::isfinite(hi)) hi *= 2.0;
  }
  double dz = 0.5 * (lo + hi);
  for (int it = 0; it < 20; ++it) {
    const double g = grad1d(dz);
    if (std::abs(g) <= 1e-12) break;
    if (g > 0.0) hi = dz; else lo = dz;
    const double h = curv1d(dz);
    double next = h > 0.0 ? dz - g / h : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    dz = next;
  }
  if (dz != 0.0) {
    ws.linear_predictor += dz * pb.X.col(column_index);
    ws.beta[column_index] += dz;
  }
}

}  // namespace saif

#endif  // SAIF_SOLVER_CM_HPP
