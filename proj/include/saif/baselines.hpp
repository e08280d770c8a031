#ifndef SAIF_BASELINES_HPP
#define SAIF_BASELINES_HPP

#include <chrono>
#include <vector>

#include "saif/saif_engine.hpp"

namespace saif {

namespace detail {

inline std::vector<int> penalized_columns(const Problem& pb) {
  std::vector<int> cols;
  cols.reserve(pb.p());
  for (Eigen::Index i = 0; i < pb.p(); ++i)
    if (pb.penalized(i)) cols.push_back(int(i));
  return cols;
}

inline double l1_over(const Vector& beta, const std::vector<int>& cols) {
  double s = 0.0;
  for (int i : cols) s += std::abs(beta[i]);
  return s;
}

struct BaselineLoop {
  CmWorkspace ws;
  Vector theta;
  double primal = 0.0, dual = 0.0, gap = 0.0;
};

}  // namespace detail

/// Cyclic coordinate minimization over the full feature set, no screening.
inline SolveResult solve_plain(const Problem& pb, const SaifConfig& cfg,
                               const Vector* warm_beta = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  SolveResult out;
  out.lambda = pb.lambda;
  out.lambda_max_value = lambda_max(pb);
  if (pb.lambda >= out.lambda_max_value && !pb.unpenalized_col) {
    out.beta = Vector::Zero(pb.p());
    out.objective = primal_objective(pb, out.beta);
    Vector theta = -loss_grad(Vector::Zero(pb.n()), pb.y, pb.loss) / pb.lambda;
    out.dual_value = dual_objective(pb, theta);
    out.gap = clamp_gap(out.objective - out.dual_value, out.objective);
    out.certificate = true;
    out.time_s = elapsed();
    return out;
  }

  CmWorkspace ws(pb.n(), pb.p());
  ws.active_columns = detail::penalized_columns(pb);
  if (warm_beta) {
    if (warm_beta->size() != pb.p())
      throw std::invalid_argument("warm start length mismatch");
    ws.beta = *warm_beta;
    ws.resync_predictor(pb);
  }
  if (pb.unpenalized_col)
    unpenalized_coordinate_update(ws, pb, *pb.unpenalized_col);

  double best_dual = -std::numeric_limits<double>::infinity();
  bool done = false;
  for (std::int64_t iter = 0; iter < cfg.max_outer && !done; ++iter) {
    out.counters.outer_iters = iter + 1;
    double gap_enter = std::numeric_limits<double>::infinity();
    int blocks = 0;
    do {
      const int epochs = std::max(
          cfg.inner_epochs,
          detail::ceil_div(10, int(std::max<size_t>(1, ws.active_columns.size()))));
      cm_epochs(ws, pb, epochs);
      if (pb.unpenalized_col)
        unpenalized_coordinate_update(ws, pb, *pb.unpenalized_col);

      DualPoint dp = dual_point(ws.linear_predictor, pb, ws.active_columns,
                                cfg.refine_dual);
      best_dual = std::max(best_dual, dual_objective(pb, dp.theta));
      out.objective = primal_objective_at(
          pb, ws.linear_predictor, detail::l1_over(ws.beta, ws.active_columns));
      out.dual_value = best_dual;
      out.gap = clamp_gap(out.objective - out.dual_value, out.objective);
      ++blocks;
      if (blocks == 1) gap_enter = out.gap;
    } while (out.gap >= cfg.epsilon && out.gap > 0.5 * gap_enter && blocks < 64);
    if (out.gap >= cfg.epsilon) {
      if (auto polished =
              support_polished_dual(pb, ws.beta, ws.active_columns)) {
        if (auto adopted = detail::adopt_polished_primal(pb, *polished,
                                                         out.objective, ws))
          out.objective = *adopted;
        best_dual = std::max(best_dual, dual_objective(pb, polished->theta));
        out.dual_value = best_dual;
        out.gap = clamp_gap(out.objective - best_dual, out.objective);
      }
    }
    if (cfg.record_trace)
      out.trace.push_back({elapsed(), out.counters.outer_iters,
                           int(ws.active_columns.size()), out.gap,
                           out.dual_value, TraceEvent::epoch});
    if (out.gap < cfg.epsilon) done = true;
  }

  out.counters.base_ops = ws.base_op_count;
  out.counters.weighted_ops = ws.weighted_op_count;
  out.counters.peak_active = int(ws.active_columns.size());
  out.beta = ws.beta;
  out.final_active = ws.active_columns;
  out.time_s = elapsed();
  out.certificate = done;
  if (!done) throw iteration_limit_error(std::move(out));
  return out;
}

/// Dynamic gap screening: starts from the full feature set and permanently
/// removes features whose screening bound clears 1 under the current gap
/// ball. Safe because each removal certifies a zero coefficient at the
/// optimum of the original problem.
inline SolveResult solve_dynamic(const Problem& pb, const SaifConfig& cfg,
                                 const Vector* warm_beta = nullptr) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  SolveResult out;
  out.lambda = pb.lambda;
  out.lambda_max_value = lambda_max(pb);
  if (pb.lambda >= out.lambda_max_value && !pb.unpenalized_col) {
    out.beta = Vector::Zero(pb.p());
    out.objective = primal_objective(pb, out.beta);
    Vector theta = -loss_grad(Vector::Zero(pb.n()), pb.y, pb.loss) / pb.lambda;
    out.dual_value = dual_objective(pb, theta);
    out.gap = clamp_gap(out.objective - out.dual_value, out.objective);
    out.certificate = true;
    out.time_s = elapsed();
    return out;
  }

  CmWorkspace ws(pb.n(), pb.p());
  ws.active_columns = detail::penalized_columns(pb);
  if (warm_beta) {
    if (warm_beta->size() != pb.p())
      throw std::invalid_argument("warm start length mismatch");
    ws.beta = *warm_beta;
    ws.resync_predictor(pb);
  }
  if (pb.unpenalized_col)
    unpenalized_coordinate_update(ws, pb, *pb.unpenalized_col);

  const double alpha = smoothness_alpha(pb.loss);
  Vector best_theta;
  double best_dual = -std::numeric_limits<double>::infinity();
  bool done = false;
  for (std::int64_t iter = 0; iter < cfg.max_outer && !done; ++iter) {
    out.counters.outer_iters = iter + 1;
    double gap_enter = std::numeric_limits<double>::infinity();
    int blocks = 0;
    do {
      const int epochs = std::max(
          cfg.inner_epochs,
          detail::ceil_div(10, int(std::max<size_t>(1, ws.active_columns.size()))));
      cm_epochs(ws, pb, epochs);
      if (pb.unpenalized_col)
        unpenalized_coordinate_update(ws, pb, *pb.unpenalized_col);

      DualPoint dp = dual_point(ws.linear_predictor, pb, ws.active_columns,
                                cfg.refine_dual);
      const double dual_now = dual_objective(pb, dp.theta);
      if (dual_now > best_dual) {
        best_dual = dual_now;
        best_theta = std::move(dp.theta);
      }
      out.objective = primal_objective_at(
          pb, ws.linear_predictor, detail::l1_over(ws.beta, ws.active_columns));
      out.dual_value = best_dual;
      out.gap = clamp_gap(out.objective - out.dual_value, out.objective);
      ++blocks;
      if (blocks == 1) gap_enter = out.gap;
    } while (out.gap >= cfg.epsilon && out.gap > 0.5 * gap_enter && blocks < 64);
    if (out.gap >= cfg.epsilon) {
      if (auto polished =
              support_polished_dual(pb, ws.beta, ws.active_columns)) {
        if (auto adopted = detail::adopt_polished_primal(pb, *polished,
                                                         out.objective, ws))
          out.objective = *adopted;
        const double d_pol = dual_objective(pb, polished->theta);
        if (d_pol > best_dual) {
          best_dual = d_pol;
          best_theta = std::move(polished->theta);
        }
        out.dual_value = best_dual;
        out.gap = clamp_gap(out.objective - best_dual, out.objective);
      }
    }
    const double radius = std::sqrt(2.0 * alpha * out.gap) / pb.lambda;

    std::vector<int> kept;
    kept.reserve(ws.active_columns.size());
    int removed = 0;
    for (int i : ws.active_columns) {
      const double sc = std::abs(pb.X.col(i).dot(best_theta));
      if (sc + pb.X.col_norm(i) * radius < 1.0) {
        if (ws.beta[i] != 0.0) {
          ws.linear_predictor -= ws.beta[i] * pb.X.col(i);
          ws.beta[i] = 0.0;
        }
        ++removed;
      } else {
        kept.push_back(i);
      }
    }
    if (removed > 0) ws.active_columns = std::move(kept);

    if (cfg.record_trace) {
      out.trace.push_back({elapsed(), out.counters.outer_iters,
                           int(ws.active_columns.size()), out.gap,
                           out.dual_value, TraceEvent::epoch});
      if (removed > 0)
        out.trace.push_back({elapsed(), out.counters.outer_iters,
                             int(ws.active_columns.size()), out.gap,
                             out.dual_value, TraceEvent::del});
    }
    if (out.gap < cfg.epsilon) done = true;
  }

  out.counters.base_ops = ws.base_op_count;
  out.counters.weighted_ops = ws.weighted_op_count;
  out.counters.peak_active = int(pb.unpenalized_col ? pb.p() - 1 : pb.p());
  out.beta = ws.beta;
  out.final_active = ws.active_columns;
  out.time_s = elapsed();
  out.certificate = done;
  if (!done) throw iteration_limit_error(std::move(out));
  return out;
}

enum class PathMethod { saif, dynamic, plain, sequential };

/// Solves a strictly descending grid of penalties in order, warm-starting
/// each solve from the previous solution. The `sequential` method screens
/// each step with the ball transported from the previous penalty's dual
/// estimate, then runs plain coordinate minimization on the survivors.
inline std::vector<SolveResult> solve_path(const Problem& problem_template,
                                           const std::vector<double>& lambdas,
                                           PathMethod method,
                                           const SaifConfig& cfg) {
  cfg.validate();
  if (lambdas.empty())
    throw std::invalid_argument("solve_path: empty lambda sequence");
  for (size_t k = 0; k + 1 < lambdas.size(); ++k)
    if (!(lambdas[k + 1] < lambdas[k]))
      throw std::invalid_argument("solve_path: lambdas must be strictly descending");
  for (double l : lambdas)
    if (l <= 0.0) throw std::invalid_argument("solve_path: lambdas must be positive");

  std::vector<SolveResult> results;
  results.reserve(lambdas.size());
  Vector warm;
  bool have_warm = false;
  double cum_time = 0.0;

  // previous dual estimate for the sequential comparator
  double prev_lambda = 0.0;
  Vector prev_theta;
  bool have_prev = false;

  for (double lam : lambdas) {
    Problem pb(problem_template.X, problem_template.y, problem_template.loss,
               lam, problem_template.unpenalized_col);
    SolveResult res;
    switch (method) {
      case PathMethod::saif:
        res = solve(pb, cfg, have_warm ? &warm : nullptr);
        break;
      case PathMethod::dynamic:
        res = solve_dynamic(pb, cfg, have_warm ? &warm : nullptr);
        break;
      case PathMethod::plain:
        res = solve_plain(pb, cfg, have_warm ? &warm : nullptr);
        break;
      case PathMethod::sequential: {
        const auto t0 = std::chrono::steady_clock::now();
        double lam0;
        Vector theta0;
        if (have_prev) {
          lam0 = prev_lambda;
          theta0 = prev_theta;
        } else {
          lam0 = lambda_max(pb);
          theta0 = -loss_grad(Vector::Zero(pb.n()), pb.y, pb.loss) / lam0;
        }
        std::vector<int> survivors = detail::penalized_columns(pb);
        if (lam < lam0) {
          Ball ball = sequential_ball(theta0, lam0, lam, pb);
          std::vector<int> kept;
          for (int i : survivors) {
            const double sc = std::abs(pb.X.col(i).dot(ball.center));
            if (sc + pb.X.col_norm(i) * ball.radius >= 1.0) kept.push_back(i);
          }
          survivors = std::move(kept);
        }
        CmWorkspace ws(pb.n(), pb.p());
        ws.active_columns = survivors;
        if (have_warm) {
          ws.beta = warm;
          for (Eigen::Index i = 0; i < pb.p(); ++i)
            if (pb.penalized(i) &&
                std::find(survivors.begin(), survivors.end(), int(i)) ==
                    survivors.end())
              ws.beta[i] = 0.0;
          ws.resync_predictor(pb);
        }
        if (pb.unpenalized_col)
          unpenalized_coordinate_update(ws, pb, *pb.unpenalized_col);
        bool done = false;
        for (std::int64_t it = 0; it < cfg.max_outer && !done; ++it) {
          res.counters.outer_iters = it + 1;
          const int epochs = std::max(
              cfg.inner_epochs,
              detail::ceil_div(10, int(std::max<size_t>(1, survivors.size()))));
          cm_epochs(ws, pb, epochs);
          if (pb.unpenalized_col)
            unpenalized_coordinate_update(ws, pb, *pb.unpenalized_col);
          DualPoint dp = dual_point(ws.linear_predictor, pb,
                                    ws.active_columns, cfg.refine_dual);
          res.objective = primal_objective_at(
              pb, ws.linear_predictor, detail::l1_over(ws.beta, survivors));
          res.dual_value = dual_objective(pb, dp.theta);
          res.gap = clamp_gap(res.objective - res.dual_value, res.objective);
          if (res.gap < cfg.epsilon) done = true;
        }
        res.counters.base_ops = ws.base_op_count;
        res.counters.weighted_ops = ws.weighted_op_count;
        res.counters.peak_active = int(survivors.size());
        res.beta = ws.beta;
        res.final_active = survivors;
        res.lambda = lam;
        res.lambda_max_value = lambda_max(pb);
        res.certificate = done;
        res.time_s = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - t0)
                         .count();
        if (!done) throw iteration_limit_error(std::move(res));
        break;
      }
    }

    // dual estimate at this lambda feeds the next sequential screen
    if (method == PathMethod::sequential) {
      Vector pred = pb.X.matrix() * res.beta;
      std::vector<int> cols = detail::penalized_columns(pb);
      DualPoint dp = dual_point(pred, pb, cols, cfg.refine_dual);
      prev_theta = std::move(dp.theta);
      prev_lambda = lam;
      have_prev = true;
    }

    warm = res.beta;
    have_warm = true;
    cum_time += res.time_s;
    res.cum_time_s = cum_time;
    results.push_back(std::move(res));
  }
  return results;
}

}  // namespace saif

#endif  // SAIF_BASELINES_HPP
