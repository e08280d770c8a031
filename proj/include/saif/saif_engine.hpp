#ifndef SAIF_SAIF_ENGINE_HPP
#define SAIF_SAIF_ENGINE_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "saif/dual_geometry.hpp"
#include "saif/solver_cm.hpp"

namespace saif {

enum class BallMode { gap_only, gap_and_sequential };

struct SaifConfig {
  double epsilon = 1e-8;        // stopping duality gap
  double c = 1.0;               // recruit-batch sizing constant
  double zeta = 0.5;            // violation-tolerance fraction for ADD
  int inner_epochs = 1;         // cyclic passes per outer loop (>= 10 updates enforced)
  double factor_growth = 10.0;  // growth applied to the radius factor
  BallMode ball_mode = BallMode::gap_only;
  bool refine_dual = true;      // squared-loss dual scaling refinement
  std::int64_t max_outer = 500000;
  bool record_trace = true;

  void validate() const {
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    if (c <= 0.0) throw std::invalid_argument("c must be positive");
    if (zeta <= 0.0) throw std::invalid_argument("zeta must be positive");
    if (factor_growth <= 1.0)
      throw std::invalid_argument("factor_growth must exceed 1");
  }
};

enum class TraceEvent { epoch, add, del, factor_growth, certificate };

inline const char* trace_event_name(TraceEvent e) {
  switch (e) {
    case TraceEvent::epoch: return "EPOCH";
    case TraceEvent::add: return "ADD";
    case TraceEvent::del: return "DEL";
    case TraceEvent::factor_growth: return "DELTA";
    case TraceEvent::certificate: return "CERT";
  }
  return "?";
}

struct TraceRecord {
  double t_s = 0.0;
  std::int64_t iter = 0;
  int p_t = 0;
  double gap = 0.0;
  double dual_value = 0.0;
  TraceEvent event = TraceEvent::epoch;
};

struct Counters {
  std::uint64_t base_ops = 0;
  std::uint64_t weighted_ops = 0;
  std::int64_t add_count = 0;   // features ever moved by ADD
  int peak_active = 0;
  std::int64_t outer_iters = 0;
};

struct SolveResult {
  Vector beta;        // full length p, screened entries zero
  std::vector<int> final_active;
  double objective = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  bool certificate = false;
  Counters counters;
  std::vector<TraceRecord> trace;
  double lambda = 0.0;
  double lambda_max_value = 0.0;
  double time_s = 0.0;
  double cum_time_s = 0.0;  // filled by path runs

  Eigen::Index support_size() const {
    Eigen::Index s = 0;
    for (Eigen::Index i = 0; i < beta.size(); ++i)
      if (beta[i] != 0.0) ++s;
    return s;
  }
};

class iteration_limit_error : public std::runtime_error {
 public:
  SolveResult result;
  explicit iteration_limit_error(SolveResult r)
      : std::runtime_error("outer iteration budget exhausted"),
        result(std::move(r)) {}
};

/// Mutable solver state: a partition of the penalized features into the
/// set currently optimized and the set screened out, plus the dual-space
/// ball that drives moves between them.
struct SaifState {
  std::vector<int> active;     // insertion-ordered
  std::vector<int> remaining;  // ascending
  CmWorkspace workspace;
  Vector theta;           // screening ball center
  Vector feasible_dual;   // projected feasible dual point (gap-ball center)
  double radius = std::numeric_limits<double>::infinity();  // factor-scaled
  double full_radius = std::numeric_limits<double>::infinity();  // unscaled ball
  double gap_radius = std::numeric_limits<double>::infinity();  // unscaled gap ball
  double radius_factor = 1.0;  // in (0,1], grown to 1 before any safety claim
  bool recruiting = true;
  int recruit_batch = 1;   // features considered per ADD invocation
  int violation_cap = 1;   // ADD stops once a candidate has this many violators
  bool trivially_solved = false;  // lambda at or above lambda_max
  double lambda_max_value = 0.0;
  Vector start_scores;     // |x_i' f'(start predictor)| per column
  Vector start_grad;       // f'(start predictor)
  double gap = std::numeric_limits<double>::infinity();
  double primal_value = 0.0;
  double dual_value = 0.0;
  std::vector<TraceRecord> trace;
};

namespace detail {

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Sizing rule for the initial active set and each ADD batch.
inline int recruit_batch_size(double c, double score_median, double score_max,
                              double lambda, int feature_count) {
  const double arg = (score_median + score_max) / lambda;
  double h = 0.0;
  if (arg > 0.0)
    h = std::ceil(c * std::log(arg) * std::log(double(feature_count)));
  if (!(h >= 1.0)) return 1;
  if (h >= double(feature_count)) return feature_count;
  return int(h);
}

}  // namespace detail

/// Builds the starting state: scores every penalized feature by its
/// correlation with the loss gradient at the start point, seeds the active
/// set with the top scores, and sets the radius factor to lambda over
/// lambda_max. Problems with an unpenalized column first minimize over it
/// exactly, so the start point and lambda_max match the reduced problem.
inline SaifState init_active_set(const Problem& pb, const SaifConfig& cfg) {
  cfg.validate();
  if (pb.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");

  SaifState st;
  st.workspace = CmWorkspace(pb.n(), pb.p());
  if (pb.unpenalized_col)
    unpenalized_coordinate_update(st.workspace, pb, *pb.unpenalized_col);

  st.start_grad = loss_grad(st.workspace.linear_predictor, pb.y, pb.loss);
  st.start_scores = Vector::Zero(pb.p());
  std::vector<double> penalized_scores;
  std::vector<int> penalized_cols;
  for (Eigen::Index i = 0; i < pb.p(); ++i) {
    if (!pb.penalized(i)) continue;
    st.start_scores[i] = std::abs(pb.X.col(i).dot(st.start_grad));
    penalized_scores.push_back(st.start_scores[i]);
    penalized_cols.push_back(int(i));
  }
  if (penalized_cols.empty())
    throw std::invalid_argument("problem has no penalized features");

  st.lambda_max_value =
      *std::max_element(penalized_scores.begin(), penalized_scores.end());
  if (pb.lambda >= st.lambda_max_value) {
    st.trivially_solved = true;
    st.remaining = penalized_cols;
    st.radius_factor = 1.0;
    st.recruiting = false;
    return st;
  }

  const double md = detail::median(penalized_scores);
  st.recruit_batch = detail::recruit_batch_size(
      cfg.c, md, st.lambda_max_value, pb.lambda, int(penalized_cols.size()));
  st.violation_cap = int(std::ceil(cfg.zeta * st.recruit_batch));

  std::vector<int> order = penalized_cols;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (st.start_scores[a] != st.start_scores[b])
      return st.start_scores[a] > st.start_scores[b];
    return a < b;
  });
  st.active.assign(order.begin(), order.begin() + st.recruit_batch);
  st.remaining.assign(order.begin() + st.recruit_batch, order.end());
  std::sort(st.remaining.begin(), st.remaining.end());
  st.workspace.active_columns = st.active;

  st.radius_factor = std::min(1.0, pb.lambda / st.lambda_max_value);
  st.recruiting = true;
  return st;
}

namespace detail {
/// |x_i' v| for the listed columns, written into out[i].
inline void fill_abs_products(const Problem& pb, const Vector& v,
                              const std::vector<int>& cols, Vector& out) {
  for (int i : cols) out[i] = std::abs(pb.X.col(i).dot(v));
}
}  // namespace detail

/// Moves every active feature whose screening upper bound clears 1 back to
/// the remaining set, zeroing its coefficient. Zero coordinates screen at
/// the factor-scaled radius (their removal leaves the iterate untouched
/// and is undone by a later recruit if needed); loaded coordinates screen
/// at the unscaled radius, where the test is an actual certificate for the
/// current sub-problem. `abs_xtheta` may carry precomputed |x_i' theta|.
inline int del_step(SaifState& st, const Problem& pb,
                    const Vector* abs_xtheta = nullptr) {
  Vector local;
  if (!abs_xtheta) {
    local = Vector::Zero(pb.p());
    detail::fill_abs_products(pb, st.theta, st.active, local);
    abs_xtheta = &local;
  }
  std::vector<int> kept;
  kept.reserve(st.active.size());
  int removed = 0;
  for (int i : st.active) {
    const double r_i =
        st.workspace.beta[i] == 0.0 ? st.radius : st.full_radius;
    const double bound = (*abs_xtheta)[i] + pb.X.col_norm(i) * r_i;
    if (bound < 1.0) {
      if (st.workspace.beta[i] != 0.0) {
        st.workspace.linear_predictor -= st.workspace.beta[i] * pb.X.col(i);
        st.workspace.beta[i] = 0.0;
      }
      st.remaining.push_back(i);
      ++removed;
    } else {
      kept.push_back(i);
    }
  }
  if (removed > 0) {
    st.active = std::move(kept);
    st.workspace.active_columns = st.active;
    std::sort(st.remaining.begin(), st.remaining.end());
  }
  return removed;
}

/// True when every remaining feature's screening upper bound sits below 1
/// at the current (factor-scaled) radius.
inline bool stop_add_check(const SaifState& st, const Problem& pb,
                           const Vector* abs_xtheta = nullptr) {
  for (int i : st.remaining) {
    const double sc =
        abs_xtheta ? (*abs_xtheta)[i] : std::abs(pb.X.col(i).dot(st.theta));
    if (sc + pb.X.col_norm(i) * st.radius >= 1.0) return false;
  }
  return true;
}

/// Recruits up to `recruit_batch` features from the remaining set. Each
/// round picks the feature most correlated with the ball center and counts
/// how many others could still beat its lower bound; the round stops once
/// that count reaches `violation_cap`, or once the candidate's own
/// screening upper bound sits below 1 (it then cannot be a violator at
/// the current ball, and neither can the rest of the remaining set).
inline int add_step(SaifState& st, const Problem& pb, const SaifConfig&,
                    const Vector* abs_xtheta = nullptr) {
  if (st.remaining.empty()) return 0;
  Vector local;
  if (!abs_xtheta) {
    local = Vector::Zero(pb.p());
    detail::fill_abs_products(pb, st.theta, st.remaining, local);
    abs_xtheta = &local;
  }
  const Vector& sc = *abs_xtheta;
  int added = 0;
  for (int l = 0; l < st.recruit_batch && !st.remaining.empty(); ++l) {
    size_t best_pos = 0;
    for (size_t k = 1; k < st.remaining.size(); ++k)
      if (sc[st.remaining[k]] > sc[st.remaining[best_pos]]) best_pos = k;
    const int i = st.remaining[best_pos];
    if (sc[i] + pb.X.col_norm(i) * st.radius < 1.0) break;
    const double lower = std::abs(sc[i] - pb.X.col_norm(i) * st.radius);
    int violators = 0;
    for (int j : st.remaining) {
      if (j == i) continue;
      if (lower <= sc[j] + pb.X.col_norm(j) * st.radius) ++violators;
      if (violators >= st.violation_cap) break;
    }
    if (violators >= st.violation_cap) break;
    st.active.push_back(i);
    st.remaining.erase(st.remaining.begin() + best_pos);
    ++added;
  }
  if (added > 0) st.workspace.active_columns = st.active;
  return added;
}

namespace detail {

inline double active_l1(const SaifState& st) {
  double l1 = 0.0;
  for (int i : st.active) l1 += std::abs(st.workspace.beta[i]);
  return l1;
}

/// Installs the polished coefficients as the iterate when they strictly
/// improve the objective (the predictor is y - lambda*theta by
/// construction). Returns the new objective value on adoption.
inline std::optional<double> adopt_polished_primal(const Problem& pb,
                                                   const PolishedDual& pol,
                                                   double current_primal,
                                                   CmWorkspace& ws) {
  if (pol.coef.size() == 0) return std::nullopt;
  const double cand = 0.5 * (pb.lambda * pol.theta).squaredNorm() +
                      pb.lambda * pol.coef.lpNorm<1>();
  if (!(cand < current_primal)) return std::nullopt;
  for (int i : ws.active_columns) ws.beta[i] = 0.0;
  for (size_t k = 0; k < pol.support.size(); ++k)
    ws.beta[pol.support[k]] = pol.coef[Eigen::Index(k)];
  if (pb.unpenalized_col) ws.beta[*pb.unpenalized_col] = pol.unpenalized_coef;
  ws.linear_predictor = pb.y - pb.lambda * pol.theta;
  return cand;
}

}  // namespace detail

/// The outer loop: inner coordinate passes on the active set, a dual ball
/// estimate, factor-scaled screening (DEL), recruiting (ADD) until the
/// remaining set certifiably screens clean, then plain gap pursuit. The
/// terminal certificate re-screens the remaining set with the unscaled
/// gap-ball radius before the result is accepted.
inline SolveResult solve(const Problem& pb, const SaifConfig& cfg,
                         const Vector* warm_beta = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  SaifState st = init_active_set(pb, cfg);
  SolveResult out;
  out.lambda = pb.lambda;
  out.lambda_max_value = st.lambda_max_value;

  if (st.trivially_solved) {
    out.beta = st.workspace.beta;  // zero aside from any unpenalized column
    out.objective = primal_objective_at(pb, st.workspace.linear_predictor, 0.0);
    DualPoint dp = dual_point(st.workspace.linear_predictor, pb, st.remaining,
                              /*refine=*/false);
    // at lambda >= lambda_max the gradient-mapped point is already feasible
    out.dual_value = dual_objective(pb, dp.theta);
    out.gap = clamp_gap(out.objective - out.dual_value, out.objective);
    out.certificate = true;
    out.time_s = elapsed();
    return out;
  }

  if (warm_beta) {
    if (warm_beta->size() != pb.p())
      throw std::invalid_argument("warm start length mismatch");
    std::vector<int> move;
    for (int i : st.remaining)
      if ((*warm_beta)[i] != 0.0 && pb.penalized(i)) move.push_back(i);
    for (int i : move) {
      st.active.push_back(i);
      st.remaining.erase(
          std::find(st.remaining.begin(), st.remaining.end(), i));
    }
    for (int i : st.active) st.workspace.beta[i] = (*warm_beta)[i];
    st.workspace.active_columns = st.active;
    st.workspace.resync_predictor(pb);
  }

  Counters& ct = out.counters;
  ct.peak_active = int(st.active.size());
  const double alpha = smoothness_alpha(pb.loss);
  Vector abs_xtheta = Vector::Zero(pb.p());

  // Keep the best projected dual point seen for the current constraint
  // set: the primal never increases, so the gap ball can only shrink
  // between recruit events. ADD introduces constraints and invalidates
  // the kept point; DEL only enlarges the feasible region.
  Vector best_theta;
  double best_dual = -std::numeric_limits<double>::infinity();
  bool have_best = false;

  auto record = [&](TraceEvent ev) {
    if (!cfg.record_trace) return;
    st.trace.push_back({elapsed(), ct.outer_iters, int(st.active.size()),
                        st.gap, st.dual_value, ev});
  };

  bool done = false;
  for (std::int64_t iter = 0; iter < cfg.max_outer && !done; ++iter) {
    ct.outer_iters = iter + 1;

    // Inner schedule: repeat K-sized coordinate blocks until the gap has
    // halved (or a cap); screening scans then amortize over the slow
    // convergence tail instead of dominating it.
    double gap_enter = std::numeric_limits<double>::infinity();
    int blocks = 0;
    do {
      if (!st.active.empty()) {
        const int epochs = std::max(
            cfg.inner_epochs, detail::ceil_div(10, int(st.active.size())));
        cm_epochs(st.workspace, pb, epochs);
      }
      if (pb.unpenalized_col)
        unpenalized_coordinate_update(st.workspace, pb, *pb.unpenalized_col);

      DualPoint dp = dual_point(st.workspace.linear_predictor, pb, st.active,
                                cfg.refine_dual);
      const double dual_now = dual_objective(pb, dp.theta);
      if (!have_best || dual_now > best_dual) {
        best_theta = std::move(dp.theta);
        best_dual = dual_now;
        have_best = true;
      }
      st.primal_value = primal_objective_at(pb, st.workspace.linear_predictor,
                                            detail::active_l1(st));
      st.dual_value = best_dual;
      st.gap = clamp_gap(st.primal_value - st.dual_value, st.primal_value);
      ++blocks;
      if (blocks == 1) gap_enter = st.gap;
    } while (st.gap >= cfg.epsilon && st.gap > 0.5 * gap_enter &&
             blocks < 64 && !st.active.empty());

    if (st.gap >= cfg.epsilon) {
      if (auto polished =
              support_polished_dual(pb, st.workspace.beta, st.active)) {
        if (auto adopted = detail::adopt_polished_primal(
                pb, *polished, st.primal_value, st.workspace))
          st.primal_value = *adopted;
        const double d_pol = dual_objective(pb, polished->theta);
        if (d_pol > best_dual) {
          best_dual = d_pol;
          best_theta = std::move(polished->theta);
          have_best = true;
        }
        st.dual_value = best_dual;
        st.gap = clamp_gap(st.primal_value - best_dual, st.primal_value);
      }
    }

    st.feasible_dual = best_theta;
    detail::fill_abs_products(pb, st.feasible_dual, st.active, abs_xtheta);
    if (st.recruiting)
      detail::fill_abs_products(pb, st.feasible_dual, st.remaining, abs_xtheta);
    st.gap_radius = std::sqrt(2.0 * alpha * st.gap) / pb.lambda;

    st.theta = st.feasible_dual;
    double ball_radius = st.gap_radius;
    if (cfg.ball_mode == BallMode::gap_and_sequential && !st.active.empty()) {
      double lam0 = 0.0;
      for (int i : st.active) lam0 = std::max(lam0, st.start_scores[i]);
      if (pb.lambda < lam0) {
        Vector theta0 = -st.start_grad / lam0;
        Ball seq = sequential_ball(theta0, lam0, pb.lambda, pb,
                                   std::optional<Vector>(st.feasible_dual));
        Ball inter = intersect_balls(seq, Ball{st.feasible_dual, st.gap_radius});
        if (inter.radius < ball_radius) {
          ball_radius = inter.radius;
          st.theta = std::move(inter.center);
          detail::fill_abs_products(pb, st.theta, st.active, abs_xtheta);
          if (st.recruiting)
            detail::fill_abs_products(pb, st.theta, st.remaining, abs_xtheta);
        }
      }
    }
    record(TraceEvent::epoch);

    if (!st.recruiting && st.gap < cfg.epsilon) {
      // terminal screen of the remaining set at the unscaled gap-ball radius
      bool cert = true;
      for (int i : st.remaining) {
        const double sc = std::abs(pb.X.col(i).dot(st.feasible_dual));
        if (sc + pb.X.col_norm(i) * st.gap_radius >= 1.0) {
          cert = false;
          break;
        }
      }
      record(TraceEvent::certificate);
      if (cert) {
        out.certificate = true;
        done = true;
        break;
      }
      st.recruiting = true;  // resume recruiting; safety over speed
      detail::fill_abs_products(pb, st.feasible_dual, st.remaining, abs_xtheta);
    }

    st.radius = st.radius_factor * ball_radius;
    st.full_radius = ball_radius;
    const int removed = del_step(st, pb, &abs_xtheta);
    if (removed > 0) record(TraceEvent::del);

    if (st.recruiting) {
      if (stop_add_check(st, pb, &abs_xtheta)) {
        if (st.radius_factor < 1.0) {
          st.radius_factor = std::min(cfg.factor_growth * st.radius_factor, 1.0);
          record(TraceEvent::factor_growth);
        } else {
          st.recruiting = false;
        }
      } else {
        const int added = add_step(st, pb, cfg, &abs_xtheta);
        if (added > 0) {
          ct.add_count += added;
          have_best = false;  // new dual constraints: drop the kept point
          best_dual = -std::numeric_limits<double>::infinity();
          record(TraceEvent::add);
        }
      }
    }
    ct.peak_active = std::max(ct.peak_active, int(st.active.size()));
  }

  ct.base_ops = st.workspace.base_op_count;
  ct.weighted_ops = st.workspace.weighted_op_count;
  out.beta = st.workspace.beta;
  out.final_active = st.active;
  out.objective = st.primal_value;
  out.dual_value = st.dual_value;
  out.gap = st.gap;
  out.trace = std::move(st.trace);
  out.time_s = elapsed();
  if (!done) {
    out.certificate = false;
    throw iteration_limit_error(std::move(out));
  }
  return out;
}

}  // namespace saif

#endif  // SAIF_SAIF_ENGINE_HPP
