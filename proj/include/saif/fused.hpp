#ifndef SAIF_FUSED_HPP
#define SAIF_FUSED_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "saif/saif_engine.hpp"

namespace saif {

/// A tree over the feature set; edges are 1-based (a, b) pairs and each
/// edge penalizes the difference beta_a - beta_b.
struct FeatureTree {
  int node_count = 0;
  std::vector<std::pair<int, int>> edges;
  int root = 1;  // 1-based
};

/// Validates the edge list as a spanning tree and picks a root (highest
/// degree, ties to the lowest index) unless one is supplied.
inline FeatureTree make_feature_tree(int node_count,
                                     std::vector<std::pair<int, int>> edges,
                                     int root = 0) {
  if (node_count < 1)
    throw std::invalid_argument("tree must have at least one node");
  if (int(edges.size()) != node_count - 1)
    throw std::invalid_argument(
        "tree validation failed: expected " + std::to_string(node_count - 1) +
        " edges, got " + std::to_string(edges.size()));
  std::vector<int> dsu(node_count);
  for (int i = 0; i < node_count; ++i) dsu[i] = i;
  const auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  std::vector<int> degree(node_count, 0);
  for (auto [a, b] : edges) {
    if (a < 1 || a > node_count || b < 1 || b > node_count)
      throw std::invalid_argument("tree validation failed: node index out of range");
    if (a == b)
      throw std::invalid_argument("tree validation failed: self-loop at node " +
                                  std::to_string(a));
    const int ra = find(a - 1), rb = find(b - 1);
    if (ra == rb)
      throw std::invalid_argument(
          "tree validation failed: cycle through edge (" + std::to_string(a) +
          "," + std::to_string(b) + ")");
    dsu[ra] = rb;
    ++degree[a - 1];
    ++degree[b - 1];
  }
  // p-1 acyclic edges on p nodes are necessarily connected, but a clear
  // message beats relying on the count when both defects coexist
  const int r0 = find(0);
  for (int i = 1; i < node_count; ++i)
    if (find(i) != r0)
      throw std::invalid_argument("tree validation failed: node " +
                                  std::to_string(i + 1) + " disconnected");
  FeatureTree t;
  t.node_count = node_count;
  t.edges = std::move(edges);
  if (root >= 1 && root <= node_count) {
    t.root = root;
  } else {
    int best = 0;
    for (int i = 1; i < node_count; ++i)
      if (degree[i] > degree[best]) best = i;
    t.root = best + 1;
  }
  return t;
}

/// Sparse column transform T with D*T = [I | 0]. Column e holds +-1 on the
/// off-root component of edge e; the last column is all ones. Stored as
/// the rooted parent structure rather than explicit columns.
struct TransformMatrix {
  int p = 0;
  int root0 = 0;                     // 0-based root node
  std::vector<int> parent;           // 0-based, -1 at the root
  std::vector<int> parent_edge;      // edge column linking node to parent
  std::vector<std::int8_t> edge_sign;  // s_e per edge column
  std::vector<int> bfs_order;        // root first

  /// beta = T * [beta_tilde; b]; the input is the stacked length-p vector.
  Vector apply(const Vector& stacked) const {
    if (stacked.size() != p)
      throw std::invalid_argument("transform apply: length mismatch");
    Vector beta(p);
    beta[root0] = stacked[p - 1];
    for (int v : bfs_order) {
      if (v == root0) continue;
      beta[v] = beta[parent[v]] +
                double(edge_sign[parent_edge[v]]) * stacked[parent_edge[v]];
    }
    return beta;
  }

  /// Dense {0, +-1} representation, for verification at small sizes.
  Matrix dense() const {
    Matrix T = Matrix::Zero(p, p);
    T.col(p - 1).setOnes();
    for (int v = 0; v < p; ++v) {
      int u = v;
      while (u != root0) {
        T(v, parent_edge[u]) = double(edge_sign[parent_edge[u]]);
        u = parent[u];
      }
    }
    return T;
  }
};

/// Difference matrix of the tree, row e = beta_a - beta_b. Dense helper
/// for verification.
inline Matrix tree_difference_matrix(const FeatureTree& tree) {
  Matrix D = Matrix::Zero(int(tree.edges.size()), tree.node_count);
  for (size_t e = 0; e < tree.edges.size(); ++e) {
    D(Eigen::Index(e), tree.edges[e].first - 1) = 1.0;
    D(Eigen::Index(e), tree.edges[e].second - 1) = -1.0;
  }
  return D;
}

/// Roots the tree and orients every edge so that row e of D*T equals the
/// e-th unit row: node coordinates reconstruct as signed path sums from
/// the root.
inline TransformMatrix build_transform(const FeatureTree& tree) {
  const int p = tree.node_count;
  TransformMatrix T;
  T.p = p;
  T.root0 = tree.root - 1;
  T.parent.assign(p, -1);
  T.parent_edge.assign(p, -1);
  T.edge_sign.assign(std::max(0, p - 1), 0);

  std::vector<std::vector<std::pair<int, int>>> adj(p);  // (neighbor, edge)
  for (size_t e = 0; e < tree.edges.size(); ++e) {
    const int a = tree.edges[e].first - 1, b = tree.edges[e].second - 1;
    adj[a].push_back({b, int(e)});
    adj[b].push_back({a, int(e)});
  }

  T.bfs_order.clear();
  T.bfs_order.reserve(p);
  std::vector<char> seen(p, 0);
  std::vector<int> queue{T.root0};
  seen[T.root0] = 1;
  for (size_t q = 0; q < queue.size(); ++q) {
    const int u = queue[q];
    T.bfs_order.push_back(u);
    for (auto [v, e] : adj[u]) {
      if (seen[v]) continue;
      seen[v] = 1;
      T.parent[v] = u;
      T.parent_edge[v] = e;
      // the child side carries the column; sign +1 when the child is the
      // minuend of the difference row
      T.edge_sign[e] = (tree.edges[e].first - 1 == v) ? 1 : -1;
      queue.push_back(v);
    }
  }
  return T;
}

/// X_tilde = X*T computed by column accumulation over subtrees.
inline DesignMatrix transform_design(const DesignMatrix& X,
                                     const TransformMatrix& T) {
  if (X.cols() != T.p)
    throw std::invalid_argument("transform_design: column count mismatch");
  const Eigen::Index n = X.rows();
  Matrix acc = X.matrix();
  Matrix out = Matrix::Zero(n, T.p);
  for (auto it = T.bfs_order.rbegin(); it != T.bfs_order.rend(); ++it) {
    const int v = *it;
    if (v == T.root0) continue;
    out.col(T.parent_edge[v]) = double(T.edge_sign[T.parent_edge[v]]) * acc.col(v);
    acc.col(T.parent[v]) += acc.col(v);
  }
  out.col(T.p - 1) = acc.col(T.root0);
  return DesignMatrix(std::move(out));
}

/// Smallest penalty with a constant solution: minimize the unpenalized
/// coordinate first, then score the penalized columns at that point.
inline double fused_lambda_max(const DesignMatrix& Xtilde, const Vector& y,
                               LossKind loss) {
  const Eigen::Index p = Xtilde.cols();
  Problem pb(Xtilde, y, loss, 1.0, p - 1);
  CmWorkspace ws(pb.n(), pb.p());
  unpenalized_coordinate_update(ws, pb, p - 1);
  const Vector g = loss_grad(ws.linear_predictor, y, loss);
  double m = 0.0;
  for (Eigen::Index i = 0; i + 1 < p; ++i)
    m = std::max(m, std::abs(Xtilde.col(i).dot(g)));
  return m;
}

/// Optimal feasible scaling of a dual estimate for squared-loss problems:
/// the unconstrained maximizer of the dual objective along the ray,
/// clamped to the feasible range of scalings.
inline double fused_dual_scale(const Vector& theta_hat, const DesignMatrix& Xbar,
                               const Vector& y, double lambda) {
  const double sq = theta_hat.squaredNorm();
  if (sq == 0.0) return 0.0;
  double mx = 0.0;
  for (Eigen::Index i = 0; i < Xbar.cols(); ++i)
    mx = std::max(mx, std::abs(Xbar.col(i).dot(theta_hat)));
  const double cap =
      mx > 0.0 ? 1.0 / mx : std::numeric_limits<double>::infinity();
  const double best = y.dot(theta_hat) / (lambda * sq);
  return std::min(std::max(best, -cap), cap);
}

/// Tree fused LASSO by reparameterization: transform the design, run the
/// active-set solver with the all-ones column unpenalized, and map the
/// solution back to node coordinates.
inline SolveResult solve_fused(const DesignMatrix& X, const Vector& y,
                               const FeatureTree& tree, double lambda,
                               LossKind loss, const SaifConfig& cfg) {
  if (X.cols() != tree.node_count)
    throw std::invalid_argument("solve_fused: design/tree size mismatch");
  TransformMatrix T = build_transform(tree);
  DesignMatrix Xt = transform_design(X, T);

  if (tree.node_count == 1) {
    // no differences to penalize; just fit the constant coordinate
    Problem pb(Xt, y, loss, lambda, 0);
    CmWorkspace ws(pb.n(), pb.p());
    unpenalized_coordinate_update(ws, pb, 0);
    SolveResult out;
    out.beta = T.apply(ws.beta);
    out.objective = primal_objective_at(pb, ws.linear_predictor, 0.0);
    out.certificate = true;
    out.lambda = lambda;
    return out;
  }

  Problem pb(Xt, y, loss, lambda, Eigen::Index(tree.node_count - 1));
  SolveResult out = solve(pb, cfg);
  out.beta = T.apply(out.beta);
  return out;
}

}  // namespace saif

#endif  // SAIF_FUSED_HPP
