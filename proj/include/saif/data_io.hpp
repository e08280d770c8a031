#ifndef SAIF_DATA_IO_HPP
#define SAIF_DATA_IO_HPP

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "saif/fused.hpp"

namespace saif {

class parse_error : public std::runtime_error {
 public:
  std::size_t line = 0;
  parse_error(const std::string& msg, std::size_t line_no)
      : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"),
        line(line_no) {}
};

struct Dataset {
  DesignMatrix X;
  Vector y;
  std::vector<std::string> feature_names;
  std::string provenance;
  std::uint64_t seed = 0;
  Vector true_beta;  // filled by the synthetic generator, else empty
};

/// Deterministic generator independent of the standard library's
/// distribution implementations, so fixed seeds reproduce byte-identical
/// data across toolchains.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  std::uint64_t below(std::uint64_t n) { return n ? next_u64() % n : 0; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct LibsvmOptions {
  // maps multiclass labels: > 4 becomes +1, everything else -1
  bool relabel_above_4 = false;
};

/// Reads "label idx:val ..." lines with 1-based indices into a dense
/// column-accessible matrix. Duplicate indices within a line keep the last
/// value and warn.
inline Dataset read_libsvm(const std::string& path,
                           const LibsvmOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<double> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  Eigen::Index p = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    double label;
    try {
      std::size_t used = 0;
      label = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw parse_error("malformed label '" + tok + "'", line_no);
    }
    std::vector<std::pair<int, double>> row;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw parse_error("malformed feature token '" + tok + "'", line_no);
      int idx;
      double val;
      try {
        std::size_t u1 = 0, u2 = 0;
        idx = std::stoi(tok.substr(0, colon), &u1);
        val = std::stod(tok.substr(colon + 1), &u2);
        if (u1 != colon || u2 != tok.size() - colon - 1)
          throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw parse_error("malformed feature token '" + tok + "'", line_no);
      }
      if (idx < 1) throw parse_error("feature index must be >= 1", line_no);
      bool dup = false;
      for (auto& [i0, v0] : row) {
        if (i0 == idx) {
          v0 = val;  // last wins
          dup = true;
          break;
        }
      }
      if (dup) {
        std::cerr << "warning: duplicate index " << idx << " on line "
                  << line_no << ", keeping last value\n";
      } else {
        row.push_back({idx, val});
      }
      p = std::max(p, Eigen::Index(idx));
    }
    labels.push_back(opts.relabel_above_4 ? (label > 4.0 ? 1.0 : -1.0) : label);
    rows.push_back(std::move(row));
  }

  const Eigen::Index n = Eigen::Index(labels.size());
  Matrix X = Matrix::Zero(n, p);
  Vector y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    y[j] = labels[size_t(j)];
    for (auto [idx, val] : rows[size_t(j)]) X(j, idx - 1) = val;
  }
  if (!y.allFinite()) throw std::runtime_error("labels contain NaN/Inf");
  Dataset d;
  d.X = DesignMatrix(std::move(X));
  d.y = std::move(y);
  d.provenance = "libsvm:" + path;
  return d;
}

inline void write_libsvm(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  for (Eigen::Index j = 0; j < data.X.rows(); ++j) {
    out << data.y[j];
    for (Eigen::Index i = 0; i < data.X.cols(); ++i)
      if (data.X.matrix()(j, i) != 0.0)
        out << ' ' << (i + 1) << ':' << data.X.matrix()(j, i);
    out << '\n';
  }
}

/// y = X*beta + noise with uniform design entries in [-10, 10], the
/// requested fraction of coefficients drawn uniformly from
/// [-1,-0.1] u [0.1,1], and unit normal noise. Deterministic per seed.
inline Dataset gen_synthetic_regression(Eigen::Index n, Eigen::Index p,
                                        double active_fraction,
                                        std::uint64_t seed) {
  if (n < 0 || p <= 0)
    throw std::invalid_argument("generator needs n >= 0 and p >= 1");
  if (active_fraction < 0.0 || active_fraction > 1.0)
    throw std::invalid_argument("active_fraction must lie in [0, 1]");
  DeterministicRng rng(seed);

  Matrix X(n, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < n; ++j) X(j, i) = rng.uniform(-10.0, 10.0);

  Vector beta = Vector::Zero(p);
  const auto k = Eigen::Index(std::llround(active_fraction * double(p)));
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < p; ++i) perm[size_t(i)] = i;
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto j = i + Eigen::Index(rng.below(std::uint64_t(p - i)));
    std::swap(perm[size_t(i)], perm[size_t(j)]);
    const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
    beta[perm[size_t(i)]] = sign * rng.uniform(0.1, 1.0);
  }

  Vector noise(n);
  for (Eigen::Index j = 0; j < n; ++j) noise[j] = rng.normal();

  Dataset d;
  d.y = X * beta + noise;
  d.X = DesignMatrix(std::move(X));
  d.true_beta = std::move(beta);
  d.seed = seed;
  d.provenance = "synthetic(n=" + std::to_string(n) + ",p=" + std::to_string(p) +
                 ",active_fraction=" + std::to_string(active_fraction) +
                 ",seed=" + std::to_string(seed) + ")";
  return d;
}

/// CSV lines "a,b" of 1-based node pairs; validates the tree property.
inline FeatureTree read_edge_list(const std::string& path, int p) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw parse_error("expected 'a,b'", line_no);
    try {
      const int a = std::stoi(line.substr(0, comma));
      const int b = std::stoi(line.substr(comma + 1));
      edges.push_back({a, b});
    } catch (const std::exception&) {
      throw parse_error("expected 'a,b'", line_no);
    }
  }
  return make_feature_tree(p, std::move(edges));
}

inline void write_edge_list(const std::string& path, const FeatureTree& tree) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (auto [a, b] : tree.edges) out << a << ',' << b << '\n';
}

inline FeatureTree gen_chain_tree(int p) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < p; ++i) edges.push_back({i, i + 1});
  return make_feature_tree(p, std::move(edges));
}

/// Random attachment tree: node v joins a uniformly drawn earlier node.
inline FeatureTree gen_random_tree(int p, std::uint64_t seed) {
  DeterministicRng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int v = 2; v <= p; ++v)
    edges.push_back({1 + int(rng.below(std::uint64_t(v - 1))), v});
  return make_feature_tree(p, std::move(edges));
}

/// Opt-in unit-norm column scaling; zero columns are left alone.
inline void standardize_columns(Dataset& d) {
  Matrix X = d.X.matrix();
  for (Eigen::Index i = 0; i < X.cols(); ++i) {
    const double nrm = X.col(i).norm();
    if (nrm > 0.0) X.col(i) /= nrm;
  }
  d.X = DesignMatrix(std::move(X));
  d.provenance += "+unit-norm-columns";
}

}  // namespace saif

#endif  // SAIF_DATA_IO_HPP
