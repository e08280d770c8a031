#ifndef SAIF_BENCH_IO_HPP
#define SAIF_BENCH_IO_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saif/baselines.hpp"
#include "saif/data_io.hpp"

namespace saif::bench {

constexpr int kFormatVersion = 1;

class schema_error : public std::runtime_error {
 public:
  explicit schema_error(const std::string& column)
      : std::runtime_error("missing required column: " + column) {}
};

/// Everything a run needs, serialized into every output for reproducibility.
struct RunConfig {
  // data source: a libsvm file, or the synthetic generator when empty
  std::string data_path;
  bool relabel_above_4 = false;
  bool standardize = false;
  long gen_n = 100;
  long gen_p = 1000;
  double gen_active_fraction = 0.2;
  std::uint64_t seed = 1;

  std::string loss = "squared";  // squared | logistic
  std::string method = "saif";   // saif | dynamic | plain | none | sequential
  double lambda = 0.0;           // absolute penalty; 0 selects the ratio
  double lambda_ratio = 0.1;     // of lambda_max

  double eps = 1e-6;
  double add_c = 1.0;
  double add_zeta = 0.5;
  int inner_epochs = 1;
  double factor_growth = 10.0;
  std::string ball = "gap";  // gap | gap+seq
  long max_outer = 500000;

  int grid = 20;
  double grid_min_ratio = 1e-3;

  std::string tree_path;  // edge-list CSV; empty selects a chain

  std::string out_json;
  std::string trace_csv;
  std::string out_csv;

  LossKind loss_kind() const {
    if (loss == "squared") return LossKind::squared;
    if (loss == "logistic") return LossKind::logistic;
    throw std::invalid_argument("unknown loss '" + loss + "'");
  }

  SaifConfig solver_config() const {
    SaifConfig cfg;
    cfg.epsilon = eps;
    cfg.c = add_c;
    cfg.zeta = add_zeta;
    cfg.inner_epochs = inner_epochs;
    cfg.factor_growth = factor_growth;
    cfg.max_outer = max_outer;
    if (ball == "gap") {
      cfg.ball_mode = BallMode::gap_only;
    } else if (ball == "gap+seq") {
      cfg.ball_mode = BallMode::gap_and_sequential;
    } else {
      throw std::invalid_argument("unknown ball mode '" + ball + "'");
    }
    cfg.validate();
    return cfg;
  }

  nlohmann::json to_json() const {
    return {{"data_path", data_path},
            {"relabel_above_4", relabel_above_4},
            {"standardize", standardize},
            {"gen_n", gen_n},
            {"gen_p", gen_p},
            {"gen_active_fraction", gen_active_fraction},
            {"seed", seed},
            {"loss", loss},
            {"method", method},
            {"lambda", lambda},
            {"lambda_ratio", lambda_ratio},
            {"eps", eps},
            {"add_c", add_c},
            {"add_zeta", add_zeta},
            {"inner_epochs", inner_epochs},
            {"factor_growth", factor_growth},
            {"ball", ball},
            {"max_outer", max_outer},
            {"grid", grid},
            {"grid_min_ratio", grid_min_ratio},
            {"tree_path", tree_path}};
  }
};

inline nlohmann::json result_to_json(const RunConfig& config,
                                     const SolveResult& res) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["config"] = config.to_json();
  j["result"] = {{"objective", res.objective},
                 {"dual_value", res.dual_value},
                 {"gap", res.gap},
                 {"certificate", res.certificate},
                 {"support", res.support_size()},
                 {"lambda", res.lambda},
                 {"lambda_max", res.lambda_max_value},
                 {"base_ops", res.counters.base_ops},
                 {"weighted_ops", res.counters.weighted_ops},
                 {"add_count", res.counters.add_count},
                 {"peak_active", res.counters.peak_active},
                 {"outer_iters", res.counters.outer_iters},
                 {"time_s", res.time_s}};
  return j;
}

inline void write_result_json(const std::string& path, const RunConfig& config,
                              const SolveResult& res) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << result_to_json(config, res).dump(2) << '\n';
}

inline void write_error_json(std::ostream& out, const std::string& message,
                             const RunConfig* config = nullptr) {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["error"] = message;
  if (config) j["config"] = config->to_json();
  out << j.dump(2) << '\n';
}

namespace detail {
inline void write_config_comment(std::ofstream& out, const RunConfig& config,
                                 const SolveResult* res = nullptr) {
  out << "# format_version=" << kFormatVersion << '\n';
  out << "# config=" << config.to_json().dump() << '\n';
  if (res) {
    out << "# lambda=" << res->lambda << '\n';
    out << "# lambda_max=" << res->lambda_max_value << '\n';
    out << "# p=" << res->beta.size() << '\n';
  }
}
}  // namespace detail

// trace schema: t_s,iter,p_t,gap,dual_value,event
inline void write_trace_csv(const std::string& path, const RunConfig& config,
                            const SolveResult& res) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  detail::write_config_comment(out, config, &res);
  out << "t_s,iter,p_t,gap,dual_value,event\n";
  double last_t = -1.0;
  for (const auto& r : res.trace) {
    // strictly increasing timestamps even when the clock ties
    double t = r.t_s;
    if (t <= last_t) t = last_t + 1e-9;
    last_t = t;
    out << t << ',' << r.iter << ',' << r.p_t << ',' << r.gap << ','
        << r.dual_value << ',' << trace_event_name(r.event) << '\n';
  }
}

// results schema: method,lambda,eps,time_s,base_ops,weighted_ops,support,gap,certificate
inline void write_results_csv(const std::string& path, const RunConfig& config,
                              const std::vector<SolveResult>& results,
                              const std::vector<std::string>& methods) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  detail::write_config_comment(out, config);
  out << "method,lambda,eps,time_s,base_ops,weighted_ops,support,gap,certificate\n";
  for (size_t k = 0; k < results.size(); ++k) {
    const SolveResult& r = results[k];
    out << methods[k] << ',' << r.lambda << ',' << config.eps << ','
        << r.time_s << ',' << r.counters.base_ops << ','
        << r.counters.weighted_ops << ',' << r.support_size() << ',' << r.gap
        << ',' << (r.certificate ? 1 : 0) << '\n';
  }
}

// path schema: lambda,time_s,cum_time_s,support,gap
inline void write_path_csv(const std::string& path, const RunConfig& config,
                           const std::vector<SolveResult>& results) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  detail::write_config_comment(out, config);
  out << "lambda,time_s,cum_time_s,support,gap\n";
  for (const auto& r : results)
    out << r.lambda << ',' << r.time_s << ',' << r.cum_time_s << ','
        << r.support_size() << ',' << r.gap << '\n';
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, std::string> metadata;  // from "# key=value" lines

  int column_index(const std::string& name) const {
    for (size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return int(i);
    throw schema_error(name);
  }

  double number(size_t row, const std::string& name) const {
    return std::stod(rows[row][size_t(column_index(name))]);
  }
  const std::string& text(size_t row, const std::string& name) const {
    return rows[row][size_t(column_index(name))];
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        std::string key = line.substr(1, eq - 1);
        while (!key.empty() && key.front() == ' ') key.erase(key.begin());
        table.metadata[key] = line.substr(eq + 1);
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!have_header) {
      table.columns = std::move(cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  return table;
}

inline void require_columns(const CsvTable& table,
                            const std::vector<std::string>& names) {
  for (const auto& n : names) table.column_index(n);
}

}  // namespace saif::bench

#endif  // SAIF_BENCH_IO_HPP
