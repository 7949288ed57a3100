#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spoc/model.hpp"

namespace spoc::io {

enum class Scenario { single, vary_n, skew_b, vary_alpha, offdiag_b, real_graph };

std::string scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

/// One experiment: a base instance, a swept parameter and the trial count.
struct ExperimentConfig {
  Scenario scenario = Scenario::single;
  SimulationConfig base;          // protocol defaults unless overridden
  std::vector<double> sweep;      // swept values; unused for `single`
  int trials = 10;
  std::string output_path = "results.csv";

  bool clip = true;
  bool precondition = false;
  std::optional<double> tau;
  /// Run the pipeline on P itself instead of a sampled adjacency.
  bool oracle = false;
  /// Record measured wall times; off by default so repeated runs are
  /// byte-identical.
  bool timings = false;

  std::string graph_path;       // real_graph input
  std::string membership_path;  // real_graph ground truth (optional)

  /// Global trial indices forced to fail; exercises the failed-row path.
  std::vector<long> inject_failures;

  void validate() const;
};

struct ResultsRow {
  std::string scenario;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  double err_b = std::numeric_limits<double>::quiet_NaN();
  double err_theta = std::numeric_limits<double>::quiet_NaN();
  double spearman = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double wall_time_ms = 0.0;
  bool failed = false;
};

struct EdgeListData {
  Adjacency graph;
  std::size_t self_loops_dropped = 0;
};

/// Whitespace-separated "u v" pairs with 0-based ids; '#' starts a comment.
/// Duplicate edges are merged, self-loops dropped (counted). The node count
/// is max id + 1.
EdgeListData read_edge_list(const std::string& path);

/// Canonical form: one "u\tv" line per edge with u < v, sorted.
void write_edge_list(const Adjacency& a, const std::string& path);

/// Comma-separated rows of K community weights. Rows whose sum is within
/// 1e-6 of 1 are renormalized to sum exactly; anything else is rejected.
MembershipMatrix read_membership_csv(const std::string& path);

void write_matrix_csv(const Matrix& m, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

/// Header plus one line per row, 12 significant digits, rows ordered by
/// (sweep value, seed).
void write_results_csv(std::vector<ResultsRow> rows, const std::string& path);
std::vector<ResultsRow> read_results_csv(const std::string& path);

/// JSON config with strict schema: unknown keys are rejected and every
/// error names the offending field. Missing fields take the protocol
/// defaults (n=1000, K=3, alpha=0.5, B=diag(0.3,0.5,0.7), trials=10).
ExperimentConfig read_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);

/// Shared numeric formatting for every CSV writer: 12 significant digits.
std::string format_real(double v);

}  // namespace spoc::io
