#include "spoc/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "spoc/errors.hpp"

namespace spoc::io {

namespace {

using nlohmann::json;

std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file for reading: " + path);
  return in;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open file for writing: " + path);
  return out;
}

bool is_blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

double parse_real(const std::string& token, const std::string& where) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw DataError(where + ": not a number: '" + token + "'");
  }
  if (used != token.size())
    throw DataError(where + ": trailing characters in '" + token + "'");
  return v;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::single: return "single";
    case Scenario::vary_n: return "vary_n";
    case Scenario::skew_b: return "skew_B";
    case Scenario::vary_alpha: return "vary_alpha";
    case Scenario::offdiag_b: return "offdiag_B";
    case Scenario::real_graph: return "real_graph";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "single") return Scenario::single;
  if (name == "vary_n") return Scenario::vary_n;
  if (name == "skew_B") return Scenario::skew_b;
  if (name == "vary_alpha") return Scenario::vary_alpha;
  if (name == "offdiag_B") return Scenario::offdiag_b;
  if (name == "real_graph") return Scenario::real_graph;
  throw DataError("unknown scenario '" + name + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw DataError("config: trials must be >= 1");
  const bool sweeps = scenario == Scenario::vary_n ||
                      scenario == Scenario::skew_b ||
                      scenario == Scenario::vary_alpha ||
                      scenario == Scenario::offdiag_b;
  if (sweeps && sweep.empty())
    throw DataError("config: sweep must be nonempty for scenario " +
                    scenario_name(scenario));
  if (scenario == Scenario::real_graph && graph_path.empty())
    throw DataError("config: real_graph requires field 'graph'");
  if (scenario != Scenario::real_graph) base.validate();
  if (tau && !(*tau > 0.0 && *tau < 1.0))
    throw DataError("config: tau must lie in (0,1)");
}

EdgeListData read_edge_list(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;
  std::set<std::pair<long, long>> edges;
  std::size_t self_loops = 0;
  long max_id = -1;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::istringstream ss(line);
    long u, v;
    if (!(ss >> u >> v))
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected two integer node ids");
    std::string extra;
    if (ss >> extra)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": unexpected trailing token '" + extra + "'");
    if (u < 0 || v < 0)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": node ids must be nonnegative");
    max_id = std::max(max_id, std::max(u, v));
    if (u == v) {
      ++self_loops;
      continue;
    }
    edges.emplace(std::min(u, v), std::max(u, v));
  }

  const Index n = static_cast<Index>(max_id + 1);
  Matrix a = Matrix::Zero(n, n);
  for (const auto& [u, v] : edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return EdgeListData{Adjacency(std::move(a)), self_loops};
}

void write_edge_list(const Adjacency& a, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "# undirected edge list, 0-based ids\n";
  const Index n = a.nodes();
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (a.matrix()(i, j) != 0.0) out << i << '\t' << j << '\n';
  if (!out) throw DataError("write failed: " + path);
}

MembershipMatrix read_membership_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(
          parse_real(cell, path + ":" + std::to_string(line_no)));
    if (rows.empty() && row.empty())
      throw DataError(path + ": empty first row");
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": inconsistent column count");
    const double sum =
        std::accumulate(row.begin(), row.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-6)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": row sum " + std::to_string(sum) +
                      " is not within 1e-6 of 1");
    for (double& v : row) v /= sum;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");

  Matrix m(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  try {
    return MembershipMatrix(std::move(m));
  } catch (const UsageError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void write_matrix_csv(const Matrix& m, const std::string& path) {
  std::ofstream out = open_for_write(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      row.push_back(parse_real(cell, path + ":" + std::to_string(line_no)));
    if (!rows.empty() && row.size() != rows.front().size())
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  Matrix m(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

static const char* kResultsHeader =
    "scenario,sweep_value,seed,err_B,err_Theta,spearman,beta,wall_time_ms,"
    "status";

void write_results_csv(std::vector<ResultsRow> rows, const std::string& path) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultsRow& a, const ResultsRow& b) {
                     if (a.sweep_value != b.sweep_value)
                       return a.sweep_value < b.sweep_value;
                     return a.seed < b.seed;
                   });
  std::ofstream out = open_for_write(path);
  out << kResultsHeader << '\n';
  for (const ResultsRow& r : rows) {
    out << r.scenario << ',' << format_real(r.sweep_value) << ',' << r.seed
        << ',' << format_real(r.err_b) << ',' << format_real(r.err_theta)
        << ',' << format_real(r.spearman) << ',' << format_real(r.beta) << ','
        << format_real(r.wall_time_ms) << ','
        << (r.failed ? "failed" : "ok") << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

std::vector<ResultsRow> read_results_csv(const std::string& path) {
  std::ifstream in = open_for_read(path);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader)
    throw DataError(path + ": missing or unexpected results header");
  std::vector<ResultsRow> rows;
  std::size_t line_no = 1;
  auto parse_maybe_nan = [&](const std::string& tok) {
    if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
    return parse_real(tok, path + ":" + std::to_string(line_no));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() != 9)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 9 columns");
    ResultsRow r;
    r.scenario = cells[0];
    r.sweep_value = parse_maybe_nan(cells[1]);
    r.seed = static_cast<std::uint64_t>(std::stoull(cells[2]));
    r.err_b = parse_maybe_nan(cells[3]);
    r.err_theta = parse_maybe_nan(cells[4]);
    r.spearman = parse_maybe_nan(cells[5]);
    r.beta = parse_maybe_nan(cells[6]);
    r.wall_time_ms = parse_maybe_nan(cells[7]);
    r.failed = cells[8] == "failed";
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

void reject_unknown_keys(const json& j,
                         const std::vector<std::string>& known) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw DataError("config: unknown key '" + it.key() + "'");
  }
}

double number_at(const json& j, const std::string& field) {
  if (!j.is_number())
    throw DataError("config: field '" + field + "' must be a number");
  return j.get<double>();
}

long integer_at(const json& j, const std::string& field) {
  if (!j.is_number_integer())
    throw DataError("config: field '" + field + "' must be an integer");
  return j.get<long>();
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw DataError("config: top level must be an object");
  reject_unknown_keys(
      j, {"scenario", "n", "k", "alpha", "B", "pure_per_community", "seed",
          "trials", "sweep", "output", "clip", "precondition", "tau",
          "oracle", "timings", "graph", "membership", "inject_failures"});

  ExperimentConfig cfg;
  cfg.base = SimulationConfig::defaults();

  if (j.contains("scenario")) {
    if (!j["scenario"].is_string())
      throw DataError("config: field 'scenario' must be a string");
    cfg.scenario = scenario_from_name(j["scenario"].get<std::string>());
  }
  if (j.contains("n")) cfg.base.n = integer_at(j["n"], "n");
  const bool k_given = j.contains("k");
  if (k_given) cfg.base.k = integer_at(j["k"], "k");
  if (cfg.base.k < 1) throw DataError("config: field 'k' must be >= 1");

  if (j.contains("alpha")) {
    const json& a = j["alpha"];
    if (a.is_number()) {
      cfg.base.dirichlet_alpha =
          Vector::Constant(cfg.base.k, a.get<double>());
    } else if (a.is_array()) {
      if (static_cast<Index>(a.size()) != cfg.base.k)
        throw DataError("config: field 'alpha' must have k entries");
      cfg.base.dirichlet_alpha.resize(cfg.base.k);
      for (Index i = 0; i < cfg.base.k; ++i)
        cfg.base.dirichlet_alpha[i] =
            number_at(a[static_cast<std::size_t>(i)],
                      "alpha[" + std::to_string(i) + "]");
    } else {
      throw DataError("config: field 'alpha' must be a number or array");
    }
  } else if (k_given) {
    cfg.base.dirichlet_alpha = Vector::Constant(cfg.base.k, 0.5);
  }

  if (j.contains("B")) {
    const json& bj = j["B"];
    if (!bj.is_array() || bj.empty())
      throw DataError("config: field 'B' must be a nonempty array");
    Matrix b;
    if (bj[0].is_array()) {
      const Index k = static_cast<Index>(bj.size());
      b.resize(k, k);
      for (Index r = 0; r < k; ++r) {
        const json& rowj = bj[static_cast<std::size_t>(r)];
        if (!rowj.is_array() || static_cast<Index>(rowj.size()) != k)
          throw DataError("config: field 'B[" + std::to_string(r) +
                          "]' must have " + std::to_string(k) + " entries");
        for (Index c = 0; c < k; ++c)
          b(r, c) = number_at(rowj[static_cast<std::size_t>(c)],
                              "B[" + std::to_string(r) + "][" +
                                  std::to_string(c) + "]");
      }
    } else {
      // flat array = diagonal matrix
      const Index k = static_cast<Index>(bj.size());
      b = Matrix::Zero(k, k);
      for (Index r = 0; r < k; ++r)
        b(r, r) = number_at(bj[static_cast<std::size_t>(r)],
                            "B[" + std::to_string(r) + "]");
    }
    try {
      cfg.base.b = ConnectivityMatrix(std::move(b));
    } catch (const UsageError& e) {
      throw DataError(std::string("config: field 'B': ") + e.what());
    }
    if (cfg.base.b.communities() != cfg.base.k)
      throw DataError("config: field 'B' must be k x k");
  } else if (cfg.base.k != 3 && cfg.scenario != Scenario::real_graph) {
    throw DataError(
        "config: field 'B' is required when k != 3 (no default exists)");
  }

  if (j.contains("pure_per_community"))
    cfg.base.pure_per_community =
        integer_at(j["pure_per_community"], "pure_per_community");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer())
      throw DataError("config: field 'seed' must be an integer");
    cfg.base.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("trials"))
    cfg.trials = static_cast<int>(integer_at(j["trials"], "trials"));

  if (j.contains("sweep")) {
    if (!j["sweep"].is_array())
      throw DataError("config: field 'sweep' must be an array");
    for (std::size_t i = 0; i < j["sweep"].size(); ++i)
      cfg.sweep.push_back(
          number_at(j["sweep"][i], "sweep[" + std::to_string(i) + "]"));
  } else {
    switch (cfg.scenario) {
      case Scenario::vary_n:
        cfg.sweep = {1000, 2000, 3000, 4000, 5000};
        break;
      case Scenario::skew_b:
        cfg.sweep = {0.05, 0.15, 0.25, 0.35, 0.45};
        break;
      case Scenario::vary_alpha:
        cfg.sweep = {0.5, 1.0, 2.0, 3.0, 4.0};
        break;
      case Scenario::offdiag_b:
        cfg.sweep = {0.0, 0.1, 0.2, 0.3, 0.4};
        break;
      default:
        break;
    }
  }

  if (j.contains("output")) {
    if (!j["output"].is_string())
      throw DataError("config: field 'output' must be a string");
    cfg.output_path = j["output"].get<std::string>();
  }
  auto flag = [&](const char* name, bool& into) {
    if (j.contains(name)) {
      if (!j[name].is_boolean())
        throw DataError(std::string("config: field '") + name +
                        "' must be a boolean");
      into = j[name].get<bool>();
    }
  };
  flag("clip", cfg.clip);
  flag("precondition", cfg.precondition);
  flag("oracle", cfg.oracle);
  flag("timings", cfg.timings);
  if (j.contains("tau")) cfg.tau = number_at(j["tau"], "tau");
  if (j.contains("graph")) {
    if (!j["graph"].is_string())
      throw DataError("config: field 'graph' must be a string");
    cfg.graph_path = j["graph"].get<std::string>();
  }
  if (j.contains("membership")) {
    if (!j["membership"].is_string())
      throw DataError("config: field 'membership' must be a string");
    cfg.membership_path = j["membership"].get<std::string>();
  }
  if (j.contains("inject_failures")) {
    if (!j["inject_failures"].is_array())
      throw DataError("config: field 'inject_failures' must be an array");
    for (std::size_t i = 0; i < j["inject_failures"].size(); ++i)
      cfg.inject_failures.push_back(
          integer_at(j["inject_failures"][i],
                     "inject_failures[" + std::to_string(i) + "]"));
  }

  cfg.validate();
  return cfg;
}

}  // namespace

ExperimentConfig read_config(const std::string& path) {
  std::ifstream in = open_for_read(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("invalid JSON: ") + e.what());
  }
  return config_from_json(j);
}

}  // namespace spoc::io
