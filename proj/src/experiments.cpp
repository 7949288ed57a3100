#include "spoc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "spoc/errors.hpp"
#include "spoc/metrics.hpp"
#include "spoc/rng.hpp"

namespace spoc {

namespace {

using io::ExperimentConfig;
using io::ResultsRow;
using io::Scenario;

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1)) /
         std::sqrt(static_cast<double>(v.size()));
}

std::vector<double> sweep_points(const ExperimentConfig& cfg) {
  if (cfg.scenario == Scenario::single ||
      cfg.scenario == Scenario::real_graph)
    return {0.0};
  return cfg.sweep;
}

SpocOptions spoc_options(const ExperimentConfig& cfg) {
  SpocOptions opts;
  opts.clip = cfg.clip;
  opts.precondition = cfg.precondition;
  return opts;
}

struct TrialOutput {
  ResultsRow row;
  // populated by run_diagnose only
  std::string diag_line;
  // failure description, reported after all workers join
  std::string fail_message;
};

/// One simulated trial: sample -> estimate -> align -> metrics.
TrialOutput run_sim_trial(const ExperimentConfig& cfg, double point,
                          long global_index, bool with_diagnostics) {
  const std::uint64_t seed =
      rng::trial_seed(cfg.base.seed,
                      static_cast<std::uint64_t>(global_index));
  TrialOutput out;
  out.row.scenario = io::scenario_name(cfg.scenario);
  out.row.sweep_value = point;
  out.row.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  if (std::find(cfg.inject_failures.begin(), cfg.inject_failures.end(),
                global_index) != cfg.inject_failures.end())
    throw NumericalError("injected failure (trial " +
                         std::to_string(global_index) + ")");

  SimulationConfig scfg = scenario_config(cfg, point);
  scfg.seed = seed;

  const MembershipMatrix theta = sample_membership(scfg);
  const EdgeProbabilityMatrix p = edge_probabilities(theta, scfg.b);

  EstimationResult est;
  Matrix observed;
  if (cfg.oracle) {
    observed = p.entries();
    est = estimate_oracle(p, scfg.k, spoc_options(cfg));
  } else {
    const Adjacency a = sample_adjacency(p, rng::mix_seed(seed));
    observed = a.matrix();
    est = estimate(a, scfg.k, spoc_options(cfg));
  }

  const PermutationAlignment align = align_to_truth(est, theta, scfg.b);
  out.row.err_b = align.aligned_error_b;
  out.row.err_theta = align.aligned_error_theta;
  out.row.spearman =
      spearman_quality(est.theta_hat, theta, align.perm).average;

  const DiagnosticsBundle diag =
      compute_diagnostics(observed, p, theta, scfg.b);
  out.row.beta = diag.beta;

  if (with_diagnostics) {
    const Theorem2Report t2 =
        theorem2_check(diag, out.row.err_b, out.row.err_theta);
    const ConcentrationReport conc = concentration_check(observed, p, 3.0);
    std::string line = out.row.scenario + ',' +
                       io::format_real(out.row.sweep_value) + ',' +
                       std::to_string(seed);
    for (double v :
         {diag.spec_norm_gap, diag.lambda_k_p, diag.kappa_p, diag.beta,
          diag.lambda_k_theta, diag.lambda_max_theta, diag.theorem2_rhs,
          t2.ratio_b, t2.ratio_theta, conc.lhs, conc.rhs_scale, conc.ratio})
      line += ',' + io::format_real(v);
    out.diag_line = line + ",ok";
  }

  if (cfg.timings) {
    const auto t1 = std::chrono::steady_clock::now();
    out.row.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return out;
}

TrialOutput run_real_trial(const ExperimentConfig& cfg,
                           const Adjacency& graph,
                           const MembershipMatrix* truth, long global_index) {
  const std::uint64_t seed =
      rng::trial_seed(cfg.base.seed,
                      static_cast<std::uint64_t>(global_index));
  TrialOutput out;
  out.row.scenario = io::scenario_name(cfg.scenario);
  out.row.sweep_value = 0.0;
  out.row.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  const EstimationResult est = estimate(graph, cfg.base.k, spoc_options(cfg));
  if (truth != nullptr) {
    const PermutationAlignment align =
        align_to_membership(est.theta_hat, *truth);
    out.row.err_theta = align.aligned_error_theta;
    out.row.spearman =
        spearman_quality(est.theta_hat, *truth, align.perm).average;
  }
  if (cfg.timings) {
    const auto t1 = std::chrono::steady_clock::now();
    out.row.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  return out;
}

ResultsRow failed_row(const ExperimentConfig& cfg, double point,
                      long global_index) {
  ResultsRow row;
  row.scenario = io::scenario_name(cfg.scenario);
  row.sweep_value = point;
  row.seed = rng::trial_seed(cfg.base.seed,
                             static_cast<std::uint64_t>(global_index));
  row.failed = true;
  return row;
}

std::string failed_diag_line(const ResultsRow& row) {
  std::string line = row.scenario + ',' + io::format_real(row.sweep_value) +
                     ',' + std::to_string(row.seed);
  for (int i = 0; i < 12; ++i) line += ",nan";
  return line + ",failed";
}

std::vector<TrialOutput> execute(const ExperimentConfig& cfg,
                                 bool with_diagnostics,
                                 std::ostream& summary) {
  cfg.validate();
  const std::vector<double> points = sweep_points(cfg);
  const long trials = cfg.trials;
  const long total = static_cast<long>(points.size()) * trials;

  // real-graph inputs are loaded once, outside the trial loop
  Adjacency graph;
  MembershipMatrix truth;
  bool have_truth = false;
  if (cfg.scenario == Scenario::real_graph) {
    graph = io::read_edge_list(cfg.graph_path).graph;
    if (!cfg.membership_path.empty()) {
      truth = io::read_membership_csv(cfg.membership_path);
      if (truth.nodes() != graph.nodes())
        throw DataError("membership rows do not match the graph node count");
      have_truth = true;
    }
  }

  std::vector<TrialOutput> outputs(static_cast<std::size_t>(total));
  std::atomic<long> cursor{0};

  auto work = [&]() {
    for (;;) {
      const long i = cursor.fetch_add(1);
      if (i >= total) return;
      const std::size_t pi = static_cast<std::size_t>(i / trials);
      const double point = points[pi];
      try {
        if (cfg.scenario == Scenario::real_graph) {
          outputs[static_cast<std::size_t>(i)] = run_real_trial(
              cfg, graph, have_truth ? &truth : nullptr, i);
        } else {
          outputs[static_cast<std::size_t>(i)] =
              run_sim_trial(cfg, point, i, with_diagnostics);
        }
      } catch (const std::exception& e) {
        TrialOutput out;
        out.row = failed_row(cfg, point, i);
        if (with_diagnostics) out.diag_line = failed_diag_line(out.row);
        out.fail_message =
            "trial " + std::to_string(i) + " failed: " + e.what();
        outputs[static_cast<std::size_t>(i)] = std::move(out);
      }
    }
  };

  const int workers = std::min<long>(sweep_worker_count(cfg), total);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const TrialOutput& o : outputs)
    if (!o.fail_message.empty()) summary << o.fail_message << '\n';
  return outputs;
}

void print_summary(const std::vector<ResultsRow>& rows,
                   std::ostream& summary) {
  std::vector<double> points;
  for (const ResultsRow& r : rows)
    if (std::find(points.begin(), points.end(), r.sweep_value) ==
        points.end())
      points.push_back(r.sweep_value);
  std::sort(points.begin(), points.end());

  for (double p : points) {
    std::vector<double> eb, et, sp;
    long ok = 0, all = 0;
    for (const ResultsRow& r : rows) {
      if (r.sweep_value != p) continue;
      ++all;
      if (r.failed) continue;
      ++ok;
      if (std::isfinite(r.err_b)) eb.push_back(r.err_b);
      if (std::isfinite(r.err_theta)) et.push_back(r.err_theta);
      if (std::isfinite(r.spearman)) sp.push_back(r.spearman);
    }
    summary << "sweep=" << io::format_real(p) << " ok=" << ok << "/" << all
            << " err_B=" << io::format_real(mean_of(eb)) << " (se "
            << io::format_real(stderr_of(eb)) << ")"
            << " err_Theta=" << io::format_real(mean_of(et)) << " (se "
            << io::format_real(stderr_of(et)) << ")"
            << " spearman=" << io::format_real(mean_of(sp)) << '\n';
  }
}

}  // namespace

SimulationConfig scenario_config(const io::ExperimentConfig& cfg,
                                 double sweep_value) {
  SimulationConfig scfg = cfg.base;
  switch (cfg.scenario) {
    case Scenario::single:
      break;
    case Scenario::vary_n:
      scfg.n = static_cast<Index>(std::llround(sweep_value));
      break;
    case Scenario::skew_b: {
      if (cfg.base.k != 3)
        throw UsageError("skew_B scenario requires K = 3");
      scfg.b = ConnectivityMatrix::Diagonal(
          Vector{{0.5 - sweep_value, 0.5, 0.5 + sweep_value}});
      break;
    }
    case Scenario::vary_alpha:
      scfg.dirichlet_alpha = Vector::Constant(cfg.base.k, sweep_value);
      break;
    case Scenario::offdiag_b: {
      Matrix b = cfg.base.b.entries();
      for (Index i = 0; i < b.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j)
          if (i != j && b(i, j) != 0.0)
            throw UsageError("offdiag_B scenario requires a diagonal base B");
      for (Index i = 0; i < b.rows(); ++i)
        for (Index j = 0; j < b.cols(); ++j)
          if (i != j) b(i, j) = sweep_value;
      scfg.b = ConnectivityMatrix(std::move(b));
      break;
    }
    case Scenario::real_graph:
      throw UsageError("real_graph scenario has no simulation config");
  }
  return scfg;
}

int sweep_worker_count(const io::ExperimentConfig& cfg) {
  long n_max = cfg.base.n;
  if (cfg.scenario == Scenario::vary_n)
    for (double v : cfg.sweep)
      n_max = std::max<long>(n_max, static_cast<long>(std::llround(v)));

  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  // each worker holds roughly A, P and a difference matrix in memory
  const double per_worker_bytes = 30.0 * static_cast<double>(n_max) *
                                  static_cast<double>(n_max);
  const double budget = 6e9;
  workers = std::min<int>(
      workers, std::max(1, static_cast<int>(budget / per_worker_bytes)));

  if (const char* env = std::getenv("SPOC_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      workers = std::min<long>(workers, v);
  }
  return workers;
}

std::vector<io::ResultsRow> run_sweep(const io::ExperimentConfig& cfg,
                                      std::ostream& summary) {
  std::vector<TrialOutput> outputs = execute(cfg, false, summary);
  std::vector<ResultsRow> rows;
  rows.reserve(outputs.size());
  for (TrialOutput& o : outputs) rows.push_back(std::move(o.row));
  io::write_results_csv(rows, cfg.output_path);
  // re-read so the printed summary reflects exactly what was persisted
  rows = io::read_results_csv(cfg.output_path);
  print_summary(rows, summary);
  return rows;
}

EstimateOutput run_estimate(const std::string& graph_path, Index k,
                            const SpocOptions& opts, double tau_or_negative,
                            const std::string& out_prefix,
                            std::ostream& info) {
  const io::EdgeListData data = io::read_edge_list(graph_path);
  if (data.self_loops_dropped > 0)
    info << "warning: dropped " << data.self_loops_dropped
         << " self-loop(s)\n";
  if (k > data.graph.nodes())
    throw UsageError("estimate: K exceeds the number of nodes");

  EstimateOutput out;
  out.result = estimate(data.graph, k, opts);
  out.b_path = out_prefix + "_B.csv";
  out.theta_path = out_prefix + "_Theta.csv";
  io::write_matrix_csv(out.result.b_hat, out.b_path);
  io::write_matrix_csv(out.result.theta_hat, out.theta_path);

  if (tau_or_negative > 0.0) {
    const auto flags =
        threshold_communities(out.result.theta_hat, tau_or_negative);
    out.communities_path = out_prefix + "_communities.csv";
    io::write_matrix_csv(flags.cast<double>().matrix(),
                         out.communities_path);
  }

  // F F^T is PSD, so its smallest eigenvalue is its smallest singular value
  info << "eigengap |lambda_K| - |lambda_K+1| = "
       << io::format_real(out.result.eigen_gap) << '\n'
       << "smallest singular value of F F^T = "
       << io::format_real(out.result.fft_min_eigenvalue) << '\n';
  return out;
}

static const char* kDiagnosticsHeader =
    "scenario,sweep_value,seed,spec_norm_gap,lambda_K_P,kappa_P,beta,"
    "lambda_K_Theta,lambda_max_Theta,theorem2_rhs,ratio_B,ratio_Theta,"
    "conc_lhs,conc_rhs_scale,conc_ratio,status";

std::vector<std::string> run_diagnose(const io::ExperimentConfig& cfg,
                                      std::ostream& summary) {
  if (cfg.scenario == Scenario::real_graph)
    throw UsageError("diagnose requires a simulation scenario (P is needed)");
  if (cfg.scenario != Scenario::single && cfg.sweep.empty()) {
    // nothing to run; still emit a parseable header-only file
    std::ofstream out(cfg.output_path);
    if (!out)
      throw DataError("cannot open file for writing: " + cfg.output_path);
    out << kDiagnosticsHeader << '\n';
    return {};
  }
  std::vector<TrialOutput> outputs = execute(cfg, true, summary);

  std::stable_sort(outputs.begin(), outputs.end(),
                   [](const TrialOutput& a, const TrialOutput& b) {
                     if (a.row.sweep_value != b.row.sweep_value)
                       return a.row.sweep_value < b.row.sweep_value;
                     return a.row.seed < b.row.seed;
                   });

  std::ofstream out(cfg.output_path);
  if (!out) throw DataError("cannot open file for writing: " +
                            cfg.output_path);
  out << kDiagnosticsHeader << '\n';
  std::vector<std::string> lines;
  for (const TrialOutput& o : outputs) {
    out << o.diag_line << '\n';
    lines.push_back(o.diag_line);
  }
  if (!out) throw DataError("write failed: " + cfg.output_path);
  return lines;
}

}  // namespace spoc
