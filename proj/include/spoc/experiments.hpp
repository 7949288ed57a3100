#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "spoc/estimator.hpp"
#include "spoc/io.hpp"

namespace spoc {

/// Instance parameters for one sweep point; how each scenario reshapes the
/// base configuration around the swept value.
SimulationConfig scenario_config(const io::ExperimentConfig& cfg,
                                 double sweep_value);

/// Worker count: SPOC_THREADS if set, otherwise hardware concurrency capped
/// by a per-worker memory estimate for the largest instance.
int sweep_worker_count(const io::ExperimentConfig& cfg);

/// Runs every (sweep point, trial) cell, writes the results CSV to
/// cfg.output_path and a mean/stderr summary per sweep point to `summary`.
/// A failing trial is recorded as a failed row; the run continues.
std::vector<io::ResultsRow> run_sweep(const io::ExperimentConfig& cfg,
                                      std::ostream& summary);

struct EstimateOutput {
  EstimationResult result;
  std::string b_path;
  std::string theta_path;
  std::string communities_path;  // empty unless tau was given
};

/// End-to-end estimation of a graph file: writes B_hat and Theta_hat CSVs
/// under `out_prefix` (plus thresholded communities when tau is given) and
/// prints solver diagnostics.
EstimateOutput run_estimate(const std::string& graph_path, Index k,
                            const SpocOptions& opts, double tau_or_negative,
                            const std::string& out_prefix,
                            std::ostream& info);

/// Per-trial diagnostics CSV (beta, eigenvalue bounds, rate and
/// concentration ratios). Requires a simulation scenario so P is known.
std::vector<std::string> run_diagnose(const io::ExperimentConfig& cfg,
                                      std::ostream& summary);

}  // namespace spoc
