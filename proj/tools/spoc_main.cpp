#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "spoc/errors.hpp"
#include "spoc/experiments.hpp"
#include "spoc/io.hpp"

namespace {

// exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure
constexpr int kUsageExit = 2;
constexpr int kDataExit = 3;
constexpr int kNumericalExit = 4;

spoc::io::ExperimentConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return spoc::io::config_from_json_text("{}");
  return spoc::io::read_config(config_path);
}

void apply_overrides(spoc::io::ExperimentConfig& cfg,
                     const std::optional<std::uint64_t>& seed,
                     const std::optional<int>& trials,
                     const std::optional<std::string>& out) {
  if (seed) cfg.base.seed = *seed;
  if (trials) cfg.trials = *trials;
  if (out) cfg.output_path = *out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SPOC: mixed-membership estimation via successive projections"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<std::string> out;

  // --- estimate ---
  auto* est_cmd = app.add_subcommand(
      "estimate", "Estimate B and Theta from an edge-list file");
  std::string graph_path;
  long est_k = 0;
  bool clip = true;
  bool precondition = false;
  double tau = -1.0;
  bool communities = false;
  std::string est_out = "estimate";
  est_cmd->add_option("graph", graph_path, "edge-list file")->required();
  est_cmd->add_option("--k", est_k, "number of communities")->required();
  est_cmd->add_flag("--clip,!--no-clip", clip,
                    "truncate estimates into [0,1] (default on)");
  est_cmd->add_flag("--precondition", precondition,
                    "ellipsoid-precondition the SPA step");
  est_cmd->add_option("--tau", tau,
                      "community threshold in (0,1); default 1/K");
  est_cmd->add_flag("--communities", communities,
                    "also write thresholded community flags");
  est_cmd->add_option("--out", est_out, "output file prefix");

  // --- simulate ---
  auto* sim_cmd = app.add_subcommand(
      "simulate", "Sample a synthetic instance and write it to disk");
  std::string sim_out = "simulated";
  sim_cmd->add_option("--config", config_path, "experiment config JSON");
  sim_cmd->add_option("--seed", seed, "override base seed");
  sim_cmd->add_option("--out", sim_out, "output file prefix");

  // --- sweep ---
  std::optional<bool> clip_override;
  std::optional<bool> precondition_override;
  auto add_estimator_flags = [&](CLI::App* cmd) {
    cmd->add_flag("--clip,!--no-clip",
                  [&](std::int64_t v) { clip_override = v > 0; },
                  "override clipping of estimates into [0,1]");
    cmd->add_flag("--precondition",
                  [&](std::int64_t v) { precondition_override = v > 0; },
                  "ellipsoid-precondition the SPA step");
  };

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run a parameter-sweep experiment and write a results CSV");
  sweep_cmd->add_option("--config", config_path, "experiment config JSON");
  sweep_cmd->add_option("--seed", seed, "override base seed");
  sweep_cmd->add_option("--trials", trials, "override trial count");
  sweep_cmd->add_option("--out", out, "override results path");
  add_estimator_flags(sweep_cmd);

  // --- diagnose ---
  auto* diag_cmd = app.add_subcommand(
      "diagnose", "Per-trial theory diagnostics CSV for simulated runs");
  diag_cmd->add_option("--config", config_path, "experiment config JSON");
  diag_cmd->add_option("--seed", seed, "override base seed");
  diag_cmd->add_option("--trials", trials, "override trial count");
  diag_cmd->add_option("--out", out, "override results path");
  add_estimator_flags(diag_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  }

  try {
    if (est_cmd->parsed()) {
      spoc::SpocOptions opts;
      opts.clip = clip;
      opts.precondition = precondition;
      if (est_k < 1) throw spoc::UsageError("--k must be >= 1");
      double tau_eff = -1.0;
      if (tau > 0.0 || communities)
        tau_eff = tau > 0.0 ? tau : 1.0 / static_cast<double>(est_k);
      spoc::run_estimate(graph_path, est_k, opts, tau_eff, est_out,
                         std::cout);
    } else if (sim_cmd->parsed()) {
      spoc::io::ExperimentConfig cfg = load_config(config_path);
      apply_overrides(cfg, seed, trials, out);
      spoc::SimulationConfig scfg = cfg.base;
      scfg.validate();
      const spoc::MembershipMatrix theta = spoc::sample_membership(scfg);
      const spoc::EdgeProbabilityMatrix p =
          spoc::edge_probabilities(theta, scfg.b);
      const spoc::Adjacency a =
          spoc::sample_adjacency(p, spoc::rng::mix_seed(scfg.seed));
      spoc::io::write_edge_list(a, sim_out + "_edges.tsv");
      spoc::io::write_matrix_csv(theta.rows(), sim_out + "_Theta.csv");
      spoc::io::write_matrix_csv(scfg.b.entries(), sim_out + "_B.csv");
      std::cout << "wrote " << sim_out << "_edges.tsv (" << a.edge_count()
                << " edges), " << sim_out << "_Theta.csv, " << sim_out
                << "_B.csv\n";
    } else if (sweep_cmd->parsed()) {
      spoc::io::ExperimentConfig cfg = load_config(config_path);
      apply_overrides(cfg, seed, trials, out);
      if (clip_override) cfg.clip = *clip_override;
      if (precondition_override) cfg.precondition = *precondition_override;
      spoc::run_sweep(cfg, std::cout);
      std::cout << "results written to " << cfg.output_path << '\n';
    } else if (diag_cmd->parsed()) {
      spoc::io::ExperimentConfig cfg = load_config(config_path);
      apply_overrides(cfg, seed, trials, out);
      if (clip_override) cfg.clip = *clip_override;
      if (precondition_override) cfg.precondition = *precondition_override;
      spoc::run_diagnose(cfg, std::cout);
      std::cout << "diagnostics written to " << cfg.output_path << '\n';
    }
  } catch (const spoc::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageExit;
  } catch (const spoc::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataExit;
  } catch (const spoc::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalExit;
  }
  return 0;
}
