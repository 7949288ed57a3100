#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spoc/errors.hpp"
#include "spoc/experiments.hpp"
#include "spoc/metrics.hpp"

using namespace spoc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("spoc_cli_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

io::ExperimentConfig tiny_oracle_sweep(const std::string& out) {
  io::ExperimentConfig cfg = io::config_from_json_text("{}");
  cfg.scenario = io::Scenario::vary_n;
  cfg.sweep = {60, 120, 200};
  cfg.trials = 3;
  cfg.oracle = true;
  cfg.output_path = out;
  cfg.base.seed = 31;
  return cfg;
}

/// Runs the installed CLI binary; returns its exit code, or -1 when the
/// binary path is not exported.
int run_cli(const std::string& args, const std::string& workdir) {
  const char* bin = std::getenv("SPOC_CLI");
  if (bin == nullptr || bin[0] == '\0') return -1;
  const std::string cmd = "cd '" + workdir + "' && '" + std::string(bin) +
                          "' " + args + " >cli_stdout.txt 2>cli_stderr.txt";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

}  // namespace

TEST_CASE("scenario_config shapes the swept parameter") {
  io::ExperimentConfig cfg = io::config_from_json_text("{}");

  SUBCASE("skewed B") {
    cfg.scenario = io::Scenario::skew_b;
    const SimulationConfig scfg = scenario_config(cfg, 0.45);
    Matrix expect = Matrix::Zero(3, 3);
    expect.diagonal() << 0.05, 0.5, 0.95;
    CHECK((scfg.b.entries() - expect).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("off-diagonal value zero reproduces the default B") {
    cfg.scenario = io::Scenario::offdiag_b;
    const SimulationConfig scfg = scenario_config(cfg, 0.0);
    CHECK(scfg.b.entries() == cfg.base.b.entries());
  }

  SUBCASE("off-diagonal value fills all off-diagonal entries") {
    cfg.scenario = io::Scenario::offdiag_b;
    const SimulationConfig scfg = scenario_config(cfg, 0.2);
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        if (i != j) CHECK(scfg.b.entries()(i, j) == 0.2);
    CHECK(scfg.b.entries()(2, 2) == 0.7);
  }

  SUBCASE("alpha sweep replaces the Dirichlet parameter") {
    cfg.scenario = io::Scenario::vary_alpha;
    const SimulationConfig scfg = scenario_config(cfg, 2.5);
    CHECK(scfg.dirichlet_alpha == Vector::Constant(3, 2.5));
  }

  SUBCASE("n sweep replaces the node count") {
    cfg.scenario = io::Scenario::vary_n;
    CHECK(scenario_config(cfg, 2000).n == 2000);
  }
}

TEST_CASE("run_sweep produces one row per (point, trial)") {
  TempDir dir;
  const io::ExperimentConfig cfg = tiny_oracle_sweep(dir.file("r.csv"));
  std::ostringstream summary;
  const auto rows = run_sweep(cfg, summary);
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    CHECK_FALSE(r.failed);
    CHECK(r.err_theta <= 1e-8);  // oracle mode is exact
    CHECK(r.beta == 0.0);
  }
  // sorted by (sweep value, seed)
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK((rows[i - 1].sweep_value < rows[i].sweep_value ||
           (rows[i - 1].sweep_value == rows[i].sweep_value &&
            rows[i - 1].seed < rows[i].seed)));
  }
  CHECK(summary.str().find("sweep=60") != std::string::npos);
}

TEST_CASE("fixed seed sweeps are byte-identical across runs and threads") {
  TempDir dir;
  std::ostringstream sink;

  io::ExperimentConfig cfg = tiny_oracle_sweep(dir.file("a.csv"));
  run_sweep(cfg, sink);
  cfg.output_path = dir.file("b.csv");
  run_sweep(cfg, sink);
  const std::string first = read_text(dir.file("a.csv"));
  CHECK(first == read_text(dir.file("b.csv")));
  CHECK(first.find("nan") == std::string::npos);

  // worker count must not change the bytes
  ::setenv("SPOC_THREADS", "3", 1);
  cfg.output_path = dir.file("c.csv");
  run_sweep(cfg, sink);
  ::setenv("SPOC_THREADS", "1", 1);
  cfg.output_path = dir.file("d.csv");
  run_sweep(cfg, sink);
  ::unsetenv("SPOC_THREADS");
  CHECK(read_text(dir.file("c.csv")) == first);
  CHECK(read_text(dir.file("d.csv")) == first);
}

TEST_CASE("injected failures are recorded and do not abort the sweep") {
  TempDir dir;
  io::ExperimentConfig cfg = tiny_oracle_sweep(dir.file("r.csv"));
  cfg.inject_failures = {1, 4};
  std::ostringstream summary;
  const auto rows = run_sweep(cfg, summary);
  REQUIRE(rows.size() == 9);
  int failed = 0;
  for (const auto& r : rows) failed += r.failed ? 1 : 0;
  CHECK(failed == 2);
  CHECK(summary.str().find("failed") != std::string::npos);
}

TEST_CASE("estimate from disk matches the in-memory pipeline bit-exactly") {
  TempDir dir;
  SimulationConfig scfg = SimulationConfig::defaults(77);
  scfg.n = 80;
  const MembershipMatrix theta = sample_membership(scfg);
  const EdgeProbabilityMatrix p = edge_probabilities(theta, scfg.b);
  const Adjacency a = sample_adjacency(p, 78);
  io::write_edge_list(a, dir.file("g.tsv"));

  std::ostringstream info;
  const EstimateOutput out =
      run_estimate(dir.file("g.tsv"), 3, SpocOptions{}, 1.0 / 3.0,
                   dir.file("est"), info);

  const EstimationResult direct = estimate(a, 3, SpocOptions{});
  CHECK(out.result.theta_hat == direct.theta_hat);
  CHECK(out.result.b_hat == direct.b_hat);

  CHECK(fs::exists(out.b_path));
  CHECK(fs::exists(out.theta_path));
  CHECK(fs::exists(out.communities_path));
  CHECK(io::read_matrix_csv(out.b_path).rows() == 3);
  CHECK(io::read_matrix_csv(out.theta_path).rows() == 80);
  CHECK(info.str().find("eigengap") != std::string::npos);
}

TEST_CASE("path graph with K = 1 yields a single-column Theta") {
  TempDir dir;
  {
    std::ofstream out(dir.file("g.tsv"));
    out << "0 1\n1 2\n";
  }
  std::ostringstream info;
  const EstimateOutput out = run_estimate(dir.file("g.tsv"), 1, SpocOptions{},
                                          -1.0, dir.file("est"), info);
  CHECK(out.result.theta_hat.cols() == 1);
  CHECK(out.communities_path.empty());

  CHECK_THROWS_AS(run_estimate(dir.file("g.tsv"), 9, SpocOptions{}, -1.0,
                               dir.file("est2"), info),
                  UsageError);
}

TEST_CASE("run_diagnose") {
  TempDir dir;

  SUBCASE("oracle trials produce exactly-zero beta and ratios") {
    io::ExperimentConfig cfg = io::config_from_json_text("{}");
    cfg.base.n = 80;
    cfg.trials = 2;
    cfg.oracle = true;
    cfg.output_path = dir.file("d.csv");
    std::ostringstream sink;
    const auto lines = run_diagnose(cfg, sink);
    REQUIRE(lines.size() == 2);
    for (const std::string& line : lines) {
      // spec_norm_gap and beta columns are exactly "0"
      std::stringstream ss(line);
      std::string cell;
      std::vector<std::string> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      REQUIRE(cells.size() == 16);
      CHECK(cells[3] == "0");   // spec_norm_gap
      CHECK(cells[6] == "0");   // beta
      CHECK(cells[12] == "0");  // concentration lhs
      CHECK(cells[15] == "ok");
    }
    const std::string text = read_text(dir.file("d.csv"));
    CHECK(text.find("theorem2_rhs") != std::string::npos);
  }

  SUBCASE("empty sweep writes a header-only CSV") {
    io::ExperimentConfig cfg = io::config_from_json_text("{}");
    cfg.scenario = io::Scenario::vary_n;
    cfg.sweep = {};
    cfg.output_path = dir.file("d.csv");
    std::ostringstream sink;
    const auto lines = run_diagnose(cfg, sink);
    CHECK(lines.empty());
    const std::string text = read_text(dir.file("d.csv"));
    CHECK(text.find("scenario,") == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
  }

  SUBCASE("real_graph is rejected") {
    io::ExperimentConfig cfg = io::config_from_json_text("{}");
    cfg.scenario = io::Scenario::real_graph;
    cfg.graph_path = dir.file("g.tsv");
    std::ostringstream sink;
    CHECK_THROWS_AS(run_diagnose(cfg, sink), UsageError);
  }
}

TEST_CASE("real_graph sweep evaluates against provided memberships") {
  TempDir dir;
  SimulationConfig scfg = SimulationConfig::defaults(55);
  scfg.n = 200;
  const MembershipMatrix theta = sample_membership(scfg);
  const EdgeProbabilityMatrix p = edge_probabilities(theta, scfg.b);
  const Adjacency a = sample_adjacency(p, 56);
  io::write_edge_list(a, dir.file("g.tsv"));
  io::write_matrix_csv(theta.rows(), dir.file("m.csv"));

  io::ExperimentConfig cfg = io::config_from_json_text("{}");
  cfg.scenario = io::Scenario::real_graph;
  cfg.graph_path = dir.file("g.tsv");
  cfg.membership_path = dir.file("m.csv");
  cfg.trials = 1;
  cfg.output_path = dir.file("r.csv");
  std::ostringstream sink;
  const auto rows = run_sweep(cfg, sink);
  REQUIRE(rows.size() == 1);
  CHECK_FALSE(rows[0].failed);
  CHECK(std::isfinite(rows[0].err_theta));

  // the row must match an in-memory evaluation against the same files
  const MembershipMatrix truth = io::read_membership_csv(dir.file("m.csv"));
  const EstimationResult est = estimate(a, 3);
  const PermutationAlignment align = align_to_membership(est.theta_hat, truth);
  const SpearmanResult expect =
      spearman_quality(est.theta_hat, truth, align.perm);
  // rows round-trip through the 12-digit CSV, so compare at that precision
  CHECK(io::format_real(rows[0].spearman) == io::format_real(expect.average));
  CHECK(io::format_real(rows[0].err_theta) ==
        io::format_real(align.aligned_error_theta));
  CHECK(rows[0].spearman > 0.2);
}

TEST_CASE("cli binary") {
  TempDir dir;
  if (run_cli("--help", dir.path.string()) == -1) {
    MESSAGE("SPOC_CLI not set; skipping binary tests");
    return;
  }

  SUBCASE("exit codes") {
    CHECK(run_cli("--definitely-not-a-flag", dir.path.string()) == 2);
    CHECK(run_cli("estimate missing.tsv --k 2", dir.path.string()) == 3);
    {
      std::ofstream out(dir.file("g.tsv"));
      out << "0 1\n1 2\n";
    }
    CHECK(run_cli("estimate g.tsv --k 9", dir.path.string()) == 2);
    CHECK(run_cli("estimate g.tsv --k 1", dir.path.string()) == 0);
  }

  SUBCASE("simulate then estimate round trip") {
    std::ofstream cfg(dir.file("cfg.json"));
    cfg << "{\"n\": 60, \"seed\": 5}";
    cfg.close();
    CHECK(run_cli("simulate --config cfg.json --out sim",
                  dir.path.string()) == 0);
    CHECK(fs::exists(dir.file("sim_edges.tsv")));
    CHECK(fs::exists(dir.file("sim_Theta.csv")));
    CHECK(run_cli("estimate sim_edges.tsv --k 3 --out est",
                  dir.path.string()) == 0);
    CHECK(fs::exists(dir.file("est_Theta.csv")));
  }

  SUBCASE("sweep subcommand is byte-deterministic") {
    std::ofstream cfg(dir.file("cfg.json"));
    cfg << "{\"scenario\": \"vary_n\", \"sweep\": [50, 90], \"trials\": 2, "
           "\"n\": 50, \"oracle\": true, \"seed\": 9, "
           "\"output\": \"s1.csv\"}";
    cfg.close();
    REQUIRE(run_cli("sweep --config cfg.json", dir.path.string()) == 0);
    REQUIRE(run_cli("sweep --config cfg.json --out s2.csv",
                    dir.path.string()) == 0);
    CHECK(read_text(dir.file("s1.csv")) == read_text(dir.file("s2.csv")));

    REQUIRE(run_cli("diagnose --config cfg.json --out d1.csv",
                    dir.path.string()) == 0);
    REQUIRE(run_cli("diagnose --config cfg.json --out d2.csv",
                    dir.path.string()) == 0);
    CHECK(read_text(dir.file("d1.csv")) == read_text(dir.file("d2.csv")));
  }
}
