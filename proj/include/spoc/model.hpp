#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "spoc/rng.hpp"

namespace spoc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Row-stochastic n x K matrix of community weights; one row per node.
/// Rows must be nonnegative, entries <= 1, and sum to 1 within kRowSumTol.
class MembershipMatrix {
 public:
  static constexpr double kRowSumTol = 1e-12;

  MembershipMatrix() = default;
  explicit MembershipMatrix(Matrix rows);

  Index nodes() const { return rows_.rows(); }
  Index communities() const { return rows_.cols(); }
  const Matrix& rows() const { return rows_; }

 private:
  Matrix rows_;
};

/// Symmetric K x K matrix of community-community edge probabilities.
class ConnectivityMatrix {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  ConnectivityMatrix() = default;
  explicit ConnectivityMatrix(Matrix entries);
  static ConnectivityMatrix Diagonal(const Vector& diag);

  Index communities() const { return entries_.rows(); }
  const Matrix& entries() const { return entries_; }

  /// Sparsity level rho = max entry.
  double max_entry() const { return entries_.maxCoeff(); }

 private:
  Matrix entries_;
};

/// n x n symmetric matrix of edge probabilities; rank <= K when built from
/// a membership/connectivity pair.
class EdgeProbabilityMatrix {
 public:
  EdgeProbabilityMatrix() = default;
  explicit EdgeProbabilityMatrix(Matrix p);

  Index nodes() const { return p_.rows(); }
  const Matrix& entries() const { return p_; }

 private:
  Matrix p_;
};

/// Undirected simple graph stored dense: entries in {0,1}, zero diagonal.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(Matrix a);

  Index nodes() const { return a_.rows(); }
  const Matrix& matrix() const { return a_; }
  Index edge_count() const;

 private:
  Matrix a_;
};

/// Parameters of one synthetic instance. Pure nodes are prepended at fixed
/// indices (community i occupies rows [i*pure_per_community,
/// (i+1)*pure_per_community)), the remaining rows are i.i.d.
/// Dirichlet(dirichlet_alpha).
struct SimulationConfig {
  Index n = 1000;
  Index k = 3;
  Vector dirichlet_alpha;  // size k, all positive
  ConnectivityMatrix b;
  Index pure_per_community = 1;
  std::uint64_t seed = 42;

  void validate() const;  // throws UsageError

  /// n=1000, K=3, alpha=0.5, B=diag(0.3,0.5,0.7), one pure node per
  /// community.
  static SimulationConfig defaults(std::uint64_t seed = 42);
};

struct IdentifiabilityReport {
  bool has_pure_node_per_community = false;
  bool b_full_rank = false;
  bool rows_normalized = false;

  bool ok() const {
    return has_pure_node_per_community && b_full_rank && rows_normalized;
  }
};

/// Checks the identifiability conditions: a pure node in every community,
/// full-rank B, normalized rows.
IdentifiabilityReport check_identifiability(const MembershipMatrix& theta,
                                            const ConnectivityMatrix& b,
                                            double rank_tol = 1e-8);

MembershipMatrix sample_membership(const SimulationConfig& cfg);

/// P = Theta * B * Theta^T, diagonal included, symmetrized exactly.
EdgeProbabilityMatrix edge_probabilities(const MembershipMatrix& theta,
                                         const ConnectivityMatrix& b);

/// Independent Bernoulli(P_ij) draws for i < j, mirrored; zero diagonal.
Adjacency sample_adjacency(const EdgeProbabilityMatrix& p, std::uint64_t seed);

}  // namespace spoc
