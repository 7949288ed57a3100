#pragma once

#include <string>
#include <vector>

#include "spoc/model.hpp"
#include "spoc/spa.hpp"
#include "spoc/spectral.hpp"

namespace spoc {

struct SpocOptions {
  /// Truncate estimates into [0,1] after the least-squares fit.
  bool clip = true;
  /// Run SPA on ellipsoid-preconditioned embeddings.
  bool precondition = false;
  EigenOptions eigen;
};

struct EstimationResult {
  Matrix b_hat;      // K x K, exactly symmetric
  Matrix theta_hat;  // n x K; rows are NOT renormalized
  std::vector<Index> pure_nodes;
  SpectralEmbedding embedding;
  bool clipped = false;

  // solver diagnostics
  double fft_min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  double eigen_gap = std::numeric_limits<double>::quiet_NaN();
};

/// Full pipeline on an observed adjacency matrix:
///   1. rank-K eigendecomposition of A
///   2. SPA on the embedding rows to locate near-pure nodes J
///   3. F = U[J,:]
///   4. B = F Lambda F^T (symmetrized)
///   5. Theta = U F^T (F F^T)^{-1}, solved, never inverted explicitly
EstimationResult estimate(const Adjacency& a, Index k,
                      const SpocOptions& opts = {});

/// Identical pipeline run on the edge-probability matrix itself; the
/// noiseless harness used by exactness tests.
EstimationResult estimate_oracle(const EdgeProbabilityMatrix& p, Index k,
                             const SpocOptions& opts = {});

/// Truncate b_hat and theta_hat entries into [0,1] and mark the result.
void clip_to_unit_interval(EstimationResult& est);

struct PermutationAlignment {
  /// Estimated community j corresponds to true community perm[j].
  std::vector<Index> perm;
  double aligned_error_b = 0.0;
  double aligned_error_theta = 0.0;
  std::string method;  // "exhaustive" or "greedy_correlation"
};

/// Community permutation minimizing ||Theta_hat - Theta P^T||_F; exhaustive
/// for K <= 8, greedy correlation matching above; K > 20 rejected. Both
/// relative errors are reported under the single chosen permutation.
PermutationAlignment align_to_truth(const EstimationResult& est,
                                    const MembershipMatrix& theta,
                                    const ConnectivityMatrix& b);

/// Permutation (and aligned Theta error) against a membership matrix only;
/// used when no ground-truth B exists.
PermutationAlignment align_to_membership(const Matrix& theta_hat,
                                         const MembershipMatrix& theta);

/// Boolean community flags: entry is true iff theta_hat(i,k) > tau.
Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> threshold_communities(
    const Matrix& theta_hat, double tau);

}  // namespace spoc
