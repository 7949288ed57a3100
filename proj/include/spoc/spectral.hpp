#pragma once

#include <Eigen/Dense>

#include "spoc/model.hpp"

namespace spoc {

/// Rank-K symmetric eigendecomposition M ~= U diag(values) U^T.
///
/// Eigenpairs are ordered by descending |value|. Sign convention: in each
/// column the entry of largest absolute value is positive (ties broken by
/// lowest row index), which makes results bit-stable across runs.
struct SpectralEmbedding {
  Matrix vectors;  // n x K, orthonormal columns
  Vector values;   // K

  /// |lambda_{K+1}| (exact on the dense path, Ritz estimate on the
  /// iterative path, NaN when K = n).
  double abs_tail = std::numeric_limits<double>::quiet_NaN();
  /// Set when |lambda_K| and |lambda_{K+1}| are within tolerance of each
  /// other, i.e. the retained subspace is not well separated.
  bool tail_degenerate = false;

  Index nodes() const { return vectors.rows(); }
  Index count() const { return vectors.cols(); }
};

struct EigenOptions {
  /// Symmetry tolerance on input and relative residual bound on output.
  double tol = 1e-8;
  /// Dense solver is used up to this size, thick-restart Lanczos above.
  Index dense_threshold = 2000;
  /// Iterative path matvec budget; 0 selects an automatic budget.
  Index max_matvecs = 0;
};

/// K eigenpairs of largest absolute eigenvalue of a symmetric matrix.
/// Guarantees ||M v - lambda v|| <= tol * ||M|| per pair or throws
/// NumericalError with the iteration count.
SpectralEmbedding top_k_eigen(const Matrix& m, Index k,
                              const EigenOptions& opts = {});

inline SpectralEmbedding top_k_eigen(const Matrix& m, Index k, double tol) {
  EigenOptions opts;
  opts.tol = tol;
  return top_k_eigen(m, k, opts);
}

/// Largest absolute eigenvalue of a symmetric matrix via power iteration on
/// the norm-growth ratio (robust to +-lambda ties, no deflation needed).
double spectral_norm(const Matrix& m, double tol = 1e-6,
                     Index max_iter = 20000);

/// Orthogonal Procrustes factor: the orthogonal polar factor of M,
/// minimizing ||A - B O||_F over orthogonal O when M = B^T A.
Matrix polar_orthogonal(const Matrix& m);

}  // namespace spoc
