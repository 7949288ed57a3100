#pragma once

#include <vector>

#include "spoc/model.hpp"

namespace spoc {

/// Instance-level theory diagnostics; every field is nonnegative.
struct DiagnosticsBundle {
  double spec_norm_gap = 0.0;  // ||A - P||
  double lambda_k_p = 0.0;     // |lambda_K(P)|
  double kappa_p = 0.0;        // |lambda_1(P)| / |lambda_K(P)|
  double beta = 0.0;           // max_i beta_i(A, P)
  Vector beta_rows;            // beta_i per node
  double lambda_k_theta = 0.0;
  double lambda_max_theta = 0.0;
  double theorem2_rhs = 0.0;   // K sqrt(log n / (rho^2 n))
};

/// ||X_hat - X||_F / ||X||_F. Throws on a zero-norm target.
double relative_frobenius_error(const Matrix& x_hat, const Matrix& x_target);

/// Row-wise embedding perturbation functional
///   beta_i = 23 sqrt(K) kappa(P) ||e_i^T A|| ||A - P|| / lambda_K(P)^2
///          + ||e_i^T (A - P) U|| / lambda_K(P)
/// with U the top-K eigenvectors of the rank-K matrix P.
double beta_row(const Matrix& a, const Matrix& p, const Matrix& u, Index i,
                double spec_norm_tol = 1e-6);

/// All beta_i at once; shares the ||A - P|| evaluation across rows.
Vector beta_rows_all(const Matrix& a, const Matrix& p, const Matrix& u,
                     double spec_norm_tol = 1e-6);

/// Full bundle for a simulated instance with known parameters.
DiagnosticsBundle compute_diagnostics(const Matrix& a,
                                      const EdgeProbabilityMatrix& p,
                                      const MembershipMatrix& theta,
                                      const ConnectivityMatrix& b,
                                      double spec_norm_tol = 1e-6);

struct SpearmanResult {
  double average = 0.0;
  /// Number of community columns where either side was constant (their
  /// correlation is undefined and contributes 0).
  int constant_columns = 0;
};

/// Spearman rank correlation (average ranks on ties) between each true
/// community column and its aligned estimated column, averaged over
/// communities. perm[j] is the true column matched to estimated column j.
SpearmanResult spearman_quality(const Matrix& theta_hat,
                                const MembershipMatrix& theta,
                                const std::vector<Index>& perm);

/// Ranks with ties replaced by their average rank (1-based).
Vector average_ranks(const Vector& x);

struct Theorem2Report {
  double ratio_b = 0.0;
  double ratio_theta = 0.0;
};

/// Observed error over the theoretical rate K sqrt(log n/(rho^2 n)).
/// Reported for slope analysis; the theory constant is never asserted.
Theorem2Report theorem2_check(const DiagnosticsBundle& diag, double err_b,
                              double err_theta);

struct ConcentrationReport {
  double lhs = 0.0;        // ||A - P||
  double rhs_scale = 0.0;  // sqrt(max(n rho, log n))
  double ratio = 0.0;
  double r = 0.0;          // probability exponent tag, recorded only
};

ConcentrationReport concentration_check(const Matrix& a,
                                        const EdgeProbabilityMatrix& p,
                                        double r,
                                        double spec_norm_tol = 1e-6);

}  // namespace spoc
