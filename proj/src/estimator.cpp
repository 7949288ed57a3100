#include "spoc/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "spoc/errors.hpp"

namespace spoc {

namespace {

EstimationResult run_pipeline(const Matrix& sym, Index k,
                              const SpocOptions& opts) {
  const Index n = sym.rows();
  if (k < 1) throw UsageError("spoc: K must be >= 1");
  if (k > n) throw UsageError("spoc: K exceeds the number of nodes");

  EstimationResult est;
  est.embedding = top_k_eigen(sym, k, opts.eigen);

  const double lam_max = std::abs(est.embedding.values[0]);
  const double lam_k = std::abs(est.embedding.values[k - 1]);
  if (lam_k <= 1e-12 * std::max(lam_max, 1e-300))
    throw NumericalError(
        "spoc: input has numerical rank below K (|lambda_K| ~ 0)");
  if (!std::isnan(est.embedding.abs_tail))
    est.eigen_gap = lam_k - est.embedding.abs_tail;

  const SpaResult sel =
      spa(est.embedding.vectors.transpose(), k, opts.precondition);
  est.pure_nodes = sel.indices;

  Matrix f(k, k);
  for (Index j = 0; j < k; ++j)
    f.row(j) = est.embedding.vectors.row(sel.indices[static_cast<std::size_t>(j)]);

  est.b_hat = f * est.embedding.values.asDiagonal() * f.transpose();
  est.b_hat = 0.5 * (est.b_hat + est.b_hat.transpose()).eval();

  const Matrix gram = f * f.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success)
    throw NumericalError("spoc: eigensolver failed on F F^T");
  const double gmin = es.eigenvalues().minCoeff();
  const double gmax = es.eigenvalues().maxCoeff();
  est.fft_min_eigenvalue = gmin;
  if (gmin <= 0.0 || gmax / gmin > 1e12)
    throw NumericalError("spoc: F F^T is singular (smallest eigenvalue " +
                         std::to_string(gmin) + ")");

  // Theta = U F^T (F F^T)^{-1}, via the spectral factorization of F F^T
  const Matrix gram_inv = es.eigenvectors() *
                          es.eigenvalues().cwiseInverse().asDiagonal() *
                          es.eigenvectors().transpose();
  est.theta_hat = est.embedding.vectors * (f.transpose() * gram_inv);

  if (opts.clip) clip_to_unit_interval(est);
  return est;
}

double pearson(const Vector& x, const Vector& y) {
  const double mx = x.mean();
  const double my = y.mean();
  const Vector dx = x.array() - mx;
  const Vector dy = y.array() - my;
  const double denom = dx.norm() * dy.norm();
  if (denom == 0.0) return 0.0;
  return dx.dot(dy) / denom;
}

}  // namespace

EstimationResult estimate(const Adjacency& a, Index k, const SpocOptions& opts) {
  return run_pipeline(a.matrix(), k, opts);
}

EstimationResult estimate_oracle(const EdgeProbabilityMatrix& p, Index k,
                             const SpocOptions& opts) {
  return run_pipeline(p.entries(), k, opts);
}

void clip_to_unit_interval(EstimationResult& est) {
  est.b_hat = est.b_hat.cwiseMax(0.0).cwiseMin(1.0);
  est.theta_hat = est.theta_hat.cwiseMax(0.0).cwiseMin(1.0);
  est.clipped = true;
}

PermutationAlignment align_to_membership(const Matrix& theta_hat,
                                         const MembershipMatrix& theta) {
  const Index k = theta.communities();
  if (theta_hat.rows() != theta.nodes() || theta_hat.cols() != k)
    throw UsageError("align: dimension mismatch");
  if (k > 20) throw UsageError("align: K > 20 not supported");

  // cost(j, c) = ||theta_hat col j - theta col c||^2; the Frobenius
  // objective decomposes over matched column pairs.
  Matrix cost(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index c = 0; c < k; ++c)
      cost(j, c) = (theta_hat.col(j) - theta.rows().col(c)).squaredNorm();

  PermutationAlignment out;
  out.perm.resize(static_cast<std::size_t>(k));

  if (k <= 8) {
    out.method = "exhaustive";
    std::vector<Index> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), Index{0});
    double best = std::numeric_limits<double>::infinity();
    std::vector<Index> best_perm = perm;
    do {
      double total = 0.0;
      for (Index j = 0; j < k; ++j)
        total += cost(j, perm[static_cast<std::size_t>(j)]);
      if (total < best) {
        best = total;
        best_perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.perm = best_perm;
  } else {
    out.method = "greedy_correlation";
    Matrix corr(k, k);
    for (Index j = 0; j < k; ++j)
      for (Index c = 0; c < k; ++c)
        corr(j, c) = pearson(theta_hat.col(j), theta.rows().col(c));
    std::vector<bool> row_used(static_cast<std::size_t>(k), false);
    std::vector<bool> col_used(static_cast<std::size_t>(k), false);
    for (Index step = 0; step < k; ++step) {
      Index bj = -1, bc = -1;
      double best = -std::numeric_limits<double>::infinity();
      for (Index j = 0; j < k; ++j) {
        if (row_used[static_cast<std::size_t>(j)]) continue;
        for (Index c = 0; c < k; ++c) {
          if (col_used[static_cast<std::size_t>(c)]) continue;
          if (corr(j, c) > best) {
            best = corr(j, c);
            bj = j;
            bc = c;
          }
        }
      }
      out.perm[static_cast<std::size_t>(bj)] = bc;
      row_used[static_cast<std::size_t>(bj)] = true;
      col_used[static_cast<std::size_t>(bc)] = true;
    }
  }

  double sq = 0.0;
  for (Index j = 0; j < k; ++j)
    sq += cost(j, out.perm[static_cast<std::size_t>(j)]);
  const double theta_norm = theta.rows().norm();
  if (theta_norm == 0.0) throw UsageError("align: zero-norm target");
  out.aligned_error_theta = std::sqrt(sq) / theta_norm;
  return out;
}

PermutationAlignment align_to_truth(const EstimationResult& est,
                                    const MembershipMatrix& theta,
                                    const ConnectivityMatrix& b) {
  if (b.communities() != theta.communities())
    throw UsageError("align_to_truth: Theta and B disagree on K");
  PermutationAlignment out = align_to_membership(est.theta_hat, theta);

  const Index k = b.communities();
  Matrix b_perm(k, k);
  for (Index j = 0; j < k; ++j)
    for (Index l = 0; l < k; ++l)
      b_perm(j, l) = b.entries()(out.perm[static_cast<std::size_t>(j)],
                                 out.perm[static_cast<std::size_t>(l)]);
  const double b_norm = b.entries().norm();
  if (b_norm == 0.0) throw UsageError("align_to_truth: zero-norm B");
  out.aligned_error_b = (est.b_hat - b_perm).norm() / b_norm;
  return out;
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> threshold_communities(
    const Matrix& theta_hat, double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw UsageError("threshold_communities: tau must be in (0,1)");
  return theta_hat.array() > tau;
}

}  // namespace spoc
