#include "spoc/metrics.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "spoc/errors.hpp"
#include "spoc/spectral.hpp"

namespace spoc {

namespace {

struct PSpectrum {
  double lambda_k = 0.0;
  double kappa = 0.0;
};

PSpectrum p_spectrum(const Matrix& p, Index k) {
  const SpectralEmbedding emb = top_k_eigen(p, k, EigenOptions{});
  PSpectrum s;
  s.lambda_k = std::abs(emb.values[k - 1]);
  if (s.lambda_k == 0.0)
    throw NumericalError("beta: lambda_K(P) is zero");
  s.kappa = std::abs(emb.values[0]) / s.lambda_k;
  return s;
}

Vector beta_impl(const Matrix& a, const Matrix& p, const Matrix& u,
                 double gap, const PSpectrum& s) {
  const Index n = a.rows();
  const double root_k = std::sqrt(static_cast<double>(u.cols()));
  const Matrix delta_u = (a - p) * u;  // n x K
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    const double term1 = 23.0 * root_k * s.kappa * a.row(i).norm() * gap /
                         (s.lambda_k * s.lambda_k);
    const double term2 = delta_u.row(i).norm() / s.lambda_k;
    out[i] = term1 + term2;
  }
  return out;
}

void check_same_shape(const Matrix& a, const Matrix& p) {
  if (a.rows() != p.rows() || a.cols() != p.cols())
    throw UsageError("metrics: A and P must have the same shape");
}

}  // namespace

double relative_frobenius_error(const Matrix& x_hat, const Matrix& x_target) {
  if (x_hat.rows() != x_target.rows() || x_hat.cols() != x_target.cols())
    throw UsageError("relative_frobenius_error: shape mismatch");
  const double denom = x_target.norm();
  if (denom == 0.0)
    throw UsageError("relative_frobenius_error: zero-norm target");
  return (x_hat - x_target).norm() / denom;
}

double beta_row(const Matrix& a, const Matrix& p, const Matrix& u, Index i,
                double spec_norm_tol) {
  check_same_shape(a, p);
  if (i < 0 || i >= a.rows()) throw UsageError("beta_row: index out of range");
  const PSpectrum s = p_spectrum(p, u.cols());
  const double gap = spectral_norm(a - p, spec_norm_tol);
  return beta_impl(a, p, u, gap, s)[i];
}

Vector beta_rows_all(const Matrix& a, const Matrix& p, const Matrix& u,
                     double spec_norm_tol) {
  check_same_shape(a, p);
  const PSpectrum s = p_spectrum(p, u.cols());
  const double gap = spectral_norm(a - p, spec_norm_tol);
  return beta_impl(a, p, u, gap, s);
}

DiagnosticsBundle compute_diagnostics(const Matrix& a,
                                      const EdgeProbabilityMatrix& p,
                                      const MembershipMatrix& theta,
                                      const ConnectivityMatrix& b,
                                      double spec_norm_tol) {
  check_same_shape(a, p.entries());
  const Index n = p.nodes();
  const Index k = b.communities();

  DiagnosticsBundle diag;
  const SpectralEmbedding emb = top_k_eigen(p.entries(), k, EigenOptions{});
  diag.lambda_k_p = std::abs(emb.values[k - 1]);
  if (diag.lambda_k_p == 0.0)
    throw NumericalError("compute_diagnostics: lambda_K(P) is zero");
  diag.kappa_p = std::abs(emb.values[0]) / diag.lambda_k_p;

  diag.spec_norm_gap = spectral_norm(a - p.entries(), spec_norm_tol);
  PSpectrum s;
  s.lambda_k = diag.lambda_k_p;
  s.kappa = diag.kappa_p;
  diag.beta_rows = beta_impl(a, p.entries(), emb.vectors, diag.spec_norm_gap, s);
  diag.beta = diag.beta_rows.maxCoeff();

  Eigen::JacobiSVD<Matrix> svd(theta.rows());
  diag.lambda_max_theta = svd.singularValues().maxCoeff();
  diag.lambda_k_theta = svd.singularValues().minCoeff();

  const double rho = b.max_entry();
  diag.theorem2_rhs =
      static_cast<double>(k) *
      std::sqrt(std::log(static_cast<double>(n)) /
                (rho * rho * static_cast<double>(n)));
  return diag;
}

Vector average_ranks(const Vector& x) {
  const Index n = x.size();
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return x[a] < x[b]; });
  Vector ranks(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && x[idx[static_cast<std::size_t>(j + 1)]] ==
                            x[idx[static_cast<std::size_t>(i)]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (Index t = i; t <= j; ++t)
      ranks[idx[static_cast<std::size_t>(t)]] = avg;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman_quality(const Matrix& theta_hat,
                                const MembershipMatrix& theta,
                                const std::vector<Index>& perm) {
  const Index k = theta.communities();
  if (theta_hat.rows() != theta.nodes() || theta_hat.cols() != k)
    throw UsageError("spearman_quality: shape mismatch");
  if (static_cast<Index>(perm.size()) != k)
    throw UsageError("spearman_quality: perm size mismatch");

  SpearmanResult out;
  double total = 0.0;
  for (Index j = 0; j < k; ++j) {
    const Vector rx = average_ranks(theta_hat.col(j));
    const Vector ry =
        average_ranks(theta.rows().col(perm[static_cast<std::size_t>(j)]));
    const Vector dx = rx.array() - rx.mean();
    const Vector dy = ry.array() - ry.mean();
    const double denom = dx.norm() * dy.norm();
    if (denom == 0.0) {
      ++out.constant_columns;  // undefined correlation counts as 0
      continue;
    }
    total += dx.dot(dy) / denom;
  }
  out.average = total / static_cast<double>(k);
  return out;
}

Theorem2Report theorem2_check(const DiagnosticsBundle& diag, double err_b,
                              double err_theta) {
  Theorem2Report rep;
  auto ratio = [&](double err) {
    if (err == 0.0) return 0.0;
    if (!std::isfinite(diag.theorem2_rhs) || diag.theorem2_rhs == 0.0)
      return 0.0;
    return err / diag.theorem2_rhs;
  };
  rep.ratio_b = ratio(err_b);
  rep.ratio_theta = ratio(err_theta);
  return rep;
}

ConcentrationReport concentration_check(const Matrix& a,
                                        const EdgeProbabilityMatrix& p,
                                        double r, double spec_norm_tol) {
  check_same_shape(a, p.entries());
  ConcentrationReport rep;
  rep.r = r;
  rep.lhs = spectral_norm(a - p.entries(), spec_norm_tol);
  const double n = static_cast<double>(p.nodes());
  const double rho = p.nodes() > 0 ? p.entries().maxCoeff() : 0.0;
  const double d = std::max(n * rho, n > 0.0 ? std::log(n) : 0.0);
  rep.rhs_scale = std::sqrt(d);
  rep.ratio = rep.rhs_scale > 0.0
                  ? rep.lhs / rep.rhs_scale
                  : (rep.lhs == 0.0 ? 0.0
                                    : std::numeric_limits<double>::infinity());
  return rep;
}

}  // namespace spoc
