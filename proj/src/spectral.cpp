#include "spoc/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "spoc/errors.hpp"
#include "spoc/rng.hpp"

namespace spoc {

namespace {

void check_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols())
    throw UsageError("top_k_eigen: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw UsageError("top_k_eigen: matrix is not symmetric within tolerance");
}

/// Flip column signs so the largest-magnitude entry is positive.
void apply_sign_convention(Matrix& vecs) {
  for (Index j = 0; j < vecs.cols(); ++j) {
    Index at = 0;
    vecs.col(j).cwiseAbs().maxCoeff(&at);
    if (vecs(at, j) < 0.0) vecs.col(j) = -vecs.col(j);
  }
}

/// Indices of the k largest-|value| entries; stable, so exact ties keep the
/// lowest original index first.
std::vector<Index> order_by_abs(const Vector& vals) {
  std::vector<Index> idx(vals.size());
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return std::abs(vals[a]) > std::abs(vals[b]);
  });
  return idx;
}

SpectralEmbedding dense_top_k(const Matrix& m, Index k, double tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw NumericalError("top_k_eigen: dense eigensolver failed");

  const Vector& all = es.eigenvalues();
  const std::vector<Index> idx = order_by_abs(all);

  SpectralEmbedding emb;
  emb.vectors.resize(m.rows(), k);
  emb.values.resize(k);
  for (Index j = 0; j < k; ++j) {
    emb.values[j] = all[idx[static_cast<std::size_t>(j)]];
    emb.vectors.col(j) = es.eigenvectors().col(idx[static_cast<std::size_t>(j)]);
  }
  const double norm = all.cwiseAbs().maxCoeff();
  if (k < m.rows()) {
    emb.abs_tail = std::abs(all[idx[static_cast<std::size_t>(k)]]);
    emb.tail_degenerate =
        std::abs(emb.values[k - 1]) - emb.abs_tail <= tol * norm;
  }
  apply_sign_convention(emb.vectors);
  return emb;
}

/// Thick-restart Lanczos with full reorthogonalization. The projected
/// matrix H is kept dense (small: subspace dimension ~ 3K+12) so restarts
/// with a non-tridiagonal border need no special casing.
SpectralEmbedding lanczos_top_k(const Matrix& m, Index k, double tol,
                                Index max_matvecs) {
  const Index n = m.rows();
  const Index dim = std::min<Index>(n, std::max<Index>(3 * k + 12, 40));
  const Index keep = std::min<Index>(2 * k + 4, dim - 2);
  if (max_matvecs <= 0) max_matvecs = 400 * k + 4000;

  Matrix basis(n, dim + 1);
  Matrix proj = Matrix::Zero(dim + 1, dim + 1);

  rng::Engine eng = rng::make_engine(0x53504f43u);  // fixed start vector
  auto random_unit = [&]() {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = rng::normal(eng);
    return v.normalized().eval();
  };

  basis.col(0) = random_unit();
  Index active = 0;   // columns already holding locked Ritz vectors
  Index matvecs = 0;
  double norm_est = 0.0;

  for (;;) {
    // expand the subspace from column `active` up to `dim`
    for (Index j = active; j < dim; ++j) {
      if (matvecs >= max_matvecs)
        throw NumericalError("top_k_eigen: no convergence after " +
                             std::to_string(matvecs) + " matvecs");
      Vector w = m * basis.col(j);
      ++matvecs;
      // two-pass classical Gram-Schmidt against the whole basis
      Vector h = basis.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.leftCols(j + 1) * h;
      Vector h2 = basis.leftCols(j + 1).transpose() * w;
      w.noalias() -= basis.leftCols(j + 1) * h2;
      h += h2;
      proj.col(j).head(j + 1) = h;
      proj.row(j).head(j + 1) = h.transpose();
      double beta = w.norm();
      if (beta <= 1e-14 * std::max(norm_est, 1.0)) {
        // invariant subspace: continue with a fresh direction
        Vector f = random_unit();
        f -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * f);
        f -= basis.leftCols(j + 1) * (basis.leftCols(j + 1).transpose() * f);
        beta = 0.0;
        basis.col(j + 1) = f.normalized();
      } else {
        basis.col(j + 1) = w / beta;
      }
      proj(j + 1, j) = beta;
      proj(j, j + 1) = beta;
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(proj.topLeftCorner(dim, dim));
    if (es.info() != Eigen::Success)
      throw NumericalError("top_k_eigen: projected eigensolver failed");
    const Vector ritz = es.eigenvalues();
    norm_est = std::max(norm_est, ritz.cwiseAbs().maxCoeff());
    const std::vector<Index> idx = order_by_abs(ritz);

    const double beta_last = proj(dim, dim - 1);
    auto residual_of = [&](Index rank) {
      const Index c = idx[static_cast<std::size_t>(rank)];
      return std::abs(beta_last * es.eigenvectors()(dim - 1, c));
    };

    bool converged = true;
    for (Index r = 0; r < k; ++r)
      if (residual_of(r) > 0.25 * tol * std::max(norm_est, 1e-300))
        converged = false;

    if (converged) {
      SpectralEmbedding emb;
      emb.vectors.resize(n, k);
      emb.values.resize(k);
      for (Index r = 0; r < k; ++r) {
        const Index c = idx[static_cast<std::size_t>(r)];
        emb.values[r] = ritz[c];
        emb.vectors.col(r).noalias() =
            basis.leftCols(dim) * es.eigenvectors().col(c);
        emb.vectors.col(r).normalize();
      }
      if (k < dim) {
        emb.abs_tail = std::abs(ritz[idx[static_cast<std::size_t>(k)]]);
        emb.tail_degenerate =
            std::abs(emb.values[k - 1]) - emb.abs_tail <= tol * norm_est;
      }
      apply_sign_convention(emb.vectors);
      return emb;
    }

    // thick restart: lock the `keep` best Ritz pairs plus the residual
    // direction, then continue expanding
    Matrix locked(n, keep);
    Vector locked_vals(keep);
    Vector couple(keep);
    for (Index r = 0; r < keep; ++r) {
      const Index c = idx[static_cast<std::size_t>(r)];
      locked.col(r).noalias() = basis.leftCols(dim) * es.eigenvectors().col(c);
      locked_vals[r] = ritz[c];
      couple[r] = beta_last * es.eigenvectors()(dim - 1, c);
    }
    const Vector residual_vec = basis.col(dim);
    basis.leftCols(keep) = locked;
    basis.col(keep) = residual_vec;
    proj.setZero();
    proj.topLeftCorner(keep, keep).diagonal() = locked_vals;
    proj.col(keep).head(keep) = couple;
    proj.row(keep).head(keep) = couple.transpose();
    active = keep;
  }
}

}  // namespace

SpectralEmbedding top_k_eigen(const Matrix& m, Index k,
                              const EigenOptions& opts) {
  check_symmetric(m, opts.tol);
  const Index n = m.rows();
  if (k < 1 || k > n) throw UsageError("top_k_eigen: need 1 <= K <= n");

  SpectralEmbedding emb;
  if (n <= opts.dense_threshold || k >= n - 1) {
    emb = dense_top_k(m, k, opts.tol);
  } else {
    emb = lanczos_top_k(m, k, opts.tol, opts.max_matvecs);
  }

  // residual contract, checked explicitly for both paths
  const double norm = std::max(emb.values.cwiseAbs().maxCoeff(),
                               std::isnan(emb.abs_tail) ? 0.0 : emb.abs_tail);
  if (norm > 0.0) {
    const Matrix resid =
        m * emb.vectors - emb.vectors * emb.values.asDiagonal();
    for (Index j = 0; j < k; ++j) {
      if (resid.col(j).norm() > opts.tol * norm)
        throw NumericalError(
            "top_k_eigen: residual contract violated for pair " +
            std::to_string(j));
    }
  }
  return emb;
}

double spectral_norm(const Matrix& m, double tol, Index max_iter) {
  if (m.rows() != m.cols())
    throw UsageError("spectral_norm: matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw UsageError("spectral_norm: matrix is not symmetric");
  if (m.size() == 0) return 0.0;

  rng::Engine eng = rng::make_engine(0x6e6f726du);
  Vector v(m.rows());
  for (Index i = 0; i < m.rows(); ++i) v[i] = rng::normal(eng);
  v.normalize();

  // ||M^{t+1} x|| / ||M^t x|| converges to |lambda_max| even when the
  // extreme eigenvalues tie in magnitude with opposite signs.
  double prev = -1.0;
  int stable = 0;
  for (Index it = 0; it < max_iter; ++it) {
    Vector w = m * v;
    const double est = w.norm();
    if (est == 0.0) return 0.0;
    if (prev >= 0.0 && std::abs(est - prev) <= 0.05 * tol * est) {
      if (++stable >= 4) return est;
    } else {
      stable = 0;
    }
    prev = est;
    v = w / est;
  }
  throw NumericalError("spectral_norm: no convergence after " +
                       std::to_string(max_iter) + " iterations");
}

Matrix polar_orthogonal(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

}  // namespace spoc
