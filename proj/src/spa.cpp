#include "spoc/spa.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <string>

#include "spoc/errors.hpp"

namespace spoc {

namespace {

SpaResult spa_select(const Matrix& g, Index r) {
  const Index k = g.rows();
  const Index n = g.cols();

  Matrix residual = g;
  Matrix pivots(k, r);  // orthonormal directions selected so far
  SpaResult out;
  out.indices.reserve(static_cast<std::size_t>(r));
  out.residual_norms.resize(r);

  const double initial_max = residual.colwise().norm().maxCoeff();
  const double floor = 1e-12 * std::max(initial_max, 1e-300);

  for (Index t = 0; t < r; ++t) {
    const Vector norms = residual.colwise().norm();
    Index best = 0;
    for (Index j = 1; j < n; ++j)
      if (norms[j] > norms[best]) best = j;
    if (norms[best] <= floor)
      throw NumericalError(
          "spa: residual vanished after " + std::to_string(t) +
          " selections (rank-deficient input)");

    out.indices.push_back(best);
    out.residual_norms[t] = norms[best];

    Vector q = residual.col(best) / norms[best];
    if (t > 0) {
      // guard against drift before using q as a projector
      q -= pivots.leftCols(t) * (pivots.leftCols(t).transpose() * q);
      q.normalize();
    }
    pivots.col(t) = q;

    residual.noalias() -= q * (q.transpose() * residual);
    // re-orthogonalize against every pivot selected so far
    residual.noalias() -=
        pivots.leftCols(t + 1) *
        (pivots.leftCols(t + 1).transpose() * residual);
  }
  return out;
}

}  // namespace

SpaResult spa(const Matrix& g, Index r, bool precondition) {
  if (g.size() == 0) throw UsageError("spa: empty input");
  if (r < 1 || r > g.rows() || g.rows() > g.cols())
    throw UsageError("spa: need r <= K <= n");
  if (!g.allFinite()) throw UsageError("spa: input must be finite");

  if (!precondition) return spa_select(g, r);
  const MveeResult pre = precondition_mvee(g);
  return spa_select(pre.conditioned, r);
}

MveeResult precondition_mvee(const Matrix& g, double tol, Index max_iter) {
  const Index k = g.rows();
  const Index n = g.cols();
  if (k < 1 || n < k) throw UsageError("precondition_mvee: need K <= n");
  if (max_iter <= 0) max_iter = 10 * k * n;

  {
    Eigen::JacobiSVD<Matrix> svd(g * g.transpose());
    const Vector s = svd.singularValues();
    if (s[k - 1] <= 1e-20 * std::max(s[0], 1e-300))
      throw NumericalError("precondition_mvee: input is rank deficient");
  }

  // Maximize log det sum_j u_j g_j g_j^T over the weight simplex
  // (the dual of the centered MVEE problem). Frank-Wolfe "add" steps are
  // Khachiyan's updates; "away" steps drop weight from interior points and
  // make convergence fast in practice.
  Vector u = Vector::Constant(n, 1.0 / static_cast<double>(n));
  Matrix v = g * u.asDiagonal() * g.transpose();
  const double kd = static_cast<double>(k);

  Index it = 0;
  bool converged = false;
  for (; it < max_iter; ++it) {
    if (it % 64 == 0) v = g * u.asDiagonal() * g.transpose();  // drift reset
    Eigen::LLT<Matrix> llt(v);
    if (llt.info() != Eigen::Success)
      throw NumericalError("precondition_mvee: weight matrix lost rank");
    const Matrix w = llt.solve(g);
    const Vector omega = (g.cwiseProduct(w)).colwise().sum().transpose();

    Index jmax = 0;
    omega.maxCoeff(&jmax);
    const double kappa_plus = omega[jmax];
    if (kappa_plus <= kd * (1.0 + tol)) {
      converged = true;
      break;
    }

    Index jmin = -1;
    double kappa_minus = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j)
      if (u[j] > 0.0 && omega[j] < kappa_minus) {
        kappa_minus = omega[j];
        jmin = j;
      }

    const double eps_plus = kappa_plus / kd - 1.0;
    const double eps_minus = 1.0 - kappa_minus / kd;

    Index j;
    double beta;
    if (eps_plus >= eps_minus) {
      j = jmax;
      beta = (kappa_plus - kd) / (kd * (kappa_plus - 1.0));
    } else {
      j = jmin;
      const double beta_floor = -u[j] / (1.0 - u[j]);
      if (kappa_minus > 1.0)
        beta = std::max((kappa_minus - kd) / (kd * (kappa_minus - 1.0)),
                        beta_floor);
      else
        beta = beta_floor;  // 1-D objective is decreasing: drop the point
    }
    u *= (1.0 - beta);
    u[j] += beta;
    u[j] = std::max(u[j], 0.0);
    v = ((1.0 - beta) * v + beta * g.col(j) * g.col(j).transpose()).eval();
  }
  if (!converged)
    throw NumericalError("precondition_mvee: no convergence within " +
                         std::to_string(max_iter) + " iterations");

  Eigen::SelfAdjointEigenSolver<Matrix> es(v);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("precondition_mvee: ellipsoid matrix not PD");
  MveeResult out;
  out.transform = es.eigenvectors() *
                  (kd * es.eigenvalues().array()).rsqrt().matrix().asDiagonal() *
                  es.eigenvectors().transpose();
  out.conditioned = out.transform * g;
  out.iterations = it;
  return out;
}

double spa_error_bound(const Matrix& f, double eps) {
  if (f.rows() != f.cols()) throw UsageError("spa_error_bound: F must be square");
  if (eps < 0.0) throw UsageError("spa_error_bound: eps must be >= 0");
  Eigen::JacobiSVD<Matrix> svd(f);
  const Vector s = svd.singularValues();
  if (s[s.size() - 1] <= 0.0)
    throw NumericalError("spa_error_bound: F is singular");
  const double kappa = s[0] / s[s.size() - 1];
  return (432.0 * kappa + 4.0) * eps;
}

bool spa_noise_admissible(const Matrix& f, double eps, Index r) {
  if (f.rows() != f.cols())
    throw UsageError("spa_noise_admissible: F must be square");
  if (r <= 0) r = f.rows();
  Eigen::JacobiSVD<Matrix> svd(f);
  const double smin = svd.singularValues().minCoeff();
  if (smin <= 0.0)
    throw NumericalError("spa_noise_admissible: F is singular");
  return eps <= smin / (1225.0 * std::sqrt(static_cast<double>(r)));
}

}  // namespace spoc
