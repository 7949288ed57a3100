#include <doctest.h>

#include <Eigen/SVD>
#include <cmath>

#include "spoc/errors.hpp"
#include "spoc/metrics.hpp"
#include "spoc/spectral.hpp"

using namespace spoc;

namespace {

struct Instance {
  MembershipMatrix theta;
  EdgeProbabilityMatrix p;
  Adjacency a;
  ConnectivityMatrix b;
};

Instance sample_instance(Index n, std::uint64_t seed) {
  SimulationConfig cfg = SimulationConfig::defaults(seed);
  cfg.n = n;
  Instance inst;
  inst.theta = sample_membership(cfg);
  inst.b = cfg.b;
  inst.p = edge_probabilities(inst.theta, cfg.b);
  inst.a = sample_adjacency(inst.p, seed + 1);
  return inst;
}

/// Textbook Spearman: rank both columns (average ties), then Pearson.
double spearman_oracle(const Vector& x, const Vector& y) {
  const Index n = x.size();
  auto rank_of = [n](const Vector& v) {
    Vector r(n);
    for (Index i = 0; i < n; ++i) {
      double below = 0.0, equal = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (v[j] < v[i]) below += 1.0;
        if (v[j] == v[i]) equal += 1.0;
      }
      r[i] = below + 0.5 * (equal + 1.0);
    }
    return r;
  };
  const Vector rx = rank_of(x);
  const Vector ry = rank_of(y);
  const Vector dx = rx.array() - rx.mean();
  const Vector dy = ry.array() - ry.mean();
  return dx.dot(dy) / (dx.norm() * dy.norm());
}

}  // namespace

TEST_CASE("relative Frobenius error") {
  Matrix x(2, 2);
  x << 1, 0, 0, 2;
  CHECK(relative_frobenius_error(x, x) == 0.0);
  CHECK(relative_frobenius_error(2.0 * x, x) == doctest::Approx(1.0));

  Matrix id2 = Matrix::Identity(2, 2);
  CHECK(relative_frobenius_error(id2, x) ==
        doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-14));

  CHECK_THROWS_AS(relative_frobenius_error(x, Matrix::Zero(2, 2)),
                  UsageError);
  CHECK_THROWS_AS(relative_frobenius_error(x, Matrix::Zero(3, 3)),
                  UsageError);
}

TEST_CASE("beta vanishes exactly at A = P") {
  const Instance inst = sample_instance(60, 5);
  const SpectralEmbedding emb = top_k_eigen(inst.p.entries(), 3, 1e-10);
  const Vector rows =
      beta_rows_all(inst.p.entries(), inst.p.entries(), emb.vectors);
  for (Index i = 0; i < rows.size(); ++i) CHECK(rows[i] == 0.0);
  CHECK(beta_row(inst.p.entries(), inst.p.entries(), emb.vectors, 7) == 0.0);
}

TEST_CASE("beta single-flip hand oracle, K = 1") {
  const Index n = 24;
  const double rho = 0.4;
  const Matrix p_raw = Matrix::Constant(n, n, rho);
  const EdgeProbabilityMatrix p{p_raw};

  // flip one off-diagonal pair up to 1
  const Index fi = 3, fj = 11;
  const double delta = 1.0 - rho;
  Matrix a = p_raw;
  a(fi, fj) = a(fj, fi) = 1.0;

  const Matrix u = Matrix::Constant(n, 1, 1.0 / std::sqrt(double(n)));
  const double got = beta_row(a, p_raw, u, fi, 1e-9);

  // scalar oracle: kappa = 1, lambda_1 = rho n, ||A - P|| = delta,
  // ||e_i A|| = sqrt((n-1) rho^2 + (rho+delta)^2), ||e_i (A-P) U|| =
  // delta/sqrt(n)
  const double lam = rho * static_cast<double>(n);
  const double row_norm = std::sqrt((n - 1) * rho * rho +
                                    (rho + delta) * (rho + delta));
  const double expect =
      23.0 * 1.0 * 1.0 * row_norm * delta / (lam * lam) +
      delta / std::sqrt(static_cast<double>(n)) / lam;
  CHECK(got == doctest::Approx(expect).epsilon(1e-6));

  // max over rows equals the exhaustive maximum
  const Vector all = beta_rows_all(a, p_raw, u, 1e-9);
  double manual_max = 0.0;
  for (Index i = 0; i < n; ++i)
    manual_max = std::max(manual_max, beta_row(a, p_raw, u, i, 1e-9));
  CHECK(all.maxCoeff() == doctest::Approx(manual_max).epsilon(1e-12));
}

TEST_CASE("beta terms are monotone along the sampled noise direction") {
  const Instance inst = sample_instance(60, 21);
  const Index k = 3;
  const SpectralEmbedding emb = top_k_eigen(inst.p.entries(), k, 1e-10);
  const Matrix delta = inst.a.matrix() - inst.p.entries();

  const Index probe = 10;
  double prev_t1 = -1.0, prev_t2 = -1.0;
  for (double t : {0.1, 0.3, 0.5, 0.7, 1.0}) {
    const Matrix at = inst.p.entries() + t * delta;
    // compute the two terms from their definition
    const double gap = spectral_norm(at - inst.p.entries(), 1e-8);
    const SpectralEmbedding pe = top_k_eigen(inst.p.entries(), k, 1e-10);
    const double lam_k = std::abs(pe.values[k - 1]);
    const double kappa = std::abs(pe.values[0]) / lam_k;
    const double t1 = 23.0 * std::sqrt(double(k)) * kappa *
                      at.row(probe).norm() * gap / (lam_k * lam_k);
    const double t2 =
        ((at - inst.p.entries()) * pe.vectors).row(probe).norm() / lam_k;
    CHECK(t1 >= prev_t1);
    CHECK(t2 >= prev_t2);
    prev_t1 = t1;
    prev_t2 = t2;

    // and the module's value is exactly their sum
    CHECK(beta_row(at, inst.p.entries(), emb.vectors, probe, 1e-8) ==
          doctest::Approx(t1 + t2).epsilon(1e-9));
  }
}

TEST_CASE("compute_diagnostics bundles consistent values") {
  const Instance inst = sample_instance(80, 31);
  const DiagnosticsBundle diag =
      compute_diagnostics(inst.a.matrix(), inst.p, inst.theta, inst.b);

  CHECK(diag.beta == diag.beta_rows.maxCoeff());
  CHECK(diag.spec_norm_gap > 0.0);
  CHECK(diag.lambda_k_p > 0.0);
  CHECK(diag.kappa_p >= 1.0);
  CHECK(diag.lambda_k_theta > 0.0);
  CHECK(diag.lambda_max_theta >= diag.lambda_k_theta);

  const double expect_rhs =
      3.0 * std::sqrt(std::log(80.0) / (0.7 * 0.7 * 80.0));
  CHECK(diag.theorem2_rhs == doctest::Approx(expect_rhs).epsilon(1e-12));

  Eigen::JacobiSVD<Matrix> svd(inst.theta.rows());
  CHECK(diag.lambda_k_theta ==
        doctest::Approx(svd.singularValues().minCoeff()).epsilon(1e-10));
}

TEST_CASE("average ranks with ties") {
  Vector x(4);
  x << 1.0, 2.0, 2.0, 3.0;
  const Vector r = average_ranks(x);
  CHECK(r[0] == 1.0);
  CHECK(r[1] == 2.5);
  CHECK(r[2] == 2.5);
  CHECK(r[3] == 4.0);
}

TEST_CASE("spearman_quality") {
  SUBCASE("perfect and reversed rankings") {
    const Instance inst = sample_instance(50, 3);
    const std::vector<Index> id_perm = {0, 1, 2};
    const SpearmanResult perfect =
        spearman_quality(inst.theta.rows(), inst.theta, id_perm);
    CHECK(perfect.average == doctest::Approx(1.0).epsilon(1e-12));

    // K = 2 rows summing to one: 1 - Theta reverses every ranking
    SimulationConfig cfg2;
    cfg2.n = 40;
    cfg2.k = 2;
    cfg2.dirichlet_alpha = Vector::Constant(2, 0.5);
    cfg2.b = ConnectivityMatrix::Diagonal(Vector{{0.4, 0.6}});
    cfg2.pure_per_community = 1;
    cfg2.seed = 4;
    const MembershipMatrix theta2 = sample_membership(cfg2);
    const Matrix flipped = (1.0 - theta2.rows().array()).matrix();
    const SpearmanResult reversed =
        spearman_quality(flipped, theta2, {0, 1});
    CHECK(reversed.average == doctest::Approx(-1.0).epsilon(1e-12));
  }

  SUBCASE("agrees with the rank-then-Pearson oracle on random data") {
    rng::Engine eng = rng::make_engine(8);
    for (int trial = 0; trial < 1000; ++trial) {
      const Index k = 2 + static_cast<Index>(rng::uniform01(eng) * 4.0);
      Matrix xhat(10, k);
      Matrix x(10, k);
      for (Index i = 0; i < 10; ++i) {
        for (Index j = 0; j < k; ++j) xhat(i, j) = rng::uniform01(eng);
        Vector row(k);
        for (Index j = 0; j < k; ++j) row[j] = rng::uniform01(eng) + 1e-3;
        x.row(i) = row.transpose() / row.sum();
      }
      const MembershipMatrix theta{x};
      std::vector<Index> perm(static_cast<std::size_t>(k));
      for (Index j = 0; j < k; ++j) perm[static_cast<std::size_t>(j)] = j;

      const SpearmanResult got = spearman_quality(xhat, theta, perm);
      double expect = 0.0;
      for (Index j = 0; j < k; ++j)
        expect += spearman_oracle(xhat.col(j), x.col(j));
      expect /= static_cast<double>(k);
      CHECK(got.average == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  SUBCASE("invariant under strictly monotone transforms") {
    const Instance inst = sample_instance(60, 17);
    Matrix warped = inst.theta.rows();
    warped.col(1) = (3.0 * warped.col(1).array()).exp() + 5.0;
    const SpearmanResult plain =
        spearman_quality(inst.theta.rows(), inst.theta, {0, 1, 2});
    const SpearmanResult transformed =
        spearman_quality(warped, inst.theta, {0, 1, 2});
    CHECK(plain.average == doctest::Approx(transformed.average).epsilon(1e-14));
  }

  SUBCASE("constant column flagged and scored zero") {
    Matrix x(4, 2);
    x << 0.3, 0.7, 0.4, 0.6, 0.5, 0.5, 0.6, 0.4;
    const MembershipMatrix theta{x};
    Matrix xhat = x;
    xhat.col(0).setConstant(0.5);
    const SpearmanResult res = spearman_quality(xhat, theta, {0, 1});
    CHECK(res.constant_columns == 1);
    CHECK(res.average == doctest::Approx(0.5).epsilon(1e-12));  // (0 + 1)/2
  }
}

TEST_CASE("theorem2_check ratios") {
  DiagnosticsBundle diag;
  diag.theorem2_rhs = 0.25;
  const Theorem2Report zero = theorem2_check(diag, 0.0, 0.0);
  CHECK(zero.ratio_b == 0.0);
  CHECK(zero.ratio_theta == 0.0);

  const Theorem2Report unit = theorem2_check(diag, 0.25, 0.5);
  CHECK(unit.ratio_b == doctest::Approx(1.0));
  CHECK(unit.ratio_theta == doctest::Approx(2.0));
}

TEST_CASE("concentration_check") {
  SUBCASE("A = P gives exactly zero") {
    const Instance inst = sample_instance(40, 9);
    const ConcentrationReport rep =
        concentration_check(inst.p.entries(), inst.p, 3.0);
    CHECK(rep.lhs == 0.0);
    CHECK(rep.ratio == 0.0);
    CHECK(rep.rhs_scale ==
          doctest::Approx(std::sqrt(40.0 * 0.7)).epsilon(1e-12));
  }

  SUBCASE("single edge flip on the empty graph") {
    const Index n = 30;
    const EdgeProbabilityMatrix p{Matrix::Zero(n, n)};
    Matrix a = Matrix::Zero(n, n);
    a(2, 9) = a(9, 2) = 1.0;
    const ConcentrationReport rep = concentration_check(a, p, 3.0);
    // rank-2 flip has eigenvalues +-1
    CHECK(rep.lhs == doctest::Approx(1.0).epsilon(1e-9));
    // rho = 0, so the log n floor applies
    CHECK(rep.rhs_scale ==
          doctest::Approx(std::sqrt(std::log(30.0))).epsilon(1e-12));
  }
}

TEST_CASE("lambda_K(Theta)^2 / n is stable across sizes and seeds") {
  std::vector<double> values;
  std::uint64_t seed = 500;
  for (Index n : {500, 1000, 2000, 4000}) {
    for (int rep = 0; rep < 5; ++rep) {
      SimulationConfig cfg = SimulationConfig::defaults(seed++);
      cfg.n = n;
      const MembershipMatrix theta = sample_membership(cfg);
      Eigen::JacobiSVD<Matrix> svd(theta.rows());
      const double lk = svd.singularValues().minCoeff();
      values.push_back(lk * lk / static_cast<double>(n));
    }
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size() - 1);
  const double cv = std::sqrt(var) / mean;
  MESSAGE("lambda_K(Theta)^2/n mean=" << mean << " cv=" << cv);
  CHECK(cv < 0.2);
}
