#include "spoc/model.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <utility>

#include "spoc/errors.hpp"

namespace spoc {

MembershipMatrix::MembershipMatrix(Matrix rows) : rows_(std::move(rows)) {
  if (rows_.size() == 0) throw UsageError("MembershipMatrix: empty matrix");
  if ((rows_.array() < 0.0).any() || (rows_.array() > 1.0).any())
    throw UsageError("MembershipMatrix: entries must lie in [0,1]");
  const Vector sums = rows_.rowwise().sum();
  if (((sums.array() - 1.0).abs() > kRowSumTol).any())
    throw UsageError("MembershipMatrix: rows must sum to 1 within 1e-12");
}

ConnectivityMatrix::ConnectivityMatrix(Matrix entries)
    : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.size() == 0)
    throw UsageError("ConnectivityMatrix: must be square and non-empty");
  if ((entries_ - entries_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw UsageError("ConnectivityMatrix: must be symmetric within 1e-12");
  if ((entries_.array() < 0.0).any() || (entries_.array() > 1.0).any())
    throw UsageError("ConnectivityMatrix: entries must lie in [0,1]");
}

ConnectivityMatrix ConnectivityMatrix::Diagonal(const Vector& diag) {
  Matrix m = Matrix::Zero(diag.size(), diag.size());
  m.diagonal() = diag;
  return ConnectivityMatrix(std::move(m));
}

EdgeProbabilityMatrix::EdgeProbabilityMatrix(Matrix p) : p_(std::move(p)) {
  if (p_.rows() != p_.cols())
    throw UsageError("EdgeProbabilityMatrix: must be square");
  if ((p_ - p_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw UsageError("EdgeProbabilityMatrix: must be symmetric");
  if ((p_.array() < -1e-12).any() || (p_.array() > 1.0 + 1e-12).any())
    throw UsageError("EdgeProbabilityMatrix: entries must lie in [0,1]");
  p_ = p_.cwiseMax(0.0).cwiseMin(1.0);
}

Adjacency::Adjacency(Matrix a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols()) throw UsageError("Adjacency: must be square");
  const Index n = a_.rows();
  for (Index j = 0; j < n; ++j) {
    if (a_(j, j) != 0.0) throw UsageError("Adjacency: diagonal must be zero");
    for (Index i = 0; i < n; ++i) {
      const double v = a_(i, j);
      if (v != 0.0 && v != 1.0)
        throw UsageError("Adjacency: entries must be 0 or 1");
      if (v != a_(j, i)) throw UsageError("Adjacency: must be symmetric");
    }
  }
}

Index Adjacency::edge_count() const {
  return static_cast<Index>(a_.sum() / 2.0);
}

void SimulationConfig::validate() const {
  if (k < 1 || n < k) throw UsageError("SimulationConfig: need n >= K >= 1");
  if (dirichlet_alpha.size() != k)
    throw UsageError("SimulationConfig: alpha must have K entries");
  if ((dirichlet_alpha.array() <= 0.0).any())
    throw UsageError("SimulationConfig: alpha entries must be positive");
  if (b.communities() != k)
    throw UsageError("SimulationConfig: B must be K x K");
  if (pure_per_community < 0)
    throw UsageError("SimulationConfig: pure_per_community must be >= 0");
}

SimulationConfig SimulationConfig::defaults(std::uint64_t seed) {
  SimulationConfig cfg;
  cfg.n = 1000;
  cfg.k = 3;
  cfg.dirichlet_alpha = Vector::Constant(3, 0.5);
  cfg.b = ConnectivityMatrix::Diagonal(Vector{{0.3, 0.5, 0.7}});
  cfg.pure_per_community = 1;
  cfg.seed = seed;
  return cfg;
}

IdentifiabilityReport check_identifiability(const MembershipMatrix& theta,
                                            const ConnectivityMatrix& b,
                                            double rank_tol) {
  if (theta.communities() != b.communities())
    throw UsageError("check_identifiability: dimension mismatch");
  IdentifiabilityReport rep;

  const Matrix& t = theta.rows();
  rep.has_pure_node_per_community = true;
  for (Index k = 0; k < t.cols(); ++k) {
    if (t.col(k).maxCoeff() < 1.0 - rank_tol) {
      rep.has_pure_node_per_community = false;
      break;
    }
  }

  Eigen::JacobiSVD<Matrix> svd(b.entries());
  rep.b_full_rank = svd.singularValues().minCoeff() > rank_tol;

  rep.rows_normalized =
      ((t.rowwise().sum().array() - 1.0).abs() <= MembershipMatrix::kRowSumTol)
          .all();
  return rep;
}

MembershipMatrix sample_membership(const SimulationConfig& cfg) {
  cfg.validate();
  const Index pure_total = cfg.k * cfg.pure_per_community;
  if (cfg.n < pure_total)
    throw UsageError("sample_membership: n < K * pure_per_community");

  Matrix rows = Matrix::Zero(cfg.n, cfg.k);
  for (Index i = 0; i < cfg.k; ++i)
    for (Index j = 0; j < cfg.pure_per_community; ++j)
      rows(i * cfg.pure_per_community + j, i) = 1.0;

  rng::Engine eng = rng::make_engine(cfg.seed);
  for (Index i = pure_total; i < cfg.n; ++i)
    rows.row(i) = rng::dirichlet(cfg.dirichlet_alpha, eng).transpose();

  return MembershipMatrix(std::move(rows));
}

EdgeProbabilityMatrix edge_probabilities(const MembershipMatrix& theta,
                                         const ConnectivityMatrix& b) {
  if (theta.communities() != b.communities())
    throw UsageError("edge_probabilities: dimension mismatch");
  Matrix p = theta.rows() * b.entries() * theta.rows().transpose();
  p = 0.5 * (p + p.transpose()).eval();
  return EdgeProbabilityMatrix(std::move(p));
}

Adjacency sample_adjacency(const EdgeProbabilityMatrix& p,
                           std::uint64_t seed) {
  const Index n = p.nodes();
  rng::Engine eng = rng::make_engine(seed);
  Matrix a = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (rng::uniform01(eng) < p.entries()(i, j)) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return Adjacency(std::move(a));
}

}  // namespace spoc
