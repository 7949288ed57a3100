#pragma once

#include <vector>

#include "spoc/model.hpp"

namespace spoc {

/// Output of the successive projection pass: the ordered column indices
/// picked as simplex vertices, plus each pivot's norm at selection time.
struct SpaResult {
  std::vector<Index> indices;
  Vector residual_norms;
};

/// Successive projection algorithm on the columns of a K x n matrix.
///
/// Repeats r times: select the residual column of maximum Euclidean norm
/// (ties go to the lowest index), then project every column onto the
/// orthogonal complement of the selection. With `precondition` set, the
/// input is first mapped through the minimum-volume-ellipsoid transform.
///
/// Throws NumericalError if the residual vanishes before r selections.
SpaResult spa(const Matrix& g, Index r, bool precondition = false);

struct MveeResult {
  Matrix transform;    // K x K, symmetric positive definite
  Matrix conditioned;  // transform * input
  Index iterations = 0;
};

/// Khachiyan-style barycentric ascent (with away steps) for the
/// origin-centered minimum-volume ellipsoid of the column set. On exit the
/// ellipsoid of the conditioned columns is within tol of the unit ball:
/// max_j ||transform * g_j||^2 <= 1 + tol.
///
/// max_iter <= 0 selects the default budget 10 * K * n.
MveeResult precondition_mvee(const Matrix& g, double tol = 1e-6,
                             Index max_iter = 0);

/// Worst-case distance between selected columns and true vertices under
/// column-wise noise of norm <= eps: (432 kappa(F) + 4) * eps.
double spa_error_bound(const Matrix& f, double eps);

/// Noise admissibility for the recovery guarantee:
/// eps <= sigma_min(F) / (1225 sqrt(r)). r <= 0 selects r = rows of F.
bool spa_noise_admissible(const Matrix& f, double eps, Index r = 0);

}  // namespace spoc
