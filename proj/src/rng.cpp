#include "spoc/rng.hpp"

#include <cmath>

#include "spoc/errors.hpp"

namespace spoc::rng {

double normal(Engine& eng) {
  const double u1 = uniform01_open(eng);
  const double u2 = uniform01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double gamma(double alpha, Engine& eng) {
  if (!(alpha > 0.0)) throw UsageError("gamma: alpha must be positive");
  if (alpha < 1.0) {
    // boost to alpha+1, then scale back by u^(1/alpha)
    const double g = gamma(alpha + 1.0, eng);
    const double u = uniform01_open(eng);
    return g * std::pow(u, 1.0 / alpha);
  }
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal(eng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01_open(eng);
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Eigen::VectorXd dirichlet(const Eigen::VectorXd& alpha, Engine& eng) {
  const Eigen::Index k = alpha.size();
  if (k < 1) throw UsageError("dirichlet: empty alpha");
  Eigen::VectorXd x(k);
  for (;;) {
    for (Eigen::Index i = 0; i < k; ++i) x[i] = gamma(alpha[i], eng);
    const double s = x.sum();
    if (s > 1e-300) return x / s;
    // all components underflowed (possible for very small alpha); redraw
  }
}

}  // namespace spoc::rng
