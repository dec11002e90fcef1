#include "projclust/jl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "projclust/rng.hpp"

namespace projclust {

JLMap::JLMap(Matrix matrix, std::uint64_t seed) : matrix_(std::move(matrix)), seed_(seed) {
  if (matrix_.rows() < 1 || matrix_.cols() < 1) throw InputError("JL map needs t >= 1 and d >= 1");
  if (!matrix_.allFinite()) throw InputError("JL map entries must be finite");
}

JLMap JLMap::identity(std::size_t d) {
  if (d < 1) throw InputError("JL map needs d >= 1");
  const auto n = static_cast<Eigen::Index>(d);
  return JLMap(Matrix::Identity(n, n));
}

JLMap sample_jl(std::size_t d, std::size_t t, std::uint64_t seed, std::uint64_t stream) {
  if (d < 1 || t < 1) throw InputError("JL map needs t >= 1 and d >= 1");
  Rng rng = make_rng(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(t)));
  Matrix m(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d));
  // Fill row-major so the stream order does not depend on storage order.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
  return JLMap(std::move(m), seed);
}

Vector apply(const JLMap& map, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != map.d()) throw InputError("dimension mismatch in JL apply");
  return map.matrix() * x;
}

Dataset apply(const JLMap& map, const Dataset& x) {
  if (x.d() != map.d()) throw InputError("dimension mismatch in JL apply");
  return Dataset(x.points() * map.matrix().transpose());
}

MomentStatistic moment_bound_statistic(double z, double eps, std::size_t t, std::size_t trials,
                                       std::uint64_t seed) {
  if (!(z >= 1.0) || !(eps > 0.0) || t < 1 || trials < 2) {
    throw InputError("moment statistic needs z >= 1, eps > 0, t >= 1, trials >= 2");
  }
  // For a Gaussian map, ||Pi(x - y)||^2 / ||x - y||^2 is chi^2_t / t for
  // every fixed x != y, so each trial draws that ratio directly.
  Rng rng = make_rng(seed);
  std::chi_squared_distribution<double> chi2(static_cast<double>(t));
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const double sq = chi2(rng) / static_cast<double>(t);
    const double v = std::max(0.0, pow_z_from_squared(sq, z) - 1.0);
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(trials);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
  MomentStatistic out;
  out.mean = mean;
  out.std_error = std::sqrt(var / n);
  out.bound = (std::pow(1.0 + eps, z) - 1.0) / 100.0;
  out.trials = trials;
  return out;
}

Vector restricted_singular_values(const JLMap& map, const Subspace& basis) {
  if (basis.d() != map.d()) throw InputError("dimension mismatch in subspace embedding check");
  if (basis.dim() == 0) return Vector(0);
  const Matrix restricted = map.matrix() * basis.basis().transpose();  // t x j
  Eigen::JacobiSVD<Matrix> svd(restricted);
  Vector s = Vector::Zero(static_cast<Eigen::Index>(basis.dim()));
  const Vector& sv = svd.singularValues();
  s.head(sv.size()) = sv;  // t < j leaves trailing zeros
  return s;
}

bool is_subspace_embedding(const JLMap& map, const Subspace& basis, double eps) {
  if (!(eps >= 0.0)) throw InputError("eps must be nonnegative");
  const Vector s = restricted_singular_values(map, basis);
  const double lo = 1.0 / (1.0 + eps), hi = 1.0 + eps;
  const double slack = 1e-12;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) < lo - slack || s(i) > hi + slack) return false;
  }
  return true;
}

double max_pairwise_distortion(const JLMap& map, const Dataset& points) {
  const Dataset projected = apply(map, points);
  double worst = 1.0;
  for (std::size_t i = 0; i < points.n(); ++i) {
    for (std::size_t j = i + 1; j < points.n(); ++j) {
      const double before = (points.point(i) - points.point(j)).norm();
      if (before == 0.0) continue;
      const double after = (projected.point(i) - projected.point(j)).norm();
      if (after == 0.0) return std::numeric_limits<double>::infinity();
      const double r = after / before;
      worst = std::max(worst, std::max(r, 1.0 / r));
    }
  }
  return worst;
}

bool is_bi_lipschitz(const JLMap& map, const Dataset& points, double eps) {
  return max_pairwise_distortion(map, points) <= 1.0 + eps;
}

}  // namespace projclust
