#pragma once

// Dense Gaussian Johnson-Lindenstrauss maps R^d -> R^t with i.i.d.
// N(0, 1/t) entries, plus distortion diagnostics.

#include <cstdint>

#include "projclust/geometry.hpp"

namespace projclust {

class JLMap {
 public:
  /// Wraps an explicit t x d matrix (identity blocks, hand-built maps).
  explicit JLMap(Matrix matrix, std::uint64_t seed = 0);
  static JLMap identity(std::size_t d);

  const Matrix& matrix() const { return matrix_; }
  std::size_t t() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(matrix_.cols()); }
  std::uint64_t seed() const { return seed_; }

 private:
  Matrix matrix_;
  std::uint64_t seed_;
};

/// Deterministic in (d, t, seed, stream).
JLMap sample_jl(std::size_t d, std::size_t t, std::uint64_t seed, std::uint64_t stream = 0);

Vector apply(const JLMap& map, const Vector& x);
Dataset apply(const JLMap& map, const Dataset& x);

struct MomentStatistic {
  double mean = 0.0;       ///< sample mean of (ratio^z - 1)^+
  double std_error = 0.0;  ///< standard error of that mean
  double bound = 0.0;      ///< ((1 + eps)^z - 1) / 100
  std::size_t trials = 0;
};

/// Monte Carlo estimate of E[(||Pi x - Pi y||^z / ||x - y||^z - 1)^+] over
/// Pi drawn from the t-dimensional Gaussian family.
MomentStatistic moment_bound_statistic(double z, double eps, std::size_t t, std::size_t trials,
                                       std::uint64_t seed);

/// Singular values of the map restricted to span(basis), descending.
Vector restricted_singular_values(const JLMap& map, const Subspace& basis);

/// True iff every singular value of the restriction lies in
/// [1/(1+eps), 1+eps], i.e. ||Pi x|| is within a (1+eps) factor of ||x||
/// for every x in the subspace.
bool is_subspace_embedding(const JLMap& map, const Subspace& basis, double eps);

/// Largest factor by which a pairwise distance of `points` is stretched or
/// shrunk under the map (max over pairs of max(r, 1/r)). Coincident pairs
/// are skipped.
double max_pairwise_distortion(const JLMap& map, const Dataset& points);

/// All-pairs (1+eps)-bi-Lipschitz check on a finite set.
bool is_bi_lipschitz(const JLMap& map, const Dataset& points, double eps);

}  // namespace projclust
