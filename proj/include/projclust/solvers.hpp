#pragma once

// Reference optimisers for the four problems. Exact solvers enumerate
// partitions (tiny n) or use spectral decompositions (z = 2 subspaces and
// flats); the rest are multi-restart local search.

#include <cstdint>
#include <string>

#include "projclust/geometry.hpp"

namespace projclust {

struct SolveReport {
  Solution solution;
  double cost = 0.0;
  double cost_pow = 0.0;
  std::string method;
  std::size_t restarts = 0;
  bool converged = false;
};

/// Largest n accepted by the partition-enumeration solvers.
inline constexpr std::size_t kMaxExactClusteringPoints = 14;
inline constexpr std::size_t kMaxExactLinePoints = 12;

/// Minimiser of sum_i w_i ||x_i - c||^z over c (rows of `points`).
/// z = 2: weighted mean; z = 1 in one dimension: weighted median;
/// 1 <= z < 2: Weiszfeld-type iteration; z > 2: damped Newton.
Vector optimal_center(const Matrix& points, const Vector& weights, double z);

SolveReport solve_clustering_exact(const WeightedSet& x, std::size_t k, double z);
SolveReport solve_clustering_heuristic(const WeightedSet& x, std::size_t k, double z,
                                       std::size_t restarts, std::uint64_t seed);

/// z = 2 is exact (top-k eigenvectors of the weighted scatter matrix).
/// Other z search subspaces spanned by data points, then refine on the
/// Grassmannian. Requires k < d.
SolveReport solve_subspace(const WeightedSet& x, std::size_t k, double z, std::uint64_t seed = 0);

/// z = 2 is exact (weighted mean plus spectral decomposition). Other z
/// search translations in convex hulls of small point subsets and
/// alternate subspace/translation refinement. Requires k < d.
SolveReport solve_flat(const WeightedSet& x, std::size_t k, double z, std::uint64_t seed = 0);

/// Alternating minimisation (assign to nearest line, refit each group)
/// with random restarts.
SolveReport solve_lines(const WeightedSet& x, std::size_t k, double z, std::size_t restarts,
                        std::uint64_t seed);
/// Partition enumeration; each part gets its best single line (exact for
/// z = 2). Requires n <= kMaxExactLinePoints.
SolveReport solve_lines_exact(const WeightedSet& x, std::size_t k, double z);

enum class SolveMethod { kAuto, kExact, kHeuristic };
SolveMethod parse_method(const std::string& name);

struct SolveOptions {
  std::size_t k = 1;
  double z = 2.0;
  SolveMethod method = SolveMethod::kAuto;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
};

/// Dispatch by problem. kAuto picks the exact solver when the instance is
/// small enough (or z = 2 for subspaces and flats).
SolveReport solve(Problem problem, const WeightedSet& x, const SolveOptions& options);

/// "problem,k,z,method,restarts,converged,cost,cost_pow"
std::string report_csv_header();
std::string report_csv_row(const SolveReport& report, std::size_t k, double z);

}  // namespace projclust
