#pragma once

// Sensitivity functions for the four problems, the sampling distribution
// they induce, and the dilation statistic used to audit a JL draw.

#include <iosfwd>
#include <vector>

#include "projclust/geometry.hpp"
#include "projclust/jl.hpp"

namespace projclust {

struct PeelingPartition;

/// sigma(x) per point with its total and normalised distribution.
class SensitivityProfile {
 public:
  explicit SensitivityProfile(Vector sigma);

  const Vector& sigma() const { return sigma_; }
  const Vector& distribution() const { return distribution_; }
  double total() const { return total_; }
  std::size_t n() const { return static_cast<std::size_t>(sigma_.size()); }

  /// Profile with sigma = 1 everywhere (plain uniform sampling).
  static SensitivityProfile uniform(std::size_t n);

 private:
  Vector sigma_;
  Vector distribution_;
  double total_;
};

/// CSV with header "index,sigma,sigma_tilde".
void write_profile_csv(std::ostream& out, const SensitivityProfile& profile);

/// sigma(x) = 2^(z-1) ||x - c(x)||^z / cost_pow(X, C) + 2^(2z-1) / |X_c(x)|.
/// Centers without points are ignored, so the total is
/// 2^(z-1) + 2^(2z-1) k' with k' the number of non-empty clusters
/// (2^(2z-1) k' alone when the cost is zero).
SensitivityProfile clustering_sensitivity(const Dataset& x, const CenterSet& c, double z);

/// sup over u of |<y_i, u>|^z / sum_j |<y_j, u>|^z for row i of `y`.
/// Zero rows give 0. For z = 2 this is the leverage score of row i.
double sup_ratio(const Dataset& y, std::size_t i, double z);

/// sup_ratio for every row, sharing the factorisation of `y`.
Vector sup_ratios(const Matrix& y, double z);

/// sigma(x) = 2^(z-1) ||x - p(x)||^z / cost_pow + 2^(2z-1) sup_ratio(P, x, z)
/// with p the projection onto R and P the projected points. If every point
/// projects to the origin the sup term is 1/n for all points.
SensitivityProfile subspace_sensitivity(const Dataset& x, const Subspace& r, double z);

/// As subspace_sensitivity with the projections onto F lifted to R^(d+1) by
/// an extra coordinate 1 (handles the free translation).
SensitivityProfile flat_sensitivity(const Dataset& x, const Flat& f, double z);

/// sigma(x) = 2^(z-1) ||x - y_x||^z / cost_pow(X, L) + 2^(2z-1) * 3 / i where
/// y_x is the projection of x onto its nearest line and i the (1-based)
/// peeling layer of y_x.
SensitivityProfile line_sensitivity(const Dataset& x, const LineSet& l, double z,
                                    const PeelingPartition& peel);
/// Builds the peeling partition of the projected points first.
SensitivityProfile line_sensitivity(const Dataset& x, const LineSet& l, double z);

/// Projected points y_x = nearest point of the solution, one row per point.
Dataset projected_points(const Dataset& x, const Solution& sol);

/// Any of the four profiles, dispatched on the solution type.
SensitivityProfile sensitivity(const Dataset& x, const Solution& sol, double z);

/// sum_x D_x^(2z) sigma(x) with D_x = ||Pi(x) - Pi(y_x)|| / ||x - y_x||,
/// D_x = 1 when x lies on the solution.
double event_e4_statistic(const Dataset& x, const Solution& sol, const JLMap& map, double z,
                          const SensitivityProfile& profile);

/// 100 (k + 1) 2^z, the threshold the statistic is compared against.
double event_e4_threshold(std::size_t k, double z);

}  // namespace projclust
