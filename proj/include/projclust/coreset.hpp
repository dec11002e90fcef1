#pragma once

// Sensitivity-sampling coresets and the peeling construction for
// (k, infinity)-line approximation of points lying on k lines.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "projclust/geometry.hpp"
#include "projclust/sensitivity.hpp"

namespace projclust {

/// m draws (with repetition) from a sensitivity distribution. weights[j] is
/// 1 / (m * p(indices[j])) for the sampling probabilities p.
struct Coreset {
  std::vector<std::size_t> indices;
  std::vector<double> weights;

  std::size_t m() const { return indices.size(); }
  /// The sampled points with their weights.
  WeightedSet materialise(const Dataset& x) const;
};

Coreset sensitivity_sample(const SensitivityProfile& profile, std::size_t m, std::uint64_t seed,
                           std::uint64_t stream = 0);

/// CSV with header "index,weight".
void write_coreset_csv(std::ostream& out, const Coreset& coreset);

/// Layers A_1, ..., A_s of point indices. Each layer is a 3-coreset for
/// (k, infinity)-line approximation of the points not in earlier layers.
struct PeelingPartition {
  std::vector<std::vector<std::size_t>> layers;
};

/// CSV with header "index,layer" (1-based layers), ordered by index.
void write_peeling_csv(std::ostream& out, const PeelingPartition& peel);

/// Recursive 3-coreset for (k, infinity)-line approximation of collinear
/// points: any k intervals covering the returned points, each tripled in
/// length about its centre, cover all of Y. Returns sorted row indices.
///
/// The order along the line is fixed by the data (the lowest-index point
/// precedes the lowest-index point at a different position), so the result
/// is unchanged by any linear map that keeps the points distinct.
std::vector<std::size_t> line_coreset_1d(const Dataset& y, std::size_t k);

/// Same construction on scalar positions along a line.
std::vector<std::size_t> line_coreset_positions(const std::vector<double>& positions, std::size_t k);

/// Union of line_coreset_1d over the groups of `assignment` (values in
/// [0, k)); each group must be collinear.
std::vector<std::size_t> line_coreset_klines(const Dataset& y, const std::vector<std::size_t>& assignment,
                                             std::size_t k);

/// Repeatedly removes line_coreset_klines of the remaining points.
PeelingPartition peel_partition(const Dataset& y, const std::vector<std::size_t>& assignment,
                                std::size_t k);

/// Positions of collinear points along their common line. Throws if the
/// points are not collinear within 1e-9 relative to their diameter.
std::vector<double> collinear_positions(const Dataset& y);

}  // namespace projclust
