#pragma once

// Instances on which projecting to t = o(log n) dimensions destroys the
// optimal cost of 1-medoid and 1-column subset selection.

#include <cstdint>
#include <string>
#include <string_view>

#include "projclust/geometry.hpp"

namespace projclust {

enum class Counterexample { kMedoid, kCss };
std::string_view counterexample_name(Counterexample c);
Counterexample parse_counterexample(std::string_view name);

/// Standard basis e_1, ..., e_n in R^n.
Dataset gen_medoid_instance(std::size_t n);
/// x_i = (e_{n+1} + e_i) / sqrt(2) in R^{n+1}.
Dataset gen_css_instance(std::size_t n);

/// min over data points c of sum_x ||x - c||^2.
double medoid_cost(const Dataset& x);
/// min over nonzero data points c of sum_x ||x - proj_span(c)(x)||^2.
/// Returns 0 when every point is zero.
double css_cost(const Dataset& x);

/// Optimal costs of the generated instances: 2(n-1) and 3(n-1)/4.
double medoid_instance_cost(std::size_t n);
double css_instance_cost(std::size_t n);

/// Rows Pi x_i for the generated instance, built from the columns of
/// `pi` (t x n for medoid, t x (n+1) for css) without materialising it.
Matrix project_counterexample(Counterexample which, const Matrix& pi);

struct RatioReport {
  Counterexample which = Counterexample::kMedoid;
  double original = 0.0;
  double projected = 0.0;
  double ratio = 0.0;  ///< original / projected
  std::size_t n = 0;
  std::size_t t = 0;
  std::uint64_t seed = 0;
};

/// Draws Pi = sample_jl(d, t, seed) and compares optimal costs before and
/// after projection.
RatioReport counterexample_trial(Counterexample which, std::size_t n, std::size_t t,
                                 std::uint64_t seed);

/// "which,n,t,seed,cost_original,cost_projected,ratio"
std::string ratio_csv_header();
std::string ratio_csv_row(const RatioReport& r);

}  // namespace projclust
