#pragma once

// Experiment harness: synthetic instances, target-dimension presets,
// preservation sweeps, coreset quality runs and counterexample trials.
// Every run is deterministic in its seed; trial i always uses stream i.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "projclust/counterexamples.hpp"
#include "projclust/geometry.hpp"
#include "projclust/solvers.hpp"

namespace projclust {

enum class GenKind { kGaussianMixture, kNearLines, kNearFlat, kMedoid, kCss };
std::string_view gen_kind_name(GenKind kind);
GenKind parse_gen_kind(std::string_view name);

struct GenParams {
  GenKind kind = GenKind::kGaussianMixture;
  std::size_t n = 100;
  std::size_t d = 10;
  std::size_t k = 3;
  double noise = 1.0;  ///< standard deviation of the isotropic perturbation
  std::uint64_t seed = 0;
};

/// gaussian-mixture: k centres uniform in [-10, 10]^d, point i around
/// centre i mod k. points-near-k-lines: k random lines, positions uniform
/// in [-10, 10]. points-near-k-flat: one random k-flat, coordinates uniform
/// in [-10, 10]^k. medoid and css ignore d, k and noise.
Dataset generate(const GenParams& params);

struct TPreset {
  std::size_t t = 1;
  std::string formula;  ///< human-readable, with the evaluated value
};

/// Target dimension from the problem's bound, scaled by `constant` and
/// clamped to [1, d]:
///   clustering  ceil(c (ln k + z ln(1/eps)) / eps^2)
///   subspace    ceil(c k / eps^2) for z = 2, else ceil(c z k^2 ln(k/eps) / eps^3)
///   flat        ceil(c (k+1) / eps^2) for z = 2, else as subspace
///   lines       ceil(c (k ln ln n + z + ln(1/eps)) / eps^3)
TPreset preset_t(Problem problem, std::size_t k, double z, double eps, std::size_t n,
                 std::size_t d, double constant = 1.0);

struct ExperimentConfig {
  Problem problem = Problem::kClustering;
  std::size_t k = 2;
  double z = 2.0;
  std::vector<std::size_t> t_list;
  std::size_t trials = 10;
  std::uint64_t seed = 0;
  SolveMethod method = SolveMethod::kAuto;
  std::size_t restarts = 10;
  std::vector<std::size_t> m_list{100};
  bool identity = false;        ///< use Pi = I (requires t = d)
  bool uniform_profile = false;  ///< sample uniformly instead of by sensitivity
};

/// Optimal costs are l_z norms (cost, not cost_pow); ratio is
/// projected / original.
struct PreservationRecord {
  std::size_t t = 0;
  std::size_t trial = 0;
  double cost_original = 0.0;
  double cost_projected = 0.0;
  double ratio = 0.0;
  std::string method;
  bool converged = false;
  std::string status = "ok";  ///< "ok" or "failed: <reason>"
};

std::vector<PreservationRecord> run_preserve(const Dataset& x, const ExperimentConfig& config);
/// Trial rows followed by one summary row per t (median, 5th and 95th
/// percentile of the ratios of successful trials).
void write_preserve_csv(std::ostream& out, const std::vector<PreservationRecord>& records);

struct CoresetRecord {
  std::size_t m = 0;
  std::size_t trial = 0;
  double cost_full = 0.0;
  double cost_coreset = 0.0;
  double ratio_before_projection = 0.0;  ///< min cost on (S, w) / min cost on X
  double ratio_after_projection = 0.0;   ///< cost((Pi S, w), c**) / cost(Pi X, c**)
  std::string status = "ok";
};

/// For each m and trial: draws a coreset from the sensitivity profile of a
/// solution on X, compares optimal costs, then checks the projected
/// coreset against the optimum c** of Pi X (t = t_list.front(), or the
/// identity map when t_list is empty).
std::vector<CoresetRecord> run_coreset_quality(const Dataset& x, const ExperimentConfig& config);
void write_coreset_quality_csv(std::ostream& out, const std::vector<CoresetRecord>& records);

/// Trial i uses seed + i.
std::vector<RatioReport> run_counterexamples(Counterexample which, std::size_t n,
                                             const std::vector<std::size_t>& t_list,
                                             std::size_t trials, std::uint64_t seed);
void write_counterexample_csv(std::ostream& out, const std::vector<RatioReport>& reports);
/// 1.5 for medoid, 1.25 for css.
double counterexample_threshold(Counterexample which);
double exceedance_frequency(const std::vector<RatioReport>& reports, double threshold);

/// Type-7 sample quantile (linear interpolation), q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Standalone SVG of ratio against t: one marker per point, plus the
/// median of each t joined by a line.
void write_ratio_svg(std::ostream& out, const std::vector<std::pair<double, double>>& points,
                     const std::string& title);

}  // namespace projclust
