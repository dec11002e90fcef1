#include "projclust/coreset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "projclust/io.hpp"
#include "projclust/rng.hpp"

namespace projclust {

WeightedSet Coreset::materialise(const Dataset& x) const {
  Vector w(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t j = 0; j < weights.size(); ++j) w(static_cast<Eigen::Index>(j)) = weights[j];
  return WeightedSet(x.subset(indices), std::move(w));
}

Coreset sensitivity_sample(const SensitivityProfile& profile, std::size_t m, std::uint64_t seed,
                           std::uint64_t stream) {
  if (m < 1) throw InputError("coreset size m must be at least 1");
  const Vector& p = profile.distribution();
  std::discrete_distribution<std::size_t> draw(p.data(), p.data() + p.size());
  Rng rng = make_rng(seed, stream);
  Coreset out;
  out.indices.reserve(m);
  out.weights.reserve(m);
  const double md = static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = draw(rng);
    out.indices.push_back(i);
    out.weights.push_back(1.0 / (md * p(static_cast<Eigen::Index>(i))));
  }
  return out;
}

void write_coreset_csv(std::ostream& out, const Coreset& coreset) {
  out << "index,weight\n";
  for (std::size_t j = 0; j < coreset.m(); ++j) {
    out << coreset.indices[j] << ',' << format_double(coreset.weights[j]) << '\n';
  }
}

void write_peeling_csv(std::ostream& out, const PeelingPartition& peel) {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (std::size_t l = 0; l < peel.layers.size(); ++l) {
    for (auto idx : peel.layers[l]) rows.emplace_back(idx, l + 1);
  }
  std::sort(rows.begin(), rows.end());
  out << "index,layer\n";
  for (const auto& [idx, layer] : rows) out << idx << ',' << layer << '\n';
}

// 1-D coreset ------------------------------------------------------------------

std::vector<double> collinear_positions(const Dataset& y) {
  const std::size_t n = y.n();
  const Vector ref = y.point(0);
  std::size_t far = 0;
  double far_sq = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    const double sq = (y.point(i) - ref).squaredNorm();
    if (sq > far_sq) {
      far_sq = sq;
      far = i;
    }
  }
  std::vector<double> pos(n, 0.0);
  if (far_sq == 0.0) return pos;
  const double diam = std::sqrt(far_sq);
  const Vector u = (y.point(far) - ref) / diam;
  const double tol = 1e-9 * diam + 1e-12 * y.points().cwiseAbs().maxCoeff();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector r = y.point(i) - ref;
    pos[i] = r.dot(u);
    if ((r - pos[i] * u).norm() > tol) throw InputError("points are not collinear");
  }
  // Orientation: point 0 precedes the first point (by index) that is
  // separated from it.
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(pos[i]) > 1e-12 * diam) {
      if (pos[i] < 0.0) {
        for (auto& v : pos) v = -v;
      }
      break;
    }
  }
  return pos;
}

namespace {

// order[lo..hi] (inclusive) are sorted ranks; adds the coreset of that run
// for k intervals to `keep` (indexed by rank).
void coreset_run(const std::vector<double>& sorted, std::size_t lo, std::size_t hi, std::size_t k,
                 std::vector<bool>& keep) {
  if (k == 0) return;
  const std::size_t n = hi - lo + 1;
  if (n <= 2 || k == 1) {
    keep[lo] = true;
    keep[hi] = true;
    return;
  }
  const std::size_t mid = lo + (n + 1) / 2 - 1;  // y_{ceil(n/2)}
  keep[lo] = keep[mid] = keep[hi] = true;
  const std::size_t left_hi = lo + n / 2 - 1;   // Y_L = y_1 .. y_{floor(n/2)}
  const double left_len = sorted[mid] - sorted[lo];
  const double right_len = sorted[hi] - sorted[mid];
  // Near-equal halves count as a tie and take the left branch; the
  // tolerance keeps the choice stable under rescaling of the line.
  const bool left_long = left_len >= right_len - 1e-9 * (left_len + right_len);
  if (left_long) {
    coreset_run(sorted, lo, left_hi, k, keep);
  } else {
    coreset_run(sorted, mid, hi, k, keep);
  }
  coreset_run(sorted, lo, left_hi, k - 1, keep);
  coreset_run(sorted, mid, hi, k - 1, keep);
}

}  // namespace

std::vector<std::size_t> line_coreset_positions(const std::vector<double>& positions, std::size_t k) {
  if (k < 1) throw InputError("line coreset needs k >= 1");
  const std::size_t n = positions.size();
  if (n == 0) return {};
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
  std::vector<double> sorted(n);
  for (std::size_t r = 0; r < n; ++r) sorted[r] = positions[order[r]];
  std::vector<bool> keep(n, false);
  coreset_run(sorted, 0, n - 1, k, keep);
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < n; ++r) {
    if (keep[r]) out.push_back(order[r]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> line_coreset_1d(const Dataset& y, std::size_t k) {
  return line_coreset_positions(collinear_positions(y), k);
}

std::vector<std::size_t> line_coreset_klines(const Dataset& y, const std::vector<std::size_t>& assignment,
                                             std::size_t k) {
  if (k < 1) throw InputError("line coreset needs k >= 1");
  if (assignment.size() != y.n()) throw InputError("assignment size does not match point count");
  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] >= k) throw InputError("assignment refers to a line index >= k");
    groups[assignment[i]].push_back(i);
  }
  std::vector<std::size_t> out;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    for (auto local : line_coreset_1d(y.subset(g), k)) out.push_back(g[local]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

PeelingPartition peel_partition(const Dataset& y, const std::vector<std::size_t>& assignment,
                                std::size_t k) {
  if (assignment.size() != y.n()) throw InputError("assignment size does not match point count");
  std::vector<std::size_t> remaining(y.n());
  std::iota(remaining.begin(), remaining.end(), 0);
  PeelingPartition peel;
  while (!remaining.empty()) {
    std::vector<std::size_t> sub_assign(remaining.size());
    for (std::size_t j = 0; j < remaining.size(); ++j) sub_assign[j] = assignment[remaining[j]];
    const auto local = line_coreset_klines(y.subset(remaining), sub_assign, k);
    std::vector<std::size_t> layer;
    std::vector<bool> taken(remaining.size(), false);
    for (auto l : local) {
      layer.push_back(remaining[l]);
      taken[l] = true;
    }
    std::vector<std::size_t> rest;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      if (!taken[j]) rest.push_back(remaining[j]);
    }
    peel.layers.push_back(std::move(layer));
    remaining = std::move(rest);
  }
  return peel;
}

}  // namespace projclust
