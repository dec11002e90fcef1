#include "projclust/counterexamples.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "projclust/io.hpp"
#include "projclust/jl.hpp"

namespace projclust {

std::string_view counterexample_name(Counterexample c) {
  return c == Counterexample::kMedoid ? "medoid" : "css";
}

Counterexample parse_counterexample(std::string_view name) {
  if (name == "medoid") return Counterexample::kMedoid;
  if (name == "css") return Counterexample::kCss;
  throw InputError("unknown counterexample: " + std::string(name));
}

Dataset gen_medoid_instance(std::size_t n) {
  if (n < 2) throw InputError("medoid instance needs n >= 2");
  const auto nn = static_cast<Eigen::Index>(n);
  return Dataset(Matrix::Identity(nn, nn));
}

Dataset gen_css_instance(std::size_t n) {
  if (n < 2) throw InputError("css instance needs n >= 2");
  const auto nn = static_cast<Eigen::Index>(n);
  Matrix m = Matrix::Zero(nn, nn + 1);
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < nn; ++i) {
    m(i, i) = s;
    m(i, nn) = s;
  }
  return Dataset(std::move(m));
}

double medoid_cost(const Dataset& x) {
  const Matrix& p = x.points();
  const double n = static_cast<double>(x.n());
  const Vector sum = p.colwise().sum().transpose();
  const double total_sq = p.squaredNorm();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    const auto c = p.row(j);
    const double v = total_sq + n * c.squaredNorm() - 2.0 * c.dot(sum.transpose());
    best = std::min(best, std::max(0.0, v));
  }
  return best;
}

double css_cost(const Dataset& x) {
  const Matrix& p = x.points();
  const Vector sq = p.rowwise().squaredNorm();
  const double total_sq = sq.sum();
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < p.rows(); ++j) {
    if (sq(j) == 0.0) continue;
    const Vector dots = p * p.row(j).transpose();
    const double captured = dots.squaredNorm() / sq(j);
    best = std::min(best, std::max(0.0, total_sq - captured));
  }
  return std::isinf(best) ? 0.0 : best;
}

double medoid_instance_cost(std::size_t n) { return 2.0 * (static_cast<double>(n) - 1.0); }
double css_instance_cost(std::size_t n) { return 0.75 * (static_cast<double>(n) - 1.0); }

Matrix project_counterexample(Counterexample which, const Matrix& pi) {
  if (which == Counterexample::kMedoid) return pi.transpose();
  const Eigen::Index n = pi.cols() - 1;
  if (n < 2) throw InputError("css projection needs a map with at least 3 columns");
  Matrix out = pi.leftCols(n).transpose();
  out.rowwise() += pi.col(n).transpose();
  return out / std::sqrt(2.0);
}

RatioReport counterexample_trial(Counterexample which, std::size_t n, std::size_t t,
                                 std::uint64_t seed) {
  if (t < 1) throw InputError("t must be at least 1");
  if (n < 2) throw InputError("counterexample needs n >= 2");
  const bool medoid = which == Counterexample::kMedoid;
  const std::size_t d = medoid ? n : n + 1;
  const JLMap map = sample_jl(d, t, seed);
  const Dataset projected(project_counterexample(which, map.matrix()));
  RatioReport r;
  r.which = which;
  r.n = n;
  r.t = t;
  r.seed = seed;
  r.original = medoid ? medoid_instance_cost(n) : css_instance_cost(n);
  r.projected = medoid ? medoid_cost(projected) : css_cost(projected);
  r.ratio = r.projected > 0.0 ? r.original / r.projected : std::numeric_limits<double>::infinity();
  return r;
}

std::string ratio_csv_header() { return "which,n,t,seed,cost_original,cost_projected,ratio"; }

std::string ratio_csv_row(const RatioReport& r) {
  return std::string(counterexample_name(r.which)) + ',' + std::to_string(r.n) + ',' +
         std::to_string(r.t) + ',' + std::to_string(r.seed) + ',' + format_double(r.original) +
         ',' + format_double(r.projected) + ',' + format_double(r.ratio);
}

}  // namespace projclust
