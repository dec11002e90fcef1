#include "projclust/geometry.hpp"

#include <cmath>
#include <limits>

namespace projclust {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InputError(what);
}

void check_dim(std::size_t got, std::size_t want) {
  if (got != want) {
    throw InputError("dimension mismatch: expected " + std::to_string(want) + ", got " +
                     std::to_string(got));
  }
}

}  // namespace

// Dataset ---------------------------------------------------------------------

Dataset::Dataset(Matrix points) : points_(std::move(points)) {
  require(points_.rows() >= 1, "dataset needs at least one point");
  require(points_.cols() >= 1, "dataset needs dimension at least one");
  require(points_.allFinite(), "dataset entries must be finite");
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  require(!indices.empty(), "subset of a dataset must be non-empty");
  Matrix out(static_cast<Eigen::Index>(indices.size()), points_.cols());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    require(indices[j] < n(), "subset index out of range");
    out.row(static_cast<Eigen::Index>(j)) = points_.row(static_cast<Eigen::Index>(indices[j]));
  }
  return Dataset(std::move(out));
}

WeightedSet::WeightedSet(Dataset base)
    : base_(std::move(base)), weights_(Vector::Ones(static_cast<Eigen::Index>(base_.n()))) {}

WeightedSet::WeightedSet(Dataset base, Vector weights)
    : base_(std::move(base)), weights_(std::move(weights)) {
  check_dim(static_cast<std::size_t>(weights_.size()), base_.n());
  require(weights_.allFinite() && (weights_.array() >= 0.0).all(), "weights must be nonnegative");
  require((weights_.array() > 0.0).any(), "at least one weight must be positive");
}

CenterSet::CenterSet(Matrix centers) : centers_(std::move(centers)) {
  require(centers_.rows() >= 1, "center set must be non-empty");
  require(centers_.allFinite(), "centers must be finite");
}

// Subspace --------------------------------------------------------------------

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  require(basis_.cols() >= 1, "subspace ambient dimension must be at least one");
  require(basis_.rows() <= basis_.cols(), "subspace has more basis rows than dimensions");
  require(basis_.allFinite(), "subspace basis must be finite");
  const Matrix gram = basis_ * basis_.transpose();
  const Matrix eye = Matrix::Identity(basis_.rows(), basis_.rows());
  if (basis_.rows() > 0 && (gram - eye).cwiseAbs().maxCoeff() > 1e-9) {
    throw InputError("subspace basis rows are not orthonormal");
  }
}

Subspace::Subspace(Matrix basis, bool) : basis_(std::move(basis)) {}

Subspace Subspace::zero(std::size_t d) {
  require(d >= 1, "subspace ambient dimension must be at least one");
  return Subspace(Matrix(0, static_cast<Eigen::Index>(d)), true);
}

Subspace Subspace::from_span(const Matrix& spanning, double tol) {
  require(spanning.cols() >= 1, "subspace ambient dimension must be at least one");
  require(spanning.allFinite(), "spanning vectors must be finite");
  const Eigen::Index d = spanning.cols();
  double scale = 0.0;
  for (Eigen::Index i = 0; i < spanning.rows(); ++i) scale = std::max(scale, spanning.row(i).norm());
  std::vector<Vector> kept;
  for (Eigen::Index i = 0; i < spanning.rows() && static_cast<Eigen::Index>(kept.size()) < d; ++i) {
    Vector v = spanning.row(i).transpose();
    // Two passes of modified Gram-Schmidt.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : kept) v -= q.dot(v) * q;
    }
    const double nv = v.norm();
    if (nv > tol * std::max(scale, 1e-300)) kept.push_back(v / nv);
  }
  Matrix basis(static_cast<Eigen::Index>(kept.size()), d);
  for (std::size_t i = 0; i < kept.size(); ++i) basis.row(static_cast<Eigen::Index>(i)) = kept[i].transpose();
  return Subspace(std::move(basis), true);
}

// Flat / Line -------------------------------------------------------------------

Flat::Flat(Subspace direction, const Vector& translation) : direction_(std::move(direction)) {
  check_dim(static_cast<std::size_t>(translation.size()), direction_.d());
  require(translation.allFinite(), "flat translation must be finite");
  const Matrix& b = direction_.basis();
  translation_ = translation - b.transpose() * (b * translation);
}

Line::Line(const Vector& anchor, const Vector& direction) {
  check_dim(static_cast<std::size_t>(direction.size()), static_cast<std::size_t>(anchor.size()));
  require(anchor.size() >= 1, "line needs dimension at least one");
  require(anchor.allFinite() && direction.allFinite(), "line must be finite");
  const double nu = direction.norm();
  require(nu > 0.0, "line direction must be nonzero");
  direction_ = direction / nu;
  for (Eigen::Index i = 0; i < direction_.size(); ++i) {
    if (direction_(i) != 0.0) {
      if (direction_(i) < 0.0) direction_ = -direction_;
      break;
    }
  }
  anchor_ = anchor - anchor.dot(direction_) * direction_;
}

Line Line::through(const Vector& a, const Vector& b) { return Line(a, b - a); }

LineSet::LineSet(std::vector<Line> lines) : lines_(std::move(lines)) {
  require(!lines_.empty(), "line set must be non-empty");
  for (const auto& l : lines_) check_dim(l.d(), lines_.front().d());
}

// Problems ----------------------------------------------------------------------

std::string_view problem_name(Problem p) {
  switch (p) {
    case Problem::kClustering: return "clustering";
    case Problem::kSubspace: return "subspace";
    case Problem::kFlat: return "flat";
    case Problem::kLines: return "lines";
  }
  return "unknown";
}

Problem parse_problem(std::string_view name) {
  if (name == "clustering") return Problem::kClustering;
  if (name == "subspace") return Problem::kSubspace;
  if (name == "flat") return Problem::kFlat;
  if (name == "lines") return Problem::kLines;
  throw InputError("unknown problem: " + std::string(name));
}

Problem problem_of(const Solution& sol) {
  return static_cast<Problem>(sol.index());
}

std::size_t solution_dim(const Solution& sol) {
  return std::visit([](const auto& s) { return s.d(); }, sol);
}

// Projections -------------------------------------------------------------------

Vector project_subspace(const Vector& x, const Subspace& r) {
  check_dim(static_cast<std::size_t>(x.size()), r.d());
  const Matrix& b = r.basis();
  return b.transpose() * (b * x);
}

Vector project_flat(const Vector& x, const Flat& f) {
  check_dim(static_cast<std::size_t>(x.size()), f.d());
  const Matrix& b = f.direction().basis();
  return f.translation() + b.transpose() * (b * (x - f.translation()));
}

Vector project_line(const Vector& x, const Line& l) {
  check_dim(static_cast<std::size_t>(x.size()), l.d());
  return l.anchor() + (x - l.anchor()).dot(l.direction()) * l.direction();
}

std::size_t nearest_center(const Vector& x, const CenterSet& c) {
  check_dim(static_cast<std::size_t>(x.size()), c.d());
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < c.k(); ++j) {
    const double sq = (c.centers().row(static_cast<Eigen::Index>(j)).transpose() - x).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  return best;
}

std::size_t nearest_line(const Vector& x, const LineSet& l) {
  check_dim(static_cast<std::size_t>(x.size()), l.d());
  std::size_t best = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < l.k(); ++j) {
    const double sq = (x - project_line(x, l[j])).squaredNorm();
    if (sq < best_sq) {
      best_sq = sq;
      best = j;
    }
  }
  return best;
}

Vector nearest_point(const Vector& x, const Solution& sol) {
  struct Visitor {
    const Vector& x;
    Vector operator()(const CenterSet& c) const {
      return c.centers().row(static_cast<Eigen::Index>(nearest_center(x, c))).transpose();
    }
    Vector operator()(const Subspace& r) const { return project_subspace(x, r); }
    Vector operator()(const Flat& f) const { return project_flat(x, f); }
    Vector operator()(const LineSet& l) const { return project_line(x, l[nearest_line(x, l)]); }
  };
  return std::visit(Visitor{x}, sol);
}

double squared_distance(const Vector& x, const Solution& sol) {
  return (x - nearest_point(x, sol)).squaredNorm();
}

std::vector<std::size_t> assignment(const Dataset& x, const Solution& sol) {
  std::vector<std::size_t> out(x.n(), 0);
  if (const auto* c = std::get_if<CenterSet>(&sol)) {
    for (std::size_t i = 0; i < x.n(); ++i) out[i] = nearest_center(x.point(i), *c);
  } else if (const auto* l = std::get_if<LineSet>(&sol)) {
    for (std::size_t i = 0; i < x.n(); ++i) out[i] = nearest_line(x.point(i), *l);
  }
  return out;
}

double pow_z_from_squared(double sq, double z) {
  if (z == 2.0) return sq;
  if (z == 1.0) return std::sqrt(sq);
  return std::pow(sq, 0.5 * z);
}

Vector point_costs(const Dataset& data, const Solution& sol, double z) {
  if (!(z >= 1.0) || !std::isfinite(z)) throw InputError("z must be a finite real >= 1");
  check_dim(data.d(), solution_dim(sol));
  Vector out(static_cast<Eigen::Index>(data.n()));
  for (std::size_t i = 0; i < data.n(); ++i) {
    out(static_cast<Eigen::Index>(i)) = pow_z_from_squared(squared_distance(data.point(i), sol), z);
  }
  return out;
}

double cost_pow(const WeightedSet& data, const Solution& sol, double z) {
  return data.weights().dot(point_costs(data.base(), sol, z));
}

double cost_pow(const Dataset& data, const Solution& sol, double z) {
  return point_costs(data, sol, z).sum();
}

double cost(const WeightedSet& data, const Solution& sol, double z) {
  const double p = cost_pow(data, sol, z);
  return z == 1.0 ? p : std::pow(p, 1.0 / z);
}

double cost(const Dataset& data, const Solution& sol, double z) {
  const double p = cost_pow(data, sol, z);
  return z == 1.0 ? p : std::pow(p, 1.0 / z);
}

// Linear images ----------------------------------------------------------------

Dataset transform(const Dataset& x, const Matrix& m) {
  check_dim(static_cast<std::size_t>(m.cols()), x.d());
  return Dataset(x.points() * m.transpose());
}

Solution transform(const Solution& sol, const Matrix& m, const Vector& shift) {
  check_dim(static_cast<std::size_t>(m.cols()), solution_dim(sol));
  check_dim(static_cast<std::size_t>(shift.size()), static_cast<std::size_t>(m.rows()));
  struct Visitor {
    const Matrix& m;
    const Vector& shift;
    Solution operator()(const CenterSet& c) const {
      return CenterSet((c.centers() * m.transpose()).rowwise() + shift.transpose());
    }
    Solution operator()(const Subspace& r) const {
      return Subspace::from_span(r.basis() * m.transpose());
    }
    Solution operator()(const Flat& f) const {
      return Flat(Subspace::from_span(f.direction().basis() * m.transpose()),
                  m * f.translation() + shift);
    }
    Solution operator()(const LineSet& l) const {
      std::vector<Line> out;
      out.reserve(l.k());
      for (const auto& line : l.lines()) {
        out.emplace_back(m * line.anchor() + shift, m * line.direction());
      }
      return LineSet(std::move(out));
    }
  };
  return std::visit(Visitor{m, shift}, sol);
}

}  // namespace projclust
