#pragma once

// Point sets, candidate solutions and cost evaluation for the four
// projective clustering problems: (k,z)-clustering, (k,z)-subspace,
// (k,z)-flat and (k,z)-line approximation.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace projclust {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised for every malformed input (dimension mismatch, invalid parameter,
/// broken invariant at a type boundary).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// n points in R^d stored as the rows of an n x d matrix.
class Dataset {
 public:
  explicit Dataset(Matrix points);

  const Matrix& points() const { return points_; }
  std::size_t n() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(points_.cols()); }
  Vector point(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)).transpose(); }

  /// Rows selected by index, with repetition allowed.
  Dataset subset(const std::vector<std::size_t>& indices) const;

 private:
  Matrix points_;
};

/// A dataset with a nonnegative weight per point.
class WeightedSet {
 public:
  /// Unit weights.
  explicit WeightedSet(Dataset base);
  WeightedSet(Dataset base, Vector weights);

  const Dataset& base() const { return base_; }
  const Vector& weights() const { return weights_; }
  std::size_t n() const { return base_.n(); }
  std::size_t d() const { return base_.d(); }
  double weight(std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }

 private:
  Dataset base_;
  Vector weights_;
};

/// k centers in R^d, one per row.
class CenterSet {
 public:
  explicit CenterSet(Matrix centers);
  const Matrix& centers() const { return centers_; }
  std::size_t k() const { return static_cast<std::size_t>(centers_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(centers_.cols()); }

 private:
  Matrix centers_;
};

/// Linear subspace of R^d given by j orthonormal basis rows (j may be 0).
class Subspace {
 public:
  /// Rejects bases whose Gram matrix is not the identity within 1e-9.
  explicit Subspace(Matrix basis);
  /// The zero subspace of R^d.
  static Subspace zero(std::size_t d);
  /// Gram-Schmidt over the rows of `spanning`; numerically dependent rows
  /// are discarded.
  static Subspace from_span(const Matrix& spanning, double tol = 1e-10);

  const Matrix& basis() const { return basis_; }
  std::size_t dim() const { return static_cast<std::size_t>(basis_.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(basis_.cols()); }

 private:
  Subspace(Matrix basis, bool /*trusted*/);
  Matrix basis_;
};

/// Affine flat {x + translation : x in direction}; the translation is kept
/// orthogonal to the direction so equal flats compare equal.
class Flat {
 public:
  Flat(Subspace direction, const Vector& translation);
  const Subspace& direction() const { return direction_; }
  const Vector& translation() const { return translation_; }
  std::size_t d() const { return direction_.d(); }

 private:
  Subspace direction_;
  Vector translation_;
};

/// Line {anchor + s * direction}. Canonical form: unit direction whose
/// first nonzero coordinate is positive, anchor orthogonal to direction.
class Line {
 public:
  Line(const Vector& anchor, const Vector& direction);
  /// Line through two distinct points.
  static Line through(const Vector& a, const Vector& b);

  const Vector& anchor() const { return anchor_; }
  const Vector& direction() const { return direction_; }
  std::size_t d() const { return static_cast<std::size_t>(anchor_.size()); }

 private:
  Vector anchor_;
  Vector direction_;
};

class LineSet {
 public:
  explicit LineSet(std::vector<Line> lines);
  const std::vector<Line>& lines() const { return lines_; }
  std::size_t k() const { return lines_.size(); }
  std::size_t d() const { return lines_.front().d(); }
  const Line& operator[](std::size_t i) const { return lines_[i]; }

 private:
  std::vector<Line> lines_;
};

enum class Problem { kClustering, kSubspace, kFlat, kLines };

std::string_view problem_name(Problem p);
Problem parse_problem(std::string_view name);

using Solution = std::variant<CenterSet, Subspace, Flat, LineSet>;

Problem problem_of(const Solution& sol);
std::size_t solution_dim(const Solution& sol);

// Projections ---------------------------------------------------------------

Vector project_subspace(const Vector& x, const Subspace& r);
Vector project_flat(const Vector& x, const Flat& f);
Vector project_line(const Vector& x, const Line& l);

/// Index of the nearest center (lowest index on ties).
std::size_t nearest_center(const Vector& x, const CenterSet& c);
/// Index of the nearest line (lowest index on ties).
std::size_t nearest_line(const Vector& x, const LineSet& l);

/// Closest point of the solution to x (nearest center, projection onto the
/// subspace/flat, projection onto the nearest line).
Vector nearest_point(const Vector& x, const Solution& sol);

/// Squared Euclidean distance from x to the solution.
double squared_distance(const Vector& x, const Solution& sol);

/// For center and line solutions, the index of the nearest member for each
/// point; all zeros for subspaces and flats.
std::vector<std::size_t> assignment(const Dataset& x, const Solution& sol);

/// dist^z computed from a squared distance, with exact paths for z = 1, 2.
double pow_z_from_squared(double sq, double z);

/// Sum over points of w(x) * dist(x, sol)^z.
double cost_pow(const WeightedSet& data, const Solution& sol, double z);
double cost_pow(const Dataset& data, const Solution& sol, double z);
/// cost_pow^(1/z): the l_z norm of the weighted distance vector.
double cost(const WeightedSet& data, const Solution& sol, double z);
double cost(const Dataset& data, const Solution& sol, double z);

/// Per-point dist^z (unweighted).
Vector point_costs(const Dataset& data, const Solution& sol, double z);

/// Applies a linear map (rows of `m` are output coordinates) to every point.
Dataset transform(const Dataset& x, const Matrix& m);
/// The image of a solution under x -> m x + shift; used for rotation and
/// scaling checks. Subspaces/flats are re-orthonormalised.
Solution transform(const Solution& sol, const Matrix& m, const Vector& shift);

}  // namespace projclust
