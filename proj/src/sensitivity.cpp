#include "projclust/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "projclust/coreset.hpp"
#include "projclust/io.hpp"

namespace projclust {

SensitivityProfile::SensitivityProfile(Vector sigma) : sigma_(std::move(sigma)) {
  if (sigma_.size() < 1) throw InputError("sensitivity profile must be non-empty");
  if (!sigma_.allFinite() || (sigma_.array() <= 0.0).any()) {
    throw InputError("sensitivities must be finite and strictly positive");
  }
  total_ = sigma_.sum();
  distribution_ = sigma_ / total_;
}

SensitivityProfile SensitivityProfile::uniform(std::size_t n) {
  return SensitivityProfile(Vector::Ones(static_cast<Eigen::Index>(n)));
}

void write_profile_csv(std::ostream& out, const SensitivityProfile& profile) {
  out << "index,sigma,sigma_tilde\n";
  for (std::size_t i = 0; i < profile.n(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out << i << ',' << format_double(profile.sigma()(e)) << ','
        << format_double(profile.distribution()(e)) << '\n';
  }
}

namespace {

// First term 2^(z-1) r^z / cost, defined as 0 when the solution has zero cost.
Vector residual_terms(const Vector& residual_pow, double z) {
  const double total = residual_pow.sum();
  if (!(total > 0.0)) return Vector::Zero(residual_pow.size());
  return std::pow(2.0, z - 1.0) * residual_pow / total;
}

// Minimises g(b) = sum_j |p_j + q_j . b|^z, a convex function, by Newton's
// method on the smoothed objective sum_j (s_j^2 + delta^2)^(z/2) while
// delta is driven towards zero. Returns the unsmoothed value at the end
// point, which upper-bounds the true minimum.
double minimise_lz(const Vector& p, const Matrix& q, double z) {
  const Eigen::Index n = p.size();
  const Eigen::Index m = q.cols();
  auto exact = [&](const Vector& b) {
    const Vector s = p + q * b;
    double g = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) g += pow_z_from_squared(s(j) * s(j), z);
    return g;
  };
  Vector b = Vector::Zero(m);
  if (m == 0) return exact(b);

  for (double delta = 1e-1; delta >= 1e-11; delta *= 0.1) {
    const double d2 = delta * delta;
    auto smooth = [&](const Vector& bb) {
      const Vector s = p + q * bb;
      double g = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) g += std::pow(s(j) * s(j) + d2, 0.5 * z);
      return g;
    };
    double f = smooth(b);
    for (int iter = 0; iter < 100; ++iter) {
      const Vector s = p + q * b;
      Vector grad = Vector::Zero(m);
      Matrix hess = Matrix::Zero(m, m);
      for (Eigen::Index j = 0; j < n; ++j) {
        const double a = s(j) * s(j) + d2;
        const double h1 = z * s(j) * std::pow(a, 0.5 * z - 1.0);
        const double h2 = z * std::pow(a, 0.5 * z - 2.0) * ((z - 1.0) * s(j) * s(j) + d2);
        grad.noalias() += h1 * q.row(j).transpose();
        hess.noalias() += h2 * q.row(j).transpose() * q.row(j);
      }
      const double ridge = 1e-14 * std::max(1.0, hess.diagonal().maxCoeff());
      hess.diagonal().array() += ridge;
      const Vector step = -hess.ldlt().solve(grad);
      const double decrement = -grad.dot(step);
      if (!(decrement > 1e-18 * std::max(1.0, f))) break;
      double eta = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector cand = b + eta * step;
        const double fc = smooth(cand);
        if (fc <= f - 0.25 * eta * decrement) {
          b = cand;
          f = fc;
          moved = true;
          break;
        }
        eta *= 0.5;
      }
      if (!moved) break;
    }
  }
  return exact(b);
}

}  // namespace

Vector sup_ratios(const Matrix& y, double z) {
  if (!(z >= 1.0) || !std::isfinite(z)) throw InputError("z must be a finite real >= 1");
  const Eigen::Index n = y.rows();
  Vector out = Vector::Zero(n);
  if (n == 0 || y.cols() == 0) return out;

  Eigen::BDCSVD<Matrix> svd(y, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return out;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > 1e-11 * sv(0)) ++rank;
  const Matrix u = svd.matrixU().leftCols(rank);

  if (z == 2.0) {
    for (Eigen::Index i = 0; i < n; ++i) out(i) = std::min(1.0, u.row(i).squaredNorm());
    return out;
  }

  // Coordinates of the points in an orthonormal basis of their span; the
  // supremum only depends on these.
  const Matrix coords = u * sv.head(rank).asDiagonal();
  double max_norm = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) max_norm = std::max(max_norm, coords.row(i).norm());

  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector ci = coords.row(i).transpose();
    const double ni = ci.norm();
    if (!(ni > 1e-13 * max_norm)) continue;
    // sup_u |<c_i,u>|^z / sum_j |<c_j,u>|^z = 1 / min{ sum_j |<c_j,a>|^z : <c_i,a> = 1 }.
    // Parameterise a = c_i / |c_i|^2 + N b with N spanning c_i's complement.
    Eigen::HouseholderQR<Matrix> qr(ci);
    const Matrix basis = qr.householderQ() * Matrix::Identity(rank, rank);
    const Matrix comp = basis.rightCols(rank - 1);
    const Vector p = coords * ci / (ni * ni);
    const Matrix q = coords * comp;
    const double g = minimise_lz(p, q, z);
    out(i) = std::min(1.0, 1.0 / g);
  }
  return out;
}

double sup_ratio(const Dataset& y, std::size_t i, double z) {
  if (i >= y.n()) throw InputError("sup_ratio index out of range");
  if (y.point(i).squaredNorm() == 0.0) return 0.0;
  return sup_ratios(y.points(), z)(static_cast<Eigen::Index>(i));
}

SensitivityProfile clustering_sensitivity(const Dataset& x, const CenterSet& c, double z) {
  const Solution sol{c};
  const Vector rpow = point_costs(x, sol, z);
  const auto assign = assignment(x, sol);
  std::vector<std::size_t> sizes(c.k(), 0);
  for (auto a : assign) ++sizes[a];
  const Vector first = residual_terms(rpow, z);
  const double second = std::pow(2.0, 2.0 * z - 1.0);
  Vector sigma(static_cast<Eigen::Index>(x.n()));
  for (std::size_t i = 0; i < x.n(); ++i) {
    sigma(static_cast<Eigen::Index>(i)) =
        first(static_cast<Eigen::Index>(i)) + second / static_cast<double>(sizes[assign[i]]);
  }
  return SensitivityProfile(std::move(sigma));
}

namespace {

SensitivityProfile from_sup_terms(const Vector& rpow, Vector sup, double z) {
  const Eigen::Index n = sup.size();
  if (!(sup.array() > 0.0).any()) sup = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const Vector first = residual_terms(rpow, z);
  const double second = std::pow(2.0, 2.0 * z - 1.0);
  Vector sigma = first + second * sup;
  // A point at the origin costs nothing under any subspace; it keeps a
  // vanishing but positive mass so the profile stays a valid distribution.
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(sigma(i) > 0.0)) sigma(i) = std::numeric_limits<double>::min();
  }
  return SensitivityProfile(std::move(sigma));
}

}  // namespace

SensitivityProfile subspace_sensitivity(const Dataset& x, const Subspace& r, double z) {
  if (x.d() != r.d()) throw InputError("dimension mismatch in subspace sensitivity");
  const Vector rpow = point_costs(x, Solution{r}, z);
  const Matrix coords = x.points() * r.basis().transpose();  // n x j
  return from_sup_terms(rpow, sup_ratios(coords, z), z);
}

SensitivityProfile flat_sensitivity(const Dataset& x, const Flat& f, double z) {
  if (x.d() != f.d()) throw InputError("dimension mismatch in flat sensitivity");
  const Vector rpow = point_costs(x, Solution{f}, z);
  const Matrix& b = f.direction().basis();
  Matrix lifted(static_cast<Eigen::Index>(x.n()), b.rows() + 1);
  lifted.leftCols(b.rows()) = (x.points().rowwise() - f.translation().transpose()) * b.transpose();
  lifted.col(b.rows()).setOnes();
  return from_sup_terms(rpow, sup_ratios(lifted, z), z);
}

Dataset projected_points(const Dataset& x, const Solution& sol) {
  Matrix out(static_cast<Eigen::Index>(x.n()), static_cast<Eigen::Index>(x.d()));
  for (std::size_t i = 0; i < x.n(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = nearest_point(x.point(i), sol).transpose();
  }
  return Dataset(std::move(out));
}

SensitivityProfile line_sensitivity(const Dataset& x, const LineSet& l, double z,
                                    const PeelingPartition& peel) {
  const Solution sol{l};
  const Vector rpow = point_costs(x, sol, z);
  std::vector<std::size_t> layer(x.n(), 0);
  for (std::size_t li = 0; li < peel.layers.size(); ++li) {
    for (auto idx : peel.layers[li]) {
      if (idx >= x.n() || layer[idx] != 0) throw InputError("peel is not a partition of the points");
      layer[idx] = li + 1;
    }
  }
  if (std::find(layer.begin(), layer.end(), 0) != layer.end()) {
    throw InputError("peel is not a partition of the points");
  }
  const Vector first = residual_terms(rpow, z);
  const double second = std::pow(2.0, 2.0 * z - 1.0) * 3.0;
  Vector sigma(static_cast<Eigen::Index>(x.n()));
  for (std::size_t i = 0; i < x.n(); ++i) {
    sigma(static_cast<Eigen::Index>(i)) =
        first(static_cast<Eigen::Index>(i)) + second / static_cast<double>(layer[i]);
  }
  return SensitivityProfile(std::move(sigma));
}

SensitivityProfile line_sensitivity(const Dataset& x, const LineSet& l, double z) {
  const Solution sol{l};
  const Dataset y = projected_points(x, sol);
  const auto peel = peel_partition(y, assignment(x, sol), l.k());
  return line_sensitivity(x, l, z, peel);
}

SensitivityProfile sensitivity(const Dataset& x, const Solution& sol, double z) {
  struct Visitor {
    const Dataset& x;
    double z;
    SensitivityProfile operator()(const CenterSet& c) const { return clustering_sensitivity(x, c, z); }
    SensitivityProfile operator()(const Subspace& r) const { return subspace_sensitivity(x, r, z); }
    SensitivityProfile operator()(const Flat& f) const { return flat_sensitivity(x, f, z); }
    SensitivityProfile operator()(const LineSet& l) const { return line_sensitivity(x, l, z); }
  };
  return std::visit(Visitor{x, z}, sol);
}

double event_e4_statistic(const Dataset& x, const Solution& sol, const JLMap& map, double z,
                          const SensitivityProfile& profile) {
  if (profile.n() != x.n()) throw InputError("profile size does not match dataset");
  if (map.d() != x.d()) throw InputError("dimension mismatch between map and dataset");
  double stat = 0.0;
  for (std::size_t i = 0; i < x.n(); ++i) {
    const Vector r = x.point(i) - nearest_point(x.point(i), sol);
    const double before = r.squaredNorm();
    double dilation_sq = 1.0;
    if (before > 0.0) dilation_sq = (map.matrix() * r).squaredNorm() / before;
    stat += std::pow(dilation_sq, z) * profile.sigma()(static_cast<Eigen::Index>(i));
  }
  return stat;
}

double event_e4_threshold(std::size_t k, double z) {
  return 100.0 * static_cast<double>(k + 1) * std::pow(2.0, z);
}

}  // namespace projclust
