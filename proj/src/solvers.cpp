#include "projclust/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include "projclust/io.hpp"
#include "projclust/rng.hpp"

namespace projclust {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double root_z(double p, double z) { return z == 1.0 ? p : std::pow(p, 1.0 / z); }

SolveReport make_report(const WeightedSet& x, Solution sol, double z, std::string method,
                        std::size_t restarts, bool converged) {
  SolveReport r{std::move(sol), 0.0, 0.0, std::move(method), restarts, converged};
  r.cost_pow = cost_pow(x, r.solution, z);
  r.cost = root_z(r.cost_pow, z);
  return r;
}

void check_z(double z) {
  if (!(z >= 1.0) || !std::isfinite(z)) throw InputError("z must be a finite real >= 1");
}

double objective_center(const Matrix& pts, const Vector& w, const Vector& c, double z) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (w(i) == 0.0) continue;
    f += w(i) * pow_z_from_squared((pts.row(i).transpose() - c).squaredNorm(), z);
  }
  return f;
}

Vector weighted_mean(const Matrix& pts, const Vector& w) {
  return (pts.transpose() * w) / w.sum();
}

// Top-k eigenvectors (as rows) of a symmetric matrix.
Matrix top_eigenvectors(const Matrix& sym, std::size_t k) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Matrix& v = es.eigenvectors();  // ascending eigenvalues
  const auto d = v.cols();
  Matrix out(static_cast<Eigen::Index>(k), d);
  for (std::size_t j = 0; j < k; ++j) out.row(static_cast<Eigen::Index>(j)) = v.col(d - 1 - static_cast<Eigen::Index>(j)).transpose();
  return out;
}

Matrix scatter(const Matrix& pts, const Vector& w) {
  return pts.transpose() * w.asDiagonal() * pts;
}

}  // namespace

// One center ------------------------------------------------------------------------

Vector optimal_center(const Matrix& points, const Vector& weights, double z) {
  check_z(z);
  if (points.rows() < 1 || weights.size() != points.rows() || !(weights.sum() > 0.0)) {
    throw InputError("optimal_center needs points with positive total weight");
  }
  const Vector mean = weighted_mean(points, weights);
  if (z == 2.0 || points.rows() == 1) return mean;
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();

  if (d == 1 && z == 1.0) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return points(a, 0) < points(b, 0); });
    const double half = 0.5 * weights.sum();
    double acc = 0.0;
    for (auto i : order) {
      acc += weights(i);
      if (acc >= half) return Vector::Constant(1, points(i, 0));
    }
    return Vector::Constant(1, points(order.back(), 0));
  }

  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, (points.row(i).transpose() - mean).norm());
  if (scale == 0.0) return mean;
  const double tiny = 1e-12 * scale;

  Vector c = mean;
  double f = objective_center(points, weights, c, z);

  if (z < 2.0) {
    // Majorise-minimise: each step solves a weighted mean with weights
    // w_i r_i^(z-2); the objective never increases.
    for (int iter = 0; iter < 10000; ++iter) {
      Vector num = Vector::Zero(d);
      double den = 0.0;
      bool on_point = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (weights(i) == 0.0) continue;
        const double r = (points.row(i).transpose() - c).norm();
        if (r < tiny) {
          on_point = true;
          break;
        }
        const double omega = weights(i) * std::pow(r, z - 2.0);
        num += omega * points.row(i).transpose();
        den += omega;
      }
      if (on_point) {
        if (z == 1.0) {
          // Optimality test at a data point: pull of the others is at most
          // the point's own weight.
          Vector pull = Vector::Zero(d);
          double own = 0.0;
          for (Eigen::Index i = 0; i < n; ++i) {
            const Vector diff = points.row(i).transpose() - c;
            const double r = diff.norm();
            if (r < tiny) {
              own += weights(i);
            } else {
              pull += weights(i) * diff / r;
            }
          }
          if (pull.norm() <= own) break;
        }
        c += Vector::Constant(d, tiny / std::sqrt(static_cast<double>(d)));
        f = objective_center(points, weights, c, z);
        continue;
      }
      const Vector next = num / den;
      const double fn = objective_center(points, weights, next, z);
      const bool done = !(fn < f) || (f - fn) <= 1e-10 * f;
      if (fn <= f) {
        c = next;
        f = fn;
      }
      if (done) break;
    }
    return c;
  }

  // z > 2: smooth and strictly convex; damped Newton.
  for (int iter = 0; iter < 200; ++iter) {
    Vector grad = Vector::Zero(d);
    Matrix hess = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (weights(i) == 0.0) continue;
      const Vector diff = c - points.row(i).transpose();
      const double r = diff.norm();
      if (r == 0.0) continue;
      const double a = weights(i) * z * std::pow(r, z - 2.0);
      grad += a * diff;
      const Vector u = diff / r;
      hess += a * (Matrix::Identity(d, d) + (z - 2.0) * u * u.transpose());
    }
    hess.diagonal().array() += 1e-14 * std::max(1.0, hess.diagonal().maxCoeff());
    const Vector step = -hess.ldlt().solve(grad);
    const double decrement = -grad.dot(step);
    if (!(decrement > 1e-16 * f)) break;
    double eta = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector cand = c + eta * step;
      const double fc = objective_center(points, weights, cand, z);
      if (fc <= f - 0.25 * eta * decrement) {
        c = cand;
        f = fc;
        moved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!moved) break;
  }
  return c;
}

// Clustering ---------------------------------------------------------------------------

namespace {

// best[j][mask]: cheapest split of `mask` into at most j+1 parts using the
// per-subset costs `single`. Returns parts of the full set.
std::vector<std::uint32_t> best_partition(const std::vector<double>& single, std::size_t n,
                                          std::size_t k) {
  const std::uint32_t full = (n == 32) ? 0xffffffffu : ((1u << n) - 1u);
  const std::size_t size = static_cast<std::size_t>(full) + 1;
  std::vector<std::vector<double>> best(k, std::vector<double>(size, kInf));
  std::vector<std::vector<std::uint32_t>> choice(k, std::vector<std::uint32_t>(size, 0));
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    best[0][mask] = single[mask];
    choice[0][mask] = mask;
  }
  for (std::size_t j = 1; j < k; ++j) {
    for (std::uint32_t mask = 1; mask <= full; ++mask) {
      double b = best[j - 1][mask];
      std::uint32_t ch = 0;  // 0 means "use at most j parts"
      const std::uint32_t low = mask & (~mask + 1u);
      const std::uint32_t rest = mask ^ low;
      // Parts containing the lowest bit; the remainder goes to j parts.
      for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
        const std::uint32_t part = sub | low;
        if (part != mask) {
          const double c = single[part] + best[j - 1][mask ^ part];
          if (c < b) {
            b = c;
            ch = part;
          }
        }
        if (sub == 0) break;
      }
      best[j][mask] = b;
      choice[j][mask] = ch;
    }
  }
  std::vector<std::uint32_t> parts;
  std::uint32_t mask = full;
  std::size_t j = k - 1;
  while (mask != 0) {
    while (j > 0 && choice[j][mask] == 0) --j;
    const std::uint32_t part = (j == 0) ? mask : choice[j][mask];
    parts.push_back(part);
    mask ^= part;
    if (j > 0) --j;
  }
  return parts;
}

void subset_rows(const WeightedSet& x, std::uint32_t mask, Matrix& pts, Vector& w) {
  const int cnt = __builtin_popcount(mask);
  pts.resize(cnt, static_cast<Eigen::Index>(x.d()));
  w.resize(cnt);
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < x.n(); ++i) {
    if (mask & (1u << i)) {
      pts.row(r) = x.base().points().row(static_cast<Eigen::Index>(i));
      w(r) = x.weight(i);
      ++r;
    }
  }
}

}  // namespace

SolveReport solve_clustering_exact(const WeightedSet& x, std::size_t k, double z) {
  check_z(z);
  if (k < 1) throw InputError("k must be at least 1");
  const std::size_t n = x.n();
  if (n > kMaxExactClusteringPoints) {
    throw InputError("instance too large for the exact clustering solver (n > " +
                     std::to_string(kMaxExactClusteringPoints) + "); use the heuristic");
  }
  if (k >= n) {
    return make_report(x, CenterSet(x.base().points()), z, "exact", 0, true);
  }
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<double> single(static_cast<std::size_t>(full) + 1, 0.0);
  std::vector<Vector> centers(static_cast<std::size_t>(full) + 1);
  Matrix pts;
  Vector w;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    subset_rows(x, mask, pts, w);
    if (!(w.sum() > 0.0)) {
      centers[mask] = pts.row(0).transpose();
      single[mask] = 0.0;
      continue;
    }
    centers[mask] = optimal_center(pts, w, z);
    single[mask] = objective_center(pts, w, centers[mask], z);
  }
  const auto parts = best_partition(single, n, k);
  Matrix c(static_cast<Eigen::Index>(parts.size()), static_cast<Eigen::Index>(x.d()));
  for (std::size_t j = 0; j < parts.size(); ++j) c.row(static_cast<Eigen::Index>(j)) = centers[parts[j]].transpose();
  return make_report(x, CenterSet(std::move(c)), z, "exact", 0, true);
}

namespace {

struct LocalResult {
  Solution solution;
  double cost_pow;
  bool converged;
};

Vector dist_pow(const WeightedSet& x, const Solution& sol, double z) {
  return point_costs(x.base(), sol, z);
}

// Samples an index with probability proportional to `mass`; uniform over
// positive-weight points when all mass is zero.
std::size_t sample_index(const Vector& mass, const Vector& w, Rng& rng) {
  const double total = mass.sum();
  const Vector& m = (total > 0.0) ? mass : w;
  std::discrete_distribution<std::size_t> pick(m.data(), m.data() + m.size());
  return pick(rng);
}

LocalResult lloyd(const WeightedSet& x, std::size_t k, double z, Rng& rng) {
  const auto& pts = x.base().points();
  const Eigen::Index d = pts.cols();
  Matrix centers(static_cast<Eigen::Index>(k), d);
  // D^z seeding.
  centers.row(0) = pts.row(static_cast<Eigen::Index>(sample_index(x.weights(), x.weights(), rng)));
  Vector best_sq = Vector::Constant(pts.rows(), kInf);
  for (std::size_t j = 1; j < k; ++j) {
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      best_sq(i) = std::min(best_sq(i), (pts.row(i) - centers.row(static_cast<Eigen::Index>(j - 1))).squaredNorm());
    }
    Vector mass(pts.rows());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) mass(i) = x.weights()(i) * pow_z_from_squared(best_sq(i), z);
    centers.row(static_cast<Eigen::Index>(j)) = pts.row(static_cast<Eigen::Index>(sample_index(mass, x.weights(), rng)));
  }

  Solution sol{CenterSet(centers)};
  double f = cost_pow(x, sol, z);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const auto assign = assignment(x.base(), sol);
    const Vector residual = dist_pow(x, sol, z);
    std::vector<std::vector<Eigen::Index>> groups(k);
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (x.weight(i) > 0.0) groups[assign[i]].push_back(static_cast<Eigen::Index>(i));
    }
    Matrix next = std::get<CenterSet>(sol).centers();
    std::vector<bool> used(static_cast<std::size_t>(pts.rows()), false);
    for (std::size_t j = 0; j < k; ++j) {
      if (groups[j].empty()) {
        // Farthest-point reseeding.
        Eigen::Index worst = 0;
        double worst_v = -1.0;
        for (Eigen::Index i = 0; i < pts.rows(); ++i) {
          const double v = x.weights()(i) * residual(i);
          if (!used[static_cast<std::size_t>(i)] && v > worst_v) {
            worst_v = v;
            worst = i;
          }
        }
        used[static_cast<std::size_t>(worst)] = true;
        next.row(static_cast<Eigen::Index>(j)) = pts.row(worst);
        continue;
      }
      Matrix gp(static_cast<Eigen::Index>(groups[j].size()), d);
      Vector gw(static_cast<Eigen::Index>(groups[j].size()));
      for (std::size_t r = 0; r < groups[j].size(); ++r) {
        gp.row(static_cast<Eigen::Index>(r)) = pts.row(groups[j][r]);
        gw(static_cast<Eigen::Index>(r)) = x.weights()(groups[j][r]);
      }
      next.row(static_cast<Eigen::Index>(j)) = optimal_center(gp, gw, z).transpose();
    }
    Solution cand{CenterSet(next)};
    const double fc = cost_pow(x, cand, z);
    if (fc < f) {
      const bool small = (f - fc) <= 1e-12 * f;
      sol = std::move(cand);
      f = fc;
      if (small) {
        converged = true;
        break;
      }
    } else {
      converged = true;
      break;
    }
  }
  return {std::move(sol), f, converged};
}

}  // namespace

SolveReport solve_clustering_heuristic(const WeightedSet& x, std::size_t k, double z,
                                       std::size_t restarts, std::uint64_t seed) {
  check_z(z);
  if (k < 1) throw InputError("k must be at least 1");
  if (restarts < 1) throw InputError("restarts must be at least 1");
  std::optional<LocalResult> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = make_rng(seed, r);
    auto res = lloyd(x, k, z, rng);
    if (!best || res.cost_pow < best->cost_pow) best = std::move(res);
  }
  return make_report(x, std::move(best->solution), z, "heuristic", restarts, best->converged);
}

// Subspaces -------------------------------------------------------------------------

namespace {

double subspace_cost(const Matrix& pts, const Vector& w, const Matrix& basis, double z) {
  double f = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (w(i) == 0.0) continue;
    const Vector p = pts.row(i).transpose();
    const double sq = std::max(0.0, (p - basis.transpose() * (basis * p)).squaredNorm());
    f += w(i) * pow_z_from_squared(sq, z);
  }
  return f;
}

Matrix orthonormal_rows(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m.transpose());
  return (qr.householderQ() * Matrix::Identity(m.cols(), m.rows())).transpose();
}

// Completes `rows` (possibly rank deficient) to k orthonormal rows using
// `fallback` directions.
Matrix complete_basis(const Matrix& rows, const Matrix& fallback, std::size_t k) {
  Matrix stacked(rows.rows() + fallback.rows(), rows.cols());
  stacked << rows, fallback;
  Subspace s = Subspace::from_span(stacked);
  Matrix b = s.basis().topRows(std::min<Eigen::Index>(static_cast<Eigen::Index>(k), s.basis().rows()));
  if (b.rows() < static_cast<Eigen::Index>(k)) {
    Matrix eye = Matrix::Identity(rows.cols(), rows.cols());
    Matrix more(b.rows() + eye.rows(), rows.cols());
    more << b, eye;
    b = Subspace::from_span(more).basis().topRows(static_cast<Eigen::Index>(k));
  }
  return b;
}

// Local refinement of a k-dimensional subspace (rows of `basis`) for
// general z: reweighted spectral steps followed by Riemannian gradient
// steps with step halving. Only improving moves are accepted.
Matrix refine_subspace(const Matrix& pts, const Vector& w, Matrix basis, double z, bool* converged) {
  const std::size_t k = static_cast<std::size_t>(basis.rows());
  if (k == 0 || z == 2.0) {
    if (converged) *converged = true;
    return basis;
  }
  double scale = 0.0;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) scale = std::max(scale, pts.row(i).norm());
  const double floor_r = 1e-9 * std::max(scale, 1e-300);
  double f = subspace_cost(pts, w, basis, z);
  double step = 1.0;
  bool conv = false;
  for (int iter = 0; iter < 300; ++iter) {
    const double f_start = f;
    // Reweighted spectral step.
    {
      Vector omega(pts.rows());
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Vector p = pts.row(i).transpose();
        const double r = std::sqrt(std::max(0.0, (p - basis.transpose() * (basis * p)).squaredNorm()));
        omega(i) = w(i) * std::pow(std::max(r, floor_r), z - 2.0);
      }
      const Matrix cand = top_eigenvectors(scatter(pts, omega), k);
      const double fc = subspace_cost(pts, w, cand, z);
      if (fc < f) {
        basis = cand;
        f = fc;
      }
    }
    // Riemannian gradient step.
    {
      Matrix grad = Matrix::Zero(basis.rows(), basis.cols());
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        if (w(i) == 0.0) continue;
        const Vector p = pts.row(i).transpose();
        const Vector bp = basis * p;
        const double r = std::sqrt(std::max(0.0, p.squaredNorm() - bp.squaredNorm()));
        grad -= w(i) * z * std::pow(std::max(r, floor_r), z - 2.0) * bp * p.transpose();
      }
      grad -= (grad * basis.transpose()) * basis;  // tangent part
      const double gn = grad.norm();
      if (gn > 0.0) {
        double eta = step / gn;
        for (int h = 0; h < 40; ++h) {
          const Matrix cand = orthonormal_rows(basis - eta * grad);
          const double fc = subspace_cost(pts, w, cand, z);
          if (fc < f) {
            basis = cand;
            f = fc;
            step = std::min(1.0, 2.0 * eta * gn);
            break;
          }
          eta *= 0.5;
        }
      }
    }
    if (f_start - f <= 1e-8 * f_start) {
      conv = true;
      break;
    }
  }
  if (converged) *converged = conv;
  return basis;
}

Matrix spectral_basis(const Matrix& pts, const Vector& w, std::size_t k) {
  return top_eigenvectors(scatter(pts, w), k);
}

// Candidate spans: every k-subset when there are few, else random ones.
std::vector<Matrix> span_candidates(const Matrix& pts, const Vector& w, std::size_t k,
                                    const Matrix& fallback, Rng& rng) {
  std::vector<Matrix> out;
  std::vector<Eigen::Index> usable;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (w(i) > 0.0 && pts.row(i).squaredNorm() > 0.0) usable.push_back(i);
  }
  if (usable.empty()) return out;
  const std::size_t n = usable.size();
  auto add = [&](const std::vector<Eigen::Index>& pick) {
    Matrix rows(static_cast<Eigen::Index>(pick.size()), pts.cols());
    for (std::size_t j = 0; j < pick.size(); ++j) rows.row(static_cast<Eigen::Index>(j)) = pts.row(pick[j]);
    out.push_back(complete_basis(rows, fallback, k));
  };
  // Count k-subsets, capped.
  double combos = 1.0;
  for (std::size_t j = 0; j < std::min(k, n); ++j) combos *= static_cast<double>(n - j) / static_cast<double>(j + 1);
  const std::size_t kk = std::min(k, n);
  if (combos <= 256.0) {
    std::vector<std::size_t> idx(kk);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      std::vector<Eigen::Index> pick;
      for (auto v : idx) pick.push_back(usable[v]);
      add(pick);
      std::size_t pos = kk;
      while (pos > 0 && idx[pos - 1] == n - kk + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t q = pos; q < kk; ++q) idx[q] = idx[q - 1] + 1;
    }
  } else {
    for (int c = 0; c < 64; ++c) {
      std::vector<Eigen::Index> pool = usable;
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(kk);
      add(pool);
    }
  }
  return out;
}

Matrix best_subspace_general(const Matrix& pts, const Vector& w, std::size_t k, double z, Rng& rng,
                             bool* converged) {
  const Matrix spectral = spectral_basis(pts, w, k);
  std::vector<std::pair<double, Matrix>> scored;
  scored.emplace_back(subspace_cost(pts, w, spectral, z), spectral);
  for (auto& b : span_candidates(pts, w, k, spectral, rng)) {
    scored.emplace_back(subspace_cost(pts, w, b, z), std::move(b));
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Matrix best = scored.front().second;
  double best_f = kInf;
  bool best_conv = false;
  const std::size_t keep = std::min<std::size_t>(4, scored.size());
  for (std::size_t c = 0; c < keep; ++c) {
    bool conv = false;
    Matrix refined = refine_subspace(pts, w, scored[c].second, z, &conv);
    const double f = subspace_cost(pts, w, refined, z);
    if (f < best_f) {
      best_f = f;
      best = std::move(refined);
      best_conv = conv;
    }
  }
  if (converged) *converged = best_conv;
  return best;
}

}  // namespace

SolveReport solve_subspace(const WeightedSet& x, std::size_t k, double z, std::uint64_t seed) {
  check_z(z);
  if (k >= x.d()) throw InputError("subspace solver needs k < d");
  const Matrix& pts = x.base().points();
  if (k == 0) return make_report(x, Subspace::zero(x.d()), z, "exact", 0, true);
  if (z == 2.0) {
    return make_report(x, Subspace(orthonormal_rows(spectral_basis(pts, x.weights(), k))), z,
                       "exact", 0, true);
  }
  Rng rng = make_rng(seed, 0);
  bool conv = false;
  const Matrix b = best_subspace_general(pts, x.weights(), k, z, rng, &conv);
  return make_report(x, Subspace(orthonormal_rows(b)), z, "span-search", 1, conv);
}

// Flats -------------------------------------------------------------------------------

namespace {

double flat_cost(const Matrix& pts, const Vector& w, const Matrix& basis, const Vector& tau, double z) {
  return subspace_cost(pts.rowwise() - tau.transpose(), w, basis, z);
}

// Best translation for a fixed direction: a one-center problem on the
// components orthogonal to the direction.
Vector refine_translation(const Matrix& pts, const Vector& w, const Matrix& basis, double z) {
  const Matrix perp = pts - (pts * basis.transpose()) * basis;
  return optimal_center(perp, w, z);
}

struct FlatFit {
  Matrix basis;
  Vector tau;
  double f;
  bool converged;
};

FlatFit alternate_flat(const Matrix& pts, const Vector& w, Matrix basis, Vector tau, double z,
                       int rounds) {
  double f = flat_cost(pts, w, basis, tau, z);
  bool conv = false;
  for (int r = 0; r < rounds; ++r) {
    const double f_start = f;
    bool sub_conv = false;
    Matrix nb = refine_subspace(pts.rowwise() - tau.transpose(), w, basis, z, &sub_conv);
    double fb = flat_cost(pts, w, nb, tau, z);
    if (fb < f) {
      basis = std::move(nb);
      f = fb;
    }
    Vector nt = refine_translation(pts, w, basis, z);
    const double ft = flat_cost(pts, w, basis, nt, z);
    if (ft < f) {
      tau = std::move(nt);
      f = ft;
    }
    if (f_start - f <= 1e-8 * f_start) {
      conv = true;
      break;
    }
  }
  return {std::move(basis), std::move(tau), f, conv};
}

FlatFit fit_flat_general(const Matrix& pts, const Vector& w, std::size_t k, double z, Rng& rng) {
  const Vector mean = weighted_mean(pts, w);
  std::vector<Vector> taus;
  taus.push_back(mean);
  taus.push_back(optimal_center(pts, w, z));
  std::vector<Eigen::Index> usable;
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    if (w(i) > 0.0) usable.push_back(i);
  }
  // Translations from convex hulls of small subsets: single points and
  // centroids of random pairs and triples.
  if (usable.size() <= 24) {
    for (auto i : usable) taus.push_back(pts.row(i).transpose());
  }
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  for (int c = 0; c < 16; ++c) {
    const std::size_t size = 2 + static_cast<std::size_t>(c % 2);
    Vector s = Vector::Zero(pts.cols());
    for (std::size_t j = 0; j < size; ++j) s += pts.row(usable[pick(rng)]).transpose();
    taus.push_back(s / static_cast<double>(size));
  }
  const Matrix centred = pts.rowwise() - mean.transpose();
  const Matrix spectral = spectral_basis(centred, w, k);

  std::vector<std::pair<double, std::size_t>> scored;
  std::vector<Matrix> bases;
  for (std::size_t c = 0; c < taus.size(); ++c) {
    const Matrix shifted = pts.rowwise() - taus[c].transpose();
    Matrix b = spectral_basis(shifted, w, k);
    const double fs = subspace_cost(shifted, w, spectral, z);
    const double fb = subspace_cost(shifted, w, b, z);
    if (fs < fb) b = spectral;
    scored.emplace_back(std::min(fs, fb), c);
    bases.push_back(std::move(b));
  }
  std::stable_sort(scored.begin(), scored.end());
  FlatFit best{spectral, mean, kInf, false};
  const std::size_t keep = std::min<std::size_t>(3, scored.size());
  for (std::size_t c = 0; c < keep; ++c) {
    const std::size_t idx = scored[c].second;
    const Matrix shifted = pts.rowwise() - taus[idx].transpose();
    Rng sub_rng = make_rng(derive_seed(rng(), c), 0);
    bool conv = false;
    Matrix b = best_subspace_general(shifted, w, k, z, sub_rng, &conv);
    FlatFit fit = alternate_flat(pts, w, std::move(b), taus[idx], z, 50);
    if (fit.f < best.f) best = std::move(fit);
  }
  return best;
}

}  // namespace

SolveReport solve_flat(const WeightedSet& x, std::size_t k, double z, std::uint64_t seed) {
  check_z(z);
  if (k >= x.d()) throw InputError("flat solver needs k < d");
  const Matrix& pts = x.base().points();
  const Vector& w = x.weights();
  if (z == 2.0) {
    const Vector mean = weighted_mean(pts, w);
    const Matrix b = k == 0 ? Matrix(0, pts.cols())
                            : orthonormal_rows(spectral_basis(pts.rowwise() - mean.transpose(), w, k));
    return make_report(x, Flat(Subspace(b), mean), z, "exact", 0, true);
  }
  if (k == 0) {
    return make_report(x, Flat(Subspace::zero(x.d()), optimal_center(pts, w, z)), z, "exact", 0, true);
  }
  Rng rng = make_rng(seed, 0);
  FlatFit fit = fit_flat_general(pts, w, k, z, rng);
  return make_report(x, Flat(Subspace(orthonormal_rows(fit.basis)), fit.tau), z, "hull-search", 1,
                     fit.converged);
}

// Lines -------------------------------------------------------------------------------

namespace {

// Best single line for the rows of `pts`; `warm` seeds the local search
// for z != 2.
Line fit_line(const Matrix& pts, const Vector& w, double z, const Line* warm) {
  const Eigen::Index d = pts.cols();
  if (d == 1) return Line(Vector::Zero(1), Vector::Ones(1));
  const Vector mean = weighted_mean(pts, w);
  const Matrix centred = pts.rowwise() - mean.transpose();
  Matrix dir = spectral_basis(centred, w, 1);
  if (centred.cwiseAbs().maxCoeff() == 0.0) {
    if (warm) return Line(mean, warm->direction());
    dir = Matrix::Zero(1, d);
    dir(0, 0) = 1.0;
  }
  if (z == 2.0) return Line(mean, dir.row(0).transpose());
  Vector tau = mean;
  Matrix basis = dir;
  if (warm) {
    const double fw = flat_cost(pts, w, warm->direction().transpose(), warm->anchor(), z);
    if (fw < flat_cost(pts, w, basis, tau, z)) {
      basis = warm->direction().transpose();
      tau = warm->anchor();
    }
  }
  FlatFit fit = alternate_flat(pts, w, basis, tau, z, 20);
  return Line(fit.tau, fit.basis.row(0).transpose());
}

LocalResult alternate_lines(const WeightedSet& x, std::size_t k, double z, Rng& rng) {
  const Matrix& pts = x.base().points();
  const Vector& wts = x.weights();
  const Eigen::Index n = pts.rows();
  const Eigen::Index d = pts.cols();
  auto line_through = [&](Eigen::Index a, Eigen::Index b, const Line* fallback) {
    const Vector pa = pts.row(a).transpose();
    const Vector pb = pts.row(b).transpose();
    if ((pa - pb).squaredNorm() > 0.0) return Line::through(pa, pb);
    if (fallback) return Line(pa, fallback->direction());
    Vector e = Vector::Zero(d);
    e(0) = 1.0;
    return Line(pa, e);
  };
  std::uniform_int_distribution<Eigen::Index> any(0, n - 1);
  std::vector<Line> lines;
  {
    const auto a = static_cast<Eigen::Index>(sample_index(wts, wts, rng));
    lines.push_back(line_through(a, any(rng), nullptr));
  }
  while (lines.size() < k) {
    const Vector mass = wts.cwiseProduct(dist_pow(x, LineSet(lines), z));
    const auto a = static_cast<Eigen::Index>(sample_index(mass, wts, rng));
    lines.push_back(line_through(a, any(rng), &lines.back()));
  }
  Solution sol{LineSet(lines)};
  double f = cost_pow(x, sol, z);
  bool converged = false;
  for (int iter = 0; iter < 100; ++iter) {
    const auto assign = assignment(x.base(), sol);
    const Vector residual = dist_pow(x, sol, z);
    const auto& cur = std::get<LineSet>(sol);
    std::vector<std::vector<Eigen::Index>> groups(k);
    for (std::size_t i = 0; i < assign.size(); ++i) {
      if (x.weight(i) > 0.0) groups[assign[i]].push_back(static_cast<Eigen::Index>(i));
    }
    std::vector<Line> next;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (std::size_t j = 0; j < k; ++j) {
      const auto& g = groups[j];
      if (g.empty()) {
        Eigen::Index worst = 0;
        double worst_v = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double v = wts(i) * residual(i);
          if (!used[static_cast<std::size_t>(i)] && v > worst_v) {
            worst_v = v;
            worst = i;
          }
        }
        used[static_cast<std::size_t>(worst)] = true;
        next.emplace_back(pts.row(worst).transpose(), cur[j].direction());
        continue;
      }
      if (g.size() == 1) {
        next.emplace_back(pts.row(g[0]).transpose(), cur[j].direction());
        continue;
      }
      Matrix gp(static_cast<Eigen::Index>(g.size()), d);
      Vector gw(static_cast<Eigen::Index>(g.size()));
      for (std::size_t r = 0; r < g.size(); ++r) {
        gp.row(static_cast<Eigen::Index>(r)) = pts.row(g[r]);
        gw(static_cast<Eigen::Index>(r)) = wts(g[r]);
      }
      next.push_back(fit_line(gp, gw, z, &cur[j]));
    }
    Solution cand{LineSet(std::move(next))};
    const double fc = cost_pow(x, cand, z);
    if (fc < f) {
      const bool small = (f - fc) <= 1e-12 * f;
      sol = std::move(cand);
      f = fc;
      if (small) {
        converged = true;
        break;
      }
    } else {
      converged = true;
      break;
    }
  }
  return {std::move(sol), f, converged};
}

}  // namespace

SolveReport solve_lines(const WeightedSet& x, std::size_t k, double z, std::size_t restarts,
                        std::uint64_t seed) {
  check_z(z);
  if (k < 1) throw InputError("k must be at least 1");
  if (restarts < 1) throw InputError("restarts must be at least 1");
  std::optional<LocalResult> best;
  for (std::size_t r = 0; r < restarts; ++r) {
    Rng rng = make_rng(seed, r);
    auto res = alternate_lines(x, k, z, rng);
    if (!best || res.cost_pow < best->cost_pow) best = std::move(res);
  }
  return make_report(x, std::move(best->solution), z, "heuristic", restarts, best->converged);
}

SolveReport solve_lines_exact(const WeightedSet& x, std::size_t k, double z) {
  check_z(z);
  if (k < 1) throw InputError("k must be at least 1");
  const std::size_t n = x.n();
  if (n > kMaxExactLinePoints) {
    throw InputError("instance too large for the exact line solver (n > " +
                     std::to_string(kMaxExactLinePoints) + "); use the heuristic");
  }
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<double> single(static_cast<std::size_t>(full) + 1, 0.0);
  std::vector<std::optional<Line>> fitted(static_cast<std::size_t>(full) + 1);
  Matrix pts;
  Vector w;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    subset_rows(x, mask, pts, w);
    if (!(w.sum() > 0.0)) {
      Vector e = Vector::Zero(pts.cols());
      e(0) = 1.0;
      fitted[mask] = Line(pts.row(0).transpose(), e);
      continue;
    }
    Line l = [&] {
      if (pts.rows() == 2 && (pts.row(0) - pts.row(1)).squaredNorm() > 0.0) {
        return Line::through(pts.row(0).transpose(), pts.row(1).transpose());
      }
      return fit_line(pts, w, z, nullptr);
    }();
    double f = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      const Vector p = pts.row(i).transpose();
      f += w(i) * pow_z_from_squared((p - project_line(p, l)).squaredNorm(), z);
    }
    single[mask] = f;
    fitted[mask] = std::move(l);
  }
  const auto parts = best_partition(single, n, k);
  std::vector<Line> lines;
  for (auto p : parts) lines.push_back(*fitted[p]);
  return make_report(x, LineSet(std::move(lines)), z, z == 2.0 ? "exact" : "enumeration", 0, true);
}

// Dispatch -----------------------------------------------------------------------------

SolveMethod parse_method(const std::string& name) {
  if (name == "auto") return SolveMethod::kAuto;
  if (name == "exact") return SolveMethod::kExact;
  if (name == "heuristic") return SolveMethod::kHeuristic;
  throw InputError("unknown solver method: " + name);
}

SolveReport solve(Problem problem, const WeightedSet& x, const SolveOptions& o) {
  switch (problem) {
    case Problem::kClustering:
      if (o.method == SolveMethod::kExact ||
          (o.method == SolveMethod::kAuto && x.n() <= 10)) {
        return solve_clustering_exact(x, o.k, o.z);
      }
      return solve_clustering_heuristic(x, o.k, o.z, o.restarts, o.seed);
    case Problem::kSubspace:
      if (o.method == SolveMethod::kExact && o.z != 2.0) {
        throw InputError("exact subspace solver is only available for z = 2");
      }
      return solve_subspace(x, o.k, o.z, o.seed);
    case Problem::kFlat:
      if (o.method == SolveMethod::kExact && o.z != 2.0) {
        throw InputError("exact flat solver is only available for z = 2");
      }
      return solve_flat(x, o.k, o.z, o.seed);
    case Problem::kLines:
      if (o.method == SolveMethod::kExact ||
          (o.method == SolveMethod::kAuto && x.n() <= 8)) {
        return solve_lines_exact(x, o.k, o.z);
      }
      return solve_lines(x, o.k, o.z, o.restarts, o.seed);
  }
  throw InputError("unknown problem");
}

std::string report_csv_header() { return "problem,k,z,method,restarts,converged,cost,cost_pow"; }

std::string report_csv_row(const SolveReport& r, std::size_t k, double z) {
  std::string out(problem_name(problem_of(r.solution)));
  out += ',' + std::to_string(k) + ',' + format_double(z) + ',' + r.method + ',' +
         std::to_string(r.restarts) + ',' + (r.converged ? "1" : "0") + ',' + format_double(r.cost) +
         ',' + format_double(r.cost_pow);
  return out;
}

}  // namespace projclust
