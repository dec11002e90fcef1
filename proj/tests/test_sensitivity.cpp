#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "projclust/coreset.hpp"
#include "projclust/sensitivity.hpp"
#include "projclust/solvers.hpp"

using namespace projclust;

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
  Matrix m(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(r.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : r) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

// Number of (candidate, point) pairs with sigma(x) < cost(x, C') / cost(X, C').
std::size_t violations(const Dataset& x, const SensitivityProfile& prof, Problem p, std::size_t k,
                       double z, int candidates, oracle::Rng& rng) {
  std::size_t bad = 0;
  for (int c = 0; c < candidates; ++c) {
    const Solution cand = oracle::random_solution(p, k, x.points(), rng);
    const Vector pc = point_costs(x, cand, z);
    const double total = pc.sum();
    if (total <= 0.0) continue;
    for (Eigen::Index i = 0; i < pc.size(); ++i) {
      if (prof.sigma()(i) * (1 + 1e-9) < pc(i) / total) ++bad;
    }
  }
  return bad;
}

}  // namespace

TEST(Profile, DistributionAndValidation) {
  SensitivityProfile p(Eigen::Vector3d(1, 2, 5));
  EXPECT_DOUBLE_EQ(p.total(), 8.0);
  EXPECT_NEAR(p.distribution().sum(), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(p.distribution()(2), 5.0 / 8.0);
  EXPECT_THROW(SensitivityProfile(Eigen::Vector2d(1, 0)), InputError);
  EXPECT_THROW(SensitivityProfile(Vector(0)), InputError);
  std::ostringstream s;
  write_profile_csv(s, p);
  EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "index,sigma,sigma_tilde");
}

TEST(ClusteringSensitivity, TotalIdentity) {
  oracle::Rng rng(1);
  for (double z : {1.0, 2.0, 3.0}) {
    const Dataset x(oracle::gaussian(30, 3, rng));
    const CenterSet c(oracle::gaussian(2, 3, rng));
    const auto a = assignment(x, c);
    std::size_t used = 0;
    for (std::size_t j = 0; j < 2; ++j) used += std::count(a.begin(), a.end(), j) > 0;
    const auto prof = clustering_sensitivity(x, c, z);
    EXPECT_NEAR(prof.total(), std::pow(2, z - 1) + std::pow(2, 2 * z - 1) * static_cast<double>(used), 1e-9);
  }
  // z = 1, two non-empty clusters: 1 + 2 * 2.
  const Dataset x(rows({{0}, {1}, {10}, {12}}));
  EXPECT_NEAR(clustering_sensitivity(x, CenterSet(rows({{0.5}, {11}})), 1.0).total(), 5.0, 1e-12);
}

TEST(ClusteringSensitivity, EmptyClustersAreDropped) {
  const Dataset x(rows({{0}, {1}, {2}}));
  const auto prof = clustering_sensitivity(x, CenterSet(rows({{1}, {100}})), 2.0);
  EXPECT_NEAR(prof.total(), 2.0 + 8.0, 1e-12);
}

TEST(ClusteringSensitivity, ZeroCost) {
  const Dataset x(rows({{1, 1}, {1, 1}}));
  const auto prof = clustering_sensitivity(x, CenterSet(rows({{1, 1}})), 2.0);
  EXPECT_NEAR(prof.sigma()(0), 4.0, 1e-12);
  EXPECT_NEAR(prof.total(), 8.0, 1e-12);
}

TEST(ClusteringSensitivity, AuditAgainstRandomCenters) {
  oracle::Rng rng(2);
  const Dataset x(oracle::gaussian(10, 2, rng));
  const auto best = solve_clustering_exact(WeightedSet(x), 2, 2.0);
  const auto prof = clustering_sensitivity(x, std::get<CenterSet>(best.solution), 2.0);
  EXPECT_EQ(violations(x, prof, Problem::kClustering, 2, 2.0, 1000, rng), 0u);
}

TEST(SupRatio, ClosedForms) {
  EXPECT_NEAR(sup_ratio(Dataset(Matrix::Identity(3, 3)), 1, 2.0), 1.0, 1e-12);
  EXPECT_NEAR(sup_ratio(Dataset(Matrix::Identity(3, 3)), 1, 1.0), 1.0, 1e-9);
  for (double z : {1.0, 1.5, 2.0, 3.0}) {
    EXPECT_NEAR(sup_ratio(Dataset(Matrix::Constant(4, 2, 0.7)), 0, z), 0.25, 1e-9) << z;
  }
  const Matrix y = rows({{1, 0}, {0, 1}, {1, 1}});
  EXPECT_NEAR(sup_ratio(Dataset(y), 2, 2.0), oracle::leverage(y, 2), 1e-12);
  EXPECT_NEAR(sup_ratio(Dataset(y), 2, 2.0), 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(oracle::sup_ratio_grid(y, 2, 2.0, 1000000), 2.0 / 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(sup_ratio(Dataset(rows({{0, 0}, {1, 0}})), 0, 2.0), 0.0);
}

TEST(SupRatio, GeneralZMatchesAngularGrid) {
  oracle::Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix y = oracle::gaussian(7, 2, rng);
    for (double z : {1.0, 1.5, 3.0}) {
      const Vector all = sup_ratios(y, z);
      for (std::size_t i = 0; i < 7; ++i) {
        const double grid = oracle::sup_ratio_grid(y, i, z, 20000);
        EXPECT_GE(all(static_cast<Eigen::Index>(i)), grid * (1 - 1e-9));
        EXPECT_LE(all(static_cast<Eigen::Index>(i)), grid * 1.02);
      }
    }
  }
}

TEST(SupRatio, InvariantUnderInvertibleMaps) {
  oracle::Rng rng(4);
  const Matrix y = oracle::gaussian(9, 3, rng);
  const Matrix a = oracle::gaussian(3, 3, rng) + 3 * Matrix::Identity(3, 3);
  for (double z : {1.0, 2.0, 2.5}) {
    const Vector before = sup_ratios(y, z);
    const Vector after = sup_ratios(y * a.transpose(), z);
    EXPECT_LT((before - after).cwiseAbs().maxCoeff(), 1e-6) << z;
  }
}

TEST(SubspaceSensitivity, Examples) {
  const auto full = subspace_sensitivity(Dataset(Matrix::Identity(2, 2)), Subspace(Matrix::Identity(2, 2)), 2.0);
  EXPECT_NEAR(full.sigma()(0), 8.0, 1e-12);
  EXPECT_NEAR(full.sigma()(1), 8.0, 1e-12);
  const auto dup = subspace_sensitivity(Dataset(rows({{1, 0}, {1, 0}})), Subspace(rows({{1, 0}})), 2.0);
  EXPECT_NEAR(dup.sigma()(0), 8.0 * 0.5, 1e-12);
}

TEST(SubspaceSensitivity, SupTermIsProjectedLeverage) {
  oracle::Rng rng(5);
  const Dataset x(oracle::gaussian(8, 3, rng));
  const Subspace r(oracle::orthonormal_rows(1, 3, rng));
  const auto prof = subspace_sensitivity(x, r, 2.0);
  const double cost = cost_pow(x, r, 2.0);
  const Matrix proj = x.points() * r.basis().transpose() * r.basis();
  for (std::size_t i = 0; i < 8; ++i) {
    const double first = 2.0 * (x.point(i) - proj.row(static_cast<Eigen::Index>(i)).transpose()).squaredNorm() / cost;
    const double sup = (prof.sigma()(static_cast<Eigen::Index>(i)) - first) / 8.0;
    EXPECT_NEAR(sup, oracle::leverage(proj, i), 1e-9);
    const Matrix coords = x.points() * r.basis().transpose();
    EXPECT_NEAR(sup, std::pow(coords(static_cast<Eigen::Index>(i), 0), 2) / coords.squaredNorm(), 1e-9);
  }
}

TEST(SubspaceSensitivity, AuditAgainstRandomSubspaces) {
  oracle::Rng rng(6);
  for (double z : {1.0, 2.0}) {
    const Dataset x(oracle::gaussian(15, 3, rng));
    const auto best = solve_subspace(WeightedSet(x), 1, z, 1);
    const auto prof = subspace_sensitivity(x, std::get<Subspace>(best.solution), z);
    EXPECT_EQ(violations(x, prof, Problem::kSubspace, 1, z, 1000, rng), 0u) << z;
  }
}

TEST(FlatSensitivity, ZeroCostAndTranslationInvariance) {
  oracle::Rng rng(7);
  // Axis-aligned so the residuals are exactly zero.
  const Matrix b = Eigen::RowVector3d(1, 0, 0);
  const Vector tau = Eigen::Vector3d(0, 1, -2);
  Matrix on(6, 3);
  for (Eigen::Index i = 0; i < 6; ++i) on.row(i) << static_cast<double>(i) - 2.0, 1, -2;
  const Flat f(Subspace(b), tau);
  const auto prof = flat_sensitivity(Dataset(on), f, 2.0);
  EXPECT_TRUE((prof.sigma().array() > 0).all());
  // Lifted points span 2 dimensions: total of sup terms is the rank.
  EXPECT_NEAR(prof.total(), 8.0 * 2.0, 1e-9);

  const Dataset x(oracle::gaussian(10, 3, rng));
  const Vector v = oracle::gaussian(3, 1, rng).col(0);
  const Dataset shifted(x.points().rowwise() + v.transpose());
  for (double z : {1.0, 2.0}) {
    const auto a = flat_sensitivity(x, f, z);
    const auto s = flat_sensitivity(shifted, Flat(Subspace(b), tau + v), z);
    EXPECT_LT((a.sigma() - s.sigma()).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(FlatSensitivity, AuditAgainstRandomFlats) {
  oracle::Rng rng(8);
  for (double z : {1.0, 2.0}) {
    const Dataset x(oracle::gaussian(15, 3, rng));
    const auto best = solve_flat(WeightedSet(x), 1, z, 1);
    const auto prof = flat_sensitivity(x, std::get<Flat>(best.solution), z);
    EXPECT_EQ(violations(x, prof, Problem::kFlat, 1, z, 1000, rng), 0u) << z;
  }
}

TEST(LineSensitivity, ZeroCostDecreasesWithLayer) {
  Matrix pts(10, 2);
  for (Eigen::Index i = 0; i < 10; ++i) pts.row(i) << static_cast<double>(i), 0.0;
  const LineSet l({Line(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0))});
  const auto prof = line_sensitivity(Dataset(pts), l, 2.0);
  // Layers are the extreme pairs: {0,9}, {1,8}, ...
  EXPECT_NEAR(prof.sigma()(0), 8.0 * 3.0 / 1.0, 1e-12);
  EXPECT_NEAR(prof.sigma()(1), 8.0 * 3.0 / 2.0, 1e-12);
  EXPECT_NEAR(prof.sigma()(4), 8.0 * 3.0 / 5.0, 1e-12);
  EXPECT_NEAR(prof.sigma()(4), prof.sigma()(5), 1e-12);
}

TEST(LineSensitivity, SinglePoint) {
  const LineSet l({Line(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0))});
  for (double z : {1.0, 2.0, 3.0}) {
    const auto prof = line_sensitivity(Dataset(rows({{2, 1}})), l, z);
    EXPECT_NEAR(prof.sigma()(0), std::pow(2, z - 1) + std::pow(2, 2 * z - 1) * 3, 1e-9);
  }
}

TEST(LineSensitivity, RejectsBadPeeling) {
  const LineSet l({Line(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0))});
  const Dataset x(rows({{0, 1}, {1, 1}, {2, 1}}));
  EXPECT_THROW(line_sensitivity(x, l, 2.0, PeelingPartition{{{0, 1}}}), InputError);
  EXPECT_THROW(line_sensitivity(x, l, 2.0, PeelingPartition{{{0, 1}, {1, 2}}}), InputError);
  EXPECT_NO_THROW(line_sensitivity(x, l, 2.0, PeelingPartition{{{0, 2}, {1}}}));
}

TEST(LineSensitivity, AuditAgainstRandomLines) {
  oracle::Rng rng(9);
  auto [pts, label] = oracle::points_on_lines(12, 2, 2, rng);
  pts += oracle::gaussian(12, 2, rng, 0.1);
  const Dataset x(pts);
  const auto best = solve_lines(WeightedSet(x), 2, 2.0, 10, 1);
  const auto prof = line_sensitivity(x, std::get<LineSet>(best.solution), 2.0);
  EXPECT_EQ(violations(x, prof, Problem::kLines, 2, 2.0, 1000, rng), 0u);
}

TEST(EventE4, IdentityGivesTotalSensitivity) {
  oracle::Rng rng(10);
  const Dataset x(oracle::gaussian(20, 5, rng));
  Matrix c = oracle::gaussian(2, 5, rng);
  c.row(0) = x.points().row(0);  // one point with zero residual
  const CenterSet cs(c);
  const auto prof = clustering_sensitivity(x, cs, 2.0);
  EXPECT_NEAR(event_e4_statistic(x, cs, JLMap::identity(5), 2.0, prof), prof.total(), 1e-9);
  EXPECT_DOUBLE_EQ(event_e4_threshold(3, 2.0), 1600.0);
}

TEST(EventE4, LargeTargetDimensionConcentrates) {
  oracle::Rng rng(11);
  const Dataset x(oracle::gaussian(20, 30, rng));
  const CenterSet cs(oracle::gaussian(2, 30, rng));
  const auto prof = clustering_sensitivity(x, cs, 2.0);
  const double s = event_e4_statistic(x, cs, sample_jl(30, 10000, 1), 2.0, prof);
  EXPECT_NEAR(s / prof.total(), 1.0, 0.1);
}
