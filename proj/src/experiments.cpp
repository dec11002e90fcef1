#include "projclust/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "projclust/coreset.hpp"
#include "projclust/io.hpp"
#include "projclust/jl.hpp"
#include "projclust/parallel.hpp"
#include "projclust/rng.hpp"
#include "projclust/sensitivity.hpp"

namespace projclust {

std::string_view gen_kind_name(GenKind kind) {
  switch (kind) {
    case GenKind::kGaussianMixture: return "gaussian-mixture";
    case GenKind::kNearLines: return "points-near-k-lines";
    case GenKind::kNearFlat: return "points-near-k-flat";
    case GenKind::kMedoid: return "medoid";
    case GenKind::kCss: return "css";
  }
  return "unknown";
}

GenKind parse_gen_kind(std::string_view name) {
  for (auto k : {GenKind::kGaussianMixture, GenKind::kNearLines, GenKind::kNearFlat,
                 GenKind::kMedoid, GenKind::kCss}) {
    if (gen_kind_name(k) == name) return k;
  }
  throw InputError("unknown instance kind: " + std::string(name));
}

namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, double sd, Rng& rng) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = g(rng);
  }
  return m;
}

Matrix uniform(Eigen::Index rows, Eigen::Index cols, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

std::string sanitise(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  }
  return s;
}

std::string failed(const std::exception& e) { return "failed: " + sanitise(e.what()); }

}  // namespace

Dataset generate(const GenParams& p) {
  if (p.kind == GenKind::kMedoid) return gen_medoid_instance(p.n);
  if (p.kind == GenKind::kCss) return gen_css_instance(p.n);
  if (p.n < 1 || p.d < 1 || p.k < 1) throw InputError("n, d and k must be at least 1");
  if (!(p.noise >= 0.0) || !std::isfinite(p.noise)) throw InputError("noise must be finite and >= 0");
  const auto n = static_cast<Eigen::Index>(p.n);
  const auto d = static_cast<Eigen::Index>(p.d);
  const auto k = static_cast<Eigen::Index>(p.k);
  Rng rng = make_rng(p.seed, 0);
  Matrix pts(n, d);
  switch (p.kind) {
    case GenKind::kGaussianMixture: {
      const Matrix centres = uniform(k, d, -10.0, 10.0, rng);
      for (Eigen::Index i = 0; i < n; ++i) pts.row(i) = centres.row(i % k);
      break;
    }
    case GenKind::kNearLines: {
      const Matrix anchors = uniform(k, d, -10.0, 10.0, rng);
      Matrix dirs = gaussian(k, d, 1.0, rng);
      dirs.rowwise().normalize();
      std::uniform_real_distribution<double> pos(-10.0, 10.0);
      for (Eigen::Index i = 0; i < n; ++i) pts.row(i) = anchors.row(i % k) + pos(rng) * dirs.row(i % k);
      break;
    }
    case GenKind::kNearFlat: {
      if (p.k >= p.d) throw InputError("points-near-k-flat needs k < d");
      const Vector tau = uniform(d, 1, -10.0, 10.0, rng);
      Eigen::HouseholderQR<Matrix> qr(gaussian(d, k, 1.0, rng));
      const Matrix basis = qr.householderQ() * Matrix::Identity(d, k);  // d x k
      const Matrix coords = uniform(n, k, -10.0, 10.0, rng);
      pts = (coords * basis.transpose()).rowwise() + tau.transpose();
      break;
    }
    default:
      break;
  }
  if (p.noise > 0.0) pts += gaussian(n, d, p.noise, rng);
  return Dataset(std::move(pts));
}

TPreset preset_t(Problem problem, std::size_t k, double z, double eps, std::size_t n,
                 std::size_t d, double c) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
  if (!(c > 0.0)) throw InputError("preset constant must be positive");
  if (k < 1) throw InputError("k must be at least 1");
  const double kd = static_cast<double>(k);
  double raw = 0.0;
  std::string f;
  const bool z2 = z == 2.0;
  switch (problem) {
    case Problem::kClustering:
      raw = c * (std::log(kd) + z * std::log(1.0 / eps)) / (eps * eps);
      f = "ceil(c*(ln k + z*ln(1/eps))/eps^2)";
      break;
    case Problem::kSubspace:
    case Problem::kFlat:
      if (z2) {
        const double dim = problem == Problem::kFlat ? kd + 1.0 : kd;
        raw = c * dim / (eps * eps);
        f = problem == Problem::kFlat ? "ceil(c*(k+1)/eps^2)" : "ceil(c*k/eps^2)";
      } else {
        raw = c * z * kd * kd * std::max(std::log(kd / eps), 1.0) / (eps * eps * eps);
        f = "ceil(c*z*k^2*max(ln(k/eps),1)/eps^3)";
      }
      break;
    case Problem::kLines: {
      const double lnln = std::max(0.0, std::log(std::log(std::max<double>(static_cast<double>(n), 3.0))));
      raw = c * (kd * lnln + z + std::log(1.0 / eps)) / (eps * eps * eps);
      f = "ceil(c*(k*ln ln n + z + ln(1/eps))/eps^3)";
      break;
    }
  }
  const double unclamped = std::ceil(raw - 1e-9);
  std::size_t t = static_cast<std::size_t>(std::max(1.0, std::min(unclamped, static_cast<double>(d))));
  std::ostringstream s;
  s << "t = " << f << " with c=" << format_double(c) << " k=" << k << " z=" << format_double(z)
    << " eps=" << format_double(eps);
  if (problem == Problem::kLines) s << " n=" << n;
  s << " -> " << format_double(unclamped);
  if (static_cast<double>(t) != unclamped) s << ", clamped to " << t;
  return {t, s.str()};
}

namespace {

JLMap trial_map(const ExperimentConfig& c, std::size_t d, std::size_t t, std::uint64_t seed,
                std::size_t trial) {
  if (c.identity) {
    if (t != d) throw InputError("identity map requires t = d");
    return JLMap::identity(d);
  }
  return sample_jl(d, t, seed, trial);
}

SolveOptions options_for(const ExperimentConfig& c, std::uint64_t seed) {
  SolveOptions o;
  o.k = c.k;
  o.z = c.z;
  o.method = c.method;
  o.restarts = c.restarts;
  o.seed = seed;
  return o;
}

void check_config(const ExperimentConfig& c, std::size_t d) {
  if (c.trials < 1) throw InputError("trials must be at least 1");
  if (c.k < 1) throw InputError("k must be at least 1");
  if (!(c.z >= 1.0) || !std::isfinite(c.z)) throw InputError("z must be a finite real >= 1");
  for (auto t : c.t_list) {
    if (t < 1 || t > d) throw InputError("every t must satisfy 1 <= t <= d");
  }
}

}  // namespace

std::vector<PreservationRecord> run_preserve(const Dataset& x, const ExperimentConfig& c) {
  check_config(c, x.d());
  if (c.t_list.empty()) throw InputError("preserve needs at least one t");
  const std::size_t per_t = c.trials;
  std::vector<PreservationRecord> out(c.t_list.size() * per_t);
  std::optional<SolveReport> original;
  std::string original_error;
  try {
    original = solve(c.problem, WeightedSet(x), options_for(c, c.seed));
  } catch (const std::exception& e) {
    original_error = failed(e);
  }
  parallel_for(out.size(), [&](std::size_t slot) {
    const std::size_t ti = slot / per_t;
    const std::size_t trial = slot % per_t;
    PreservationRecord& r = out[slot];
    r.t = c.t_list[ti];
    r.trial = trial;
    if (!original) {
      r.status = original_error;
      return;
    }
    r.cost_original = original->cost;
    try {
      const JLMap map = trial_map(c, x.d(), r.t, derive_seed(c.seed, r.t), trial);
      const Dataset px = apply(map, x);
      // Same solver seed as the original solve: only the map varies.
      const SolveReport rep = solve(c.problem, WeightedSet(px), options_for(c, c.seed));
      r.cost_projected = rep.cost;
      r.method = rep.method;
      r.converged = rep.converged;
      if (r.cost_original > 0.0) {
        r.ratio = r.cost_projected / r.cost_original;
      } else {
        r.ratio = r.cost_projected == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
      }
    } catch (const std::exception& e) {
      r.status = failed(e);
    }
  });
  return out;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw InputError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile level must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

void write_preserve_csv(std::ostream& out, const std::vector<PreservationRecord>& records) {
  out << "record,t,trial,cost_original,cost_projected,ratio,method,converged,status,"
         "ratio_median,ratio_p05,ratio_p95\n";
  std::vector<std::size_t> ts;
  std::map<std::size_t, std::vector<double>> ratios;
  for (const auto& r : records) {
    out << "trial," << r.t << ',' << r.trial << ',';
    if (r.status == "ok") {
      out << format_double(r.cost_original) << ',' << format_double(r.cost_projected) << ','
          << format_double(r.ratio) << ',' << r.method << ',' << (r.converged ? 1 : 0);
      ratios[r.t].push_back(r.ratio);
    } else {
      out << ",,,,";
    }
    out << ',' << r.status << ",,,\n";
    if (std::find(ts.begin(), ts.end(), r.t) == ts.end()) ts.push_back(r.t);
  }
  for (auto t : ts) {
    const auto& v = ratios[t];
    out << "summary," << t << ",,,,,,," << (v.empty() ? "failed: no successful trials" : "ok") << ',';
    if (!v.empty()) {
      out << format_double(quantile(v, 0.5)) << ',' << format_double(quantile(v, 0.05)) << ','
          << format_double(quantile(v, 0.95));
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

std::vector<CoresetRecord> run_coreset_quality(const Dataset& x, const ExperimentConfig& c) {
  check_config(c, x.d());
  if (c.m_list.empty()) throw InputError("coreset quality needs at least one m");
  for (auto m : c.m_list) {
    if (m < 1) throw InputError("coreset size m must be at least 1");
  }
  const std::size_t t = c.t_list.empty() ? x.d() : c.t_list.front();
  const SolveReport full = solve(c.problem, WeightedSet(x), options_for(c, c.seed));
  const SensitivityProfile profile =
      c.uniform_profile ? SensitivityProfile::uniform(x.n()) : sensitivity(x, full.solution, c.z);
  std::vector<CoresetRecord> out(c.m_list.size() * c.trials);
  parallel_for(out.size(), [&](std::size_t slot) {
    CoresetRecord& r = out[slot];
    r.m = c.m_list[slot / c.trials];
    r.trial = slot % c.trials;
    r.cost_full = full.cost;
    try {
      const std::uint64_t seed = derive_seed(c.seed, r.m);
      const Coreset cs = sensitivity_sample(profile, r.m, seed, r.trial);
      const WeightedSet s = cs.materialise(x);
      const SolveReport on_s = solve(c.problem, s, options_for(c, derive_seed(seed, r.trial)));
      r.cost_coreset = on_s.cost;
      r.ratio_before_projection = full.cost > 0.0 ? on_s.cost / full.cost : 1.0;

      const JLMap map = (c.t_list.empty() && !c.identity)
                            ? JLMap::identity(x.d())
                            : trial_map(c, x.d(), t, derive_seed(seed, t), r.trial);
      const Dataset px = apply(map, x);
      const SolveReport on_px =
          solve(c.problem, WeightedSet(px), options_for(c, derive_seed(seed ^ 0x5bd1e995u, r.trial)));
      const WeightedSet ps(apply(map, s.base()), s.weights());
      const double num = cost(ps, on_px.solution, c.z);
      const double den = on_px.cost;
      r.ratio_after_projection = den > 0.0 ? num / den : (num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    } catch (const std::exception& e) {
      r.status = failed(e);
    }
  });
  return out;
}

void write_coreset_quality_csv(std::ostream& out, const std::vector<CoresetRecord>& records) {
  out << "m,trial,cost_full,cost_coreset,ratio_before_projection,ratio_after_projection,status\n";
  for (const auto& r : records) {
    out << r.m << ',' << r.trial << ',';
    if (r.status == "ok") {
      out << format_double(r.cost_full) << ',' << format_double(r.cost_coreset) << ','
          << format_double(r.ratio_before_projection) << ',' << format_double(r.ratio_after_projection);
    } else {
      out << format_double(r.cost_full) << ",,,";
    }
    out << ',' << r.status << '\n';
  }
}

std::vector<RatioReport> run_counterexamples(Counterexample which, std::size_t n,
                                             const std::vector<std::size_t>& t_list,
                                             std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw InputError("trials must be at least 1");
  if (t_list.empty()) throw InputError("counterexample needs at least one t");
  std::vector<RatioReport> out(t_list.size() * trials);
  parallel_for(out.size(), [&](std::size_t slot) {
    out[slot] = counterexample_trial(which, n, t_list[slot / trials], seed + slot % trials);
  });
  return out;
}

void write_counterexample_csv(std::ostream& out, const std::vector<RatioReport>& reports) {
  out << ratio_csv_header() << '\n';
  for (const auto& r : reports) out << ratio_csv_row(r) << '\n';
}

double counterexample_threshold(Counterexample which) {
  return which == Counterexample::kMedoid ? 1.5 : 1.25;
}

double exceedance_frequency(const std::vector<RatioReport>& reports, double threshold) {
  if (reports.empty()) return 0.0;
  const auto hits = std::count_if(reports.begin(), reports.end(),
                                  [&](const RatioReport& r) { return r.ratio >= threshold; });
  return static_cast<double>(hits) / static_cast<double>(reports.size());
}

void write_ratio_svg(std::ostream& out, const std::vector<std::pair<double, double>>& points,
                     const std::string& title) {
  constexpr double kW = 640, kH = 400, kL = 70, kR = 20, kT = 40, kB = 50;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) {
    if (std::isfinite(p.first) && std::isfinite(p.second)) pts.push_back(p);
  }
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!pts.empty()) {
    x0 = x1 = pts.front().first;
    y0 = y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 == x0) { x0 -= 1; x1 += 1; }
  if (y1 == y0) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto sx = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto sy = [&](double y) { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  auto esc = [](const std::string& s) {
    std::string r;
    for (char ch : s) {
      if (ch == '<') r += "&lt;";
      else if (ch == '>') r += "&gt;";
      else if (ch == '&') r += "&amp;";
      else r += ch;
    }
    return r;
  };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\">" << esc(title) << "</text>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kH - kB << "\" x2=\"" << kW - kR << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL << "\" y2=\"" << kH - kB
      << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << kL << "\" y=\"" << kH - kB + 18 << "\" text-anchor=\"middle\">" << num(x0) << "</text>\n";
  out << "<text x=\"" << kW - kR << "\" y=\"" << kH - kB + 18 << "\" text-anchor=\"middle\">" << num(x1) << "</text>\n";
  out << "<text x=\"" << (kL + kW - kR) / 2 << "\" y=\"" << kH - 12 << "\" text-anchor=\"middle\">t</text>\n";
  out << "<text x=\"" << kL - 6 << "\" y=\"" << sy(y0) << "\" text-anchor=\"end\">" << num(y0) << "</text>\n";
  out << "<text x=\"" << kL - 6 << "\" y=\"" << sy(y1) + 10 << "\" text-anchor=\"end\">" << num(y1) << "</text>\n";
  out << "<text x=\"16\" y=\"" << (kT + kH - kB) / 2 << "\" transform=\"rotate(-90 16 " << (kT + kH - kB) / 2
      << ")\" text-anchor=\"middle\">ratio</text>\n";
  if (y0 < 1.0 && y1 > 1.0) {
    out << "<line x1=\"" << kL << "\" y1=\"" << sy(1.0) << "\" x2=\"" << kW - kR << "\" y2=\"" << sy(1.0)
        << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& [x, y] : pts) {
    out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\"#1f77b4\" fill-opacity=\"0.6\"/>\n";
  }
  std::map<double, std::vector<double>> by_x;
  for (const auto& [x, y] : pts) by_x[x].push_back(y);
  if (!by_x.empty()) {
    out << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (const auto& [x, ys] : by_x) {
      if (!first) out << ' ';
      out << sx(x) << ',' << sy(quantile(ys, 0.5));
      first = false;
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace projclust
