// projclust: instance generation, projection, solving, coreset quality,
// preservation sweeps and counterexample trials. CSV on stdout or --out.

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "projclust/coreset.hpp"
#include "projclust/counterexamples.hpp"
#include "projclust/experiments.hpp"
#include "projclust/io.hpp"
#include "projclust/jl.hpp"
#include "projclust/rng.hpp"
#include "projclust/sensitivity.hpp"
#include "projclust/solvers.hpp"

namespace pc = projclust;

namespace {

struct Args {
  std::string problem = "clustering";
  std::string in;
  std::string out;
  std::string plot;
  std::string kind;
  std::string which = "medoid";
  std::string method = "auto";
  std::string profile = "sensitivity";
  std::string profile_out;
  std::string coreset_out;
  std::size_t n = 100;
  std::size_t d = 10;
  std::size_t k = 2;
  double z = 2.0;
  double noise = 1.0;
  std::vector<std::size_t> t_list;
  std::optional<double> eps;
  double t_constant = 1.0;
  std::vector<std::size_t> m_list{100};
  std::size_t trials = 10;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  bool identity = false;
};

// Output goes to --out when given, otherwise stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw pc::InputError("cannot open output file: " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw pc::InputError("cannot open output file: " + path);
  body(f);
}

pc::GenKind default_kind(pc::Problem p) {
  switch (p) {
    case pc::Problem::kClustering: return pc::GenKind::kGaussianMixture;
    case pc::Problem::kLines: return pc::GenKind::kNearLines;
    default: return pc::GenKind::kNearFlat;
  }
}

pc::Dataset load_or_generate(const Args& a, pc::Problem p) {
  if (!a.in.empty()) return pc::read_dataset_file(a.in);
  pc::GenParams g;
  g.kind = a.kind.empty() ? default_kind(p) : pc::parse_gen_kind(a.kind);
  g.n = a.n;
  g.d = a.d;
  g.k = a.k;
  g.noise = a.noise;
  g.seed = a.seed;
  return pc::generate(g);
}

// Explicit t values win; otherwise --eps selects the preset, whose
// formula is reported on stderr.
std::vector<std::size_t> resolve_t(const Args& a, pc::Problem p, std::size_t n, std::size_t d,
                                   bool required) {
  if (a.identity) return {d};
  if (!a.t_list.empty()) return a.t_list;
  if (a.eps) {
    const auto preset = pc::preset_t(p, a.k, a.z, *a.eps, n, d, a.t_constant);
    std::cerr << "preset " << preset.formula << '\n';
    return {preset.t};
  }
  if (required) throw pc::InputError("give --t/--t-list or --eps");
  return {};
}

pc::ExperimentConfig config_from(const Args& a, pc::Problem p) {
  pc::ExperimentConfig c;
  c.problem = p;
  c.k = a.k;
  c.z = a.z;
  c.trials = a.trials;
  c.seed = a.seed;
  c.method = pc::parse_method(a.method);
  c.restarts = a.restarts;
  c.m_list = a.m_list;
  c.identity = a.identity;
  if (a.profile == "uniform") {
    c.uniform_profile = true;
  } else if (a.profile != "sensitivity") {
    throw pc::InputError("--profile must be sensitivity or uniform");
  }
  return c;
}

void add_instance_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--in", a.in, "Input dataset file (otherwise an instance is generated)");
  cmd->add_option("--kind", a.kind,
                  "Generated instance: gaussian-mixture, points-near-k-lines, points-near-k-flat, "
                  "medoid, css");
  cmd->add_option("--n", a.n, "Number of generated points");
  cmd->add_option("--d", a.d, "Ambient dimension of generated points");
  cmd->add_option("--noise", a.noise, "Noise standard deviation of generated points");
}

void add_problem_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--problem", a.problem, "clustering, subspace, flat or lines");
  cmd->add_option("--k", a.k, "Number of centres / subspace dimension / number of lines");
  cmd->add_option("--z", a.z, "Exponent z >= 1");
  cmd->add_option("--method", a.method, "Solver: auto, exact or heuristic");
  cmd->add_option("--restarts", a.restarts, "Restarts for the heuristic solvers");
}

void add_t_options(CLI::App* cmd, Args& a) {
  cmd->add_option("--t,--t-list", a.t_list, "Target dimension(s), comma separated")->delimiter(',');
  cmd->add_option("--eps", a.eps, "Accuracy for the preset target dimension");
  cmd->add_option("--t-constant", a.t_constant, "Constant multiplying the preset formula");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random projections for projective clustering"};
  app.require_subcommand(1);
  Args a;

  auto* gen = app.add_subcommand("gen", "Write a synthetic instance");
  add_instance_options(gen, a);
  gen->add_option("--k", a.k, "Number of clusters, lines or the flat dimension");
  gen->add_option("--seed", a.seed, "Random seed");
  gen->add_option("--out", a.out, "Output dataset file");

  auto* project = app.add_subcommand("project", "Apply a Gaussian map to a dataset");
  project->add_option("--in", a.in, "Input dataset file")->required();
  project->add_option("--t", a.t_list, "Target dimension")->expected(1);
  project->add_option("--seed", a.seed, "Random seed");
  project->add_flag("--identity", a.identity, "Use the identity map (debugging)");
  project->add_option("--out", a.out, "Output dataset file");

  auto* solve = app.add_subcommand("solve", "Solve an instance and report the cost");
  add_instance_options(solve, a);
  add_problem_options(solve, a);
  solve->add_option("--seed", a.seed, "Random seed");
  solve->add_option("--out", a.out, "Output CSV");

  auto* coreset = app.add_subcommand("coreset", "Coreset quality before and after projection");
  add_instance_options(coreset, a);
  add_problem_options(coreset, a);
  add_t_options(coreset, a);
  coreset->add_option("--m", a.m_list, "Coreset size(s), comma separated")->delimiter(',');
  coreset->add_option("--trials", a.trials, "Trials per coreset size");
  coreset->add_option("--seed", a.seed, "Random seed");
  coreset->add_option("--profile", a.profile, "Sampling profile: sensitivity or uniform");
  coreset->add_option("--profile-out", a.profile_out, "Write the sampling profile CSV");
  coreset->add_option("--coreset-out", a.coreset_out, "Write the first drawn coreset CSV");
  coreset->add_flag("--identity", a.identity, "Use the identity map (debugging)");
  coreset->add_option("--out", a.out, "Output CSV");

  auto* preserve = app.add_subcommand("preserve", "Optimal cost before and after projection");
  add_instance_options(preserve, a);
  add_problem_options(preserve, a);
  add_t_options(preserve, a);
  preserve->add_option("--trials", a.trials, "Trials per target dimension");
  preserve->add_option("--seed", a.seed, "Random seed");
  preserve->add_flag("--identity", a.identity, "Use the identity map (debugging)");
  preserve->add_option("--out", a.out, "Output CSV");
  preserve->add_option("--plot", a.plot, "Also write an SVG of ratio against t");

  auto* counter = app.add_subcommand("counterexample", "Medoid and column-subset-selection trials");
  counter->add_option("--which", a.which, "medoid or css");
  counter->add_option("--n", a.n, "Instance size");
  counter->add_option("--t,--t-list", a.t_list, "Target dimension(s), comma separated")
      ->delimiter(',');
  counter->add_option("--trials", a.trials, "Number of seeds");
  counter->add_option("--seed", a.seed, "First seed");
  counter->add_option("--out", a.out, "Output CSV");
  counter->add_option("--plot", a.plot, "Also write an SVG of ratio against t");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      pc::GenParams g;
      g.kind = a.kind.empty() ? pc::GenKind::kGaussianMixture : pc::parse_gen_kind(a.kind);
      g.n = a.n;
      g.d = a.d;
      g.k = a.k;
      g.noise = a.noise;
      g.seed = a.seed;
      Sink sink(a.out);
      pc::write_dataset(sink.stream(), pc::generate(g));
    } else if (project->parsed()) {
      const pc::Dataset x = pc::read_dataset_file(a.in);
      if (!a.identity && a.t_list.empty()) throw pc::InputError("project needs --t");
      const pc::JLMap map = a.identity ? pc::JLMap::identity(x.d()) : pc::sample_jl(x.d(), a.t_list.front(), a.seed);
      Sink sink(a.out);
      pc::write_dataset(sink.stream(), pc::apply(map, x));
    } else if (solve->parsed()) {
      const pc::Problem p = pc::parse_problem(a.problem);
      const pc::Dataset x = load_or_generate(a, p);
      pc::SolveOptions o;
      o.k = a.k;
      o.z = a.z;
      o.method = pc::parse_method(a.method);
      o.restarts = a.restarts;
      o.seed = a.seed;
      const auto report = pc::solve(p, pc::WeightedSet(x), o);
      Sink sink(a.out);
      sink.stream() << pc::report_csv_header() << '\n' << pc::report_csv_row(report, a.k, a.z) << '\n';
    } else if (coreset->parsed()) {
      const pc::Problem p = pc::parse_problem(a.problem);
      const pc::Dataset x = load_or_generate(a, p);
      pc::ExperimentConfig c = config_from(a, p);
      c.t_list = resolve_t(a, p, x.n(), x.d(), false);
      if (!a.profile_out.empty() || !a.coreset_out.empty()) {
        pc::SolveOptions o;
        o.k = c.k;
        o.z = c.z;
        o.method = c.method;
        o.restarts = c.restarts;
        o.seed = c.seed;
        const auto full = pc::solve(p, pc::WeightedSet(x), o);
        const auto profile = c.uniform_profile ? pc::SensitivityProfile::uniform(x.n())
                                               : pc::sensitivity(x, full.solution, c.z);
        if (!a.profile_out.empty()) {
          write_file(a.profile_out, [&](std::ostream& f) { pc::write_profile_csv(f, profile); });
        }
        if (!a.coreset_out.empty()) {
          const std::size_t m = c.m_list.front();
          const auto cs = pc::sensitivity_sample(profile, m, pc::derive_seed(c.seed, m), 0);
          write_file(a.coreset_out, [&](std::ostream& f) { pc::write_coreset_csv(f, cs); });
        }
      }
      const auto records = pc::run_coreset_quality(x, c);
      Sink sink(a.out);
      pc::write_coreset_quality_csv(sink.stream(), records);
    } else if (preserve->parsed()) {
      const pc::Problem p = pc::parse_problem(a.problem);
      const pc::Dataset x = load_or_generate(a, p);
      pc::ExperimentConfig c = config_from(a, p);
      c.t_list = resolve_t(a, p, x.n(), x.d(), true);
      const auto records = pc::run_preserve(x, c);
      {
        Sink sink(a.out);
        pc::write_preserve_csv(sink.stream(), records);
      }
      if (!a.plot.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : records) {
          if (r.status == "ok") pts.emplace_back(static_cast<double>(r.t), r.ratio);
        }
        write_file(a.plot, [&](std::ostream& f) {
          pc::write_ratio_svg(f, pts, std::string(pc::problem_name(p)) + ": projected / original optimum");
        });
      }
    } else if (counter->parsed()) {
      const auto which = pc::parse_counterexample(a.which);
      const std::vector<std::size_t> ts = a.t_list.empty() ? std::vector<std::size_t>{3} : a.t_list;
      const auto reports = pc::run_counterexamples(which, a.n, ts, a.trials, a.seed);
      {
        Sink sink(a.out);
        pc::write_counterexample_csv(sink.stream(), reports);
      }
      const double threshold = pc::counterexample_threshold(which);
      std::cerr << "ratio >= " << pc::format_double(threshold) << " in "
                << pc::format_double(pc::exceedance_frequency(reports, threshold)) << " of trials\n";
      if (!a.plot.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : reports) pts.emplace_back(static_cast<double>(r.t), r.ratio);
        write_file(a.plot, [&](std::ostream& f) {
          pc::write_ratio_svg(f, pts, std::string(pc::counterexample_name(which)) + ": original / projected optimum");
        });
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
