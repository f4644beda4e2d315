#include "shapelift/cli.hpp"

#include <algorithm>
#include <iomanip>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "shapelift/filaments.hpp"
#include "shapelift/frechet.hpp"
#include "shapelift/io.hpp"
#include "shapelift/shape_spaces.hpp"
#include "shapelift/simulation.hpp"
#include "shapelift/two_sample.hpp"

namespace shapelift::cli {

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    case ErrorCode::MalformedData:
    case ErrorCode::Io:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DegenerateConfiguration:
    case ErrorCode::EmptySample:
    case ErrorCode::TooFewPoints:
      return kExitData;
    case ErrorCode::AntipodalPoint:
    case ErrorCode::SingularCovariance:
    case ErrorCode::UnreachableDistance:
    case ErrorCode::DegenerateChord:
      return kExitNumerical;
  }
  return kExitNumerical;
}

namespace {

// Writes to `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text(path, text);
  }
}

std::vector<PreShape> load_preshapes(const std::string& path) {
  std::vector<PreShape> out;
  for (const auto& c : io::read_samples(path)) {
    try {
      out.push_back(to_preshape(c));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedData, path + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::MalformedData, path + ": no samples");
  return out;
}

PreShape load_preshape(const std::string& path) {
  try {
    return to_preshape(io::read_configuration(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateConfiguration) {
      throw Error(ErrorCode::MalformedData, path + ": " + e.what());
    }
    throw;
  }
}

struct Common {
  std::string kind = "rr";
  unsigned threads = 0;
  bool strict = false;
};

struct DistanceArgs {
  std::string a, b;
};
struct MeanArgs {
  std::string samples, output, result;
  double tol = 1e-9;
  int max_iter = 200;
};
struct TestArgs {
  std::string w, z, output;
  std::vector<std::string> variants;
  double alpha = 0.05;
  int resamples = 1000;
  std::uint64_t seed = 0;
  bool quantile = false;
};
struct SimulateArgs {
  std::string config, table = "study.csv", curve, summary;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates, resamples;
  std::optional<double> sd, alpha;
  std::vector<double> separations;
  std::vector<int> sizes;
  std::vector<std::string> variants;
};
struct LandmarkArgs {
  std::string input, output, audit;
  std::optional<double> step;
  double max_shift = 0.15;
};
struct HopfArgs {
  std::string samples, output;
  bool fold = false;
};

int cmd_distance(const DistanceArgs& a, ShapeSpaceKind kind, std::ostream& out) {
  const PreShape p = load_preshape(a.a);
  const PreShape q = load_preshape(a.b);
  if (p.dim() != q.dim() || p.landmarks() != q.landmarks()) {
    throw Error(ErrorCode::MalformedData, "configurations differ in size");
  }
  out << std::fixed << std::setprecision(12) << shape_distance(p, q, kind) << '\n';
  return kExitOk;
}

int cmd_mean(const MeanArgs& a, ShapeSpaceKind kind, std::ostream& out) {
  const auto samples = load_preshapes(a.samples);
  MeanOptions opts;
  opts.tol = a.tol;
  opts.max_iter = a.max_iter;
  const MeanResult r = frechet_mean(samples, kind, opts);
  if (!a.output.empty()) io::write_configuration(a.output, Configuration(r.mean.entries()));
  nlohmann::json j = io::to_json(r);
  j["kind"] = std::string(to_string(kind));
  j["samples"] = samples.size();
  emit(a.result, j.dump(2) + "\n", out);
  return r.converged ? kExitOk : kExitNumerical;
}

int cmd_test(const TestArgs& a, ShapeSpaceKind kind, std::ostream& out) {
  const auto w = load_preshapes(a.w);
  const auto z = load_preshapes(a.z);
  TwoSampleRequest req;
  req.kind = kind;
  req.alpha = a.alpha;
  req.bootstrap = !a.quantile;
  req.resamples = a.resamples;
  req.seed = a.seed;
  if (!a.variants.empty()) {
    req.variants.clear();
    for (const auto& v : a.variants) req.variants.push_back(parse_test_variant(v));
  }
  nlohmann::json results = nlohmann::json::array();
  int code = kExitOk;
  for (const VariantResult& r : run_two_sample_tests(w, z, req)) {
    if (r.outcome) {
      results.push_back(io::to_json(*r.outcome));
    } else {
      results.push_back({{"variant", std::string(to_string(r.variant))},
                         {"error", std::string(to_string(r.failure->code()))},
                         {"message", r.failure->what()}});
      code = std::max(code, exit_code_for(r.failure->code()));
    }
  }
  nlohmann::json j{{"kind", std::string(to_string(kind))},
                   {"n", w.size()},
                   {"m", z.size()},
                   {"alpha", a.alpha},
                   {"results", results}};
  if (!a.quantile) {
    j["resamples"] = a.resamples;
    j["seed"] = a.seed;
  }
  emit(a.output, j.dump(2) + "\n", out);
  return code;
}

int cmd_simulate(const SimulateArgs& a, const Common& common, std::optional<ShapeSpaceKind> kind,
                 std::ostream& out) {
  StudyConfig cfg;
  if (!a.config.empty()) {
    try {
      cfg = study_config_from_json(nlohmann::json::parse(io::read_text(a.config)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedData, a.config + ": " + e.what());
    }
  }
  if (kind) cfg.kind = *kind;
  if (a.seed) cfg.seed = *a.seed;
  if (a.replicates) cfg.replicates = *a.replicates;
  if (a.resamples) cfg.bootstrap_B = *a.resamples;
  if (a.sd) cfg.noise_sd = *a.sd;
  if (a.alpha) cfg.alpha = *a.alpha;
  if (!a.separations.empty()) cfg.separation_grid = a.separations;
  if (!a.sizes.empty()) {
    if (a.sizes.size() % 2 != 0) throw Error(ErrorCode::InvalidArgument, "--sizes takes n m pairs");
    cfg.sizes.clear();
    for (std::size_t i = 0; i < a.sizes.size(); i += 2) cfg.sizes.emplace_back(a.sizes[i], a.sizes[i + 1]);
  }
  if (!a.variants.empty()) {
    cfg.variants.clear();
    for (const auto& v : a.variants) cfg.variants.push_back(parse_test_variant(v));
  }
  RunOptions opts;
  opts.threads = common.strict ? 1 : common.threads;
  const StudyResult result = run_level_power_study(cfg, opts);
  emit(a.table, format_table(result), out);
  if (!a.curve.empty()) emit_power_curve(result, a.curve);
  if (!a.summary.empty()) {
    nlohmann::json s = summary_json(result);
    s["config"] = to_json(cfg);
    io::write_text(a.summary, s.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_landmarks(const LandmarkArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const auto curves = ingest_polylines(a.input, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  std::vector<Configuration> landmarks;
  nlohmann::json audits = nlohmann::json::array();
  int code = kExitOk;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const double step = a.step ? *a.step : curves[c].length() / 200.0;
    try {
      const Polyline fine = resample(curves[c], step);
      PlacementAudit audit;
      const LandmarkSet set = place_landmarks(fine, a.max_shift, &audit);
      landmarks.push_back(set.coordinates);
      nlohmann::json j = audit_json(audit, set);
      j["curve"] = c;
      j["step"] = step;
      audits.push_back(std::move(j));
    } catch (const Error& e) {
      err << "curve " << c << ": " << e.what() << '\n';
      audits.push_back({{"curve", c}, {"error", std::string(to_string(e.code()))}, {"message", e.what()}});
      code = std::max(code, exit_code_for(e.code()));
    }
  }
  std::ostringstream csv;
  csv << "sample,x,y\n";
  for (std::size_t i = 0; i < landmarks.size(); ++i) {
    const Mat& m = landmarks[i].entries();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      csv << i << ',' << io::format_double(m(0, j)) << ',' << io::format_double(m(1, j)) << '\n';
    }
  }
  emit(a.output, csv.str(), out);
  if (!a.audit.empty()) io::write_text(a.audit, audits.dump(2) + "\n");
  return code;
}

int cmd_hopf(const HopfArgs& a, ShapeSpaceKind kind, std::ostream& out) {
  const auto samples = load_preshapes(a.samples);
  if (samples.front().dim() != 2 || samples.front().landmarks() != 3) {
    throw Error(ErrorCode::MalformedData, "hopf needs planar triangles (m = 2, k = 3)");
  }
  std::ostringstream csv;
  csv << "sample,x,y,z\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Eigen::Vector3d v = hopf_chart(samples[i]);
    if (a.fold) v = fold_hopf(v, kind);
    csv << i << ',' << io::format_double(v.x()) << ',' << io::format_double(v.y()) << ','
        << io::format_double(v.z()) << '\n';
  }
  emit(a.output, csv.str(), out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-sample tests and descriptive statistics for landmark shapes"};
  app.name("shapelift");
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--kind", common.kind,
                 "Shape space: rotation|so, reflection|o, reverse_labeling_reflection|rr")
      ->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_flag("--strict", common.strict, "Sequential execution for bit-exact output");

  DistanceArgs dist;
  auto* distance = app.add_subcommand("distance", "Shape distance between two configurations");
  distance->add_option("first", dist.a, "Configuration file (CSV or JSON)")->required();
  distance->add_option("second", dist.b, "Configuration file (CSV or JSON)")->required();

  MeanArgs mean_args;
  auto* mean = app.add_subcommand("mean", "Fréchet mean of a sample set");
  mean->add_option("samples", mean_args.samples, "Sample-set file")->required();
  mean->add_option("-o,--output", mean_args.output, "Write the mean configuration here");
  mean->add_option("--result", mean_args.result, "Write the result JSON here (default stdout)");
  mean->add_option("--tol", mean_args.tol, "Residual tolerance")->capture_default_str();
  mean->add_option("--max-iter", mean_args.max_iter, "Iteration cap")->capture_default_str();

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Two-sample test for equal mean shapes");
  test->add_option("w", test_args.w, "First sample set")->required();
  test->add_option("z", test_args.z, "Second sample set")->required();
  test->add_option("--variant", test_args.variants,
                   "pooled, pooled_intrinsic, individual, individual_asymmetric (default: all)");
  test->add_option("--alpha", test_args.alpha, "Nominal level")->capture_default_str();
  test->add_option("-B,--resamples", test_args.resamples, "Bootstrap resamples")->capture_default_str();
  test->add_option("--seed", test_args.seed, "Bootstrap seed")->capture_default_str();
  test->add_flag("--quantile", test_args.quantile, "Hotelling quantiles instead of the bootstrap");
  test->add_option("-o,--output", test_args.output, "Write the outcome JSON here (default stdout)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Level and power study on synthetic data");
  simulate->add_option("config", sim.config, "Study configuration JSON (optional)");
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--replicates", sim.replicates, "Replicates per cell");
  simulate->add_option("-B,--resamples", sim.resamples, "Bootstrap resamples");
  simulate->add_option("--sd", sim.sd, "Landmark noise standard deviation");
  simulate->add_option("--alpha", sim.alpha, "Nominal level");
  simulate->add_option("--separations", sim.separations, "Shape distances between templates");
  simulate->add_option("--sizes", sim.sizes, "Group sizes as n m pairs");
  simulate->add_option("--variant", sim.variants, "Tests to run (default: all)");
  simulate->add_option("-o,--output", sim.table, "Rejection table CSV ('-' for stdout)")->capture_default_str();
  simulate->add_option("--curve", sim.curve, "Power-curve data file");
  simulate->add_option("--summary", sim.summary, "Summary JSON with failures and runtimes");

  LandmarkArgs lm;
  auto* landmarks = app.add_subcommand("landmarks", "Five landmarks on traced filaments");
  landmarks->add_option("polylines", lm.input, "Polyline file (CSV curve_id,x,y or JSON)")->required();
  landmarks->add_option("--step", lm.step, "Resampling step (default: length / 200)");
  landmarks->add_option("--max-shift", lm.max_shift, "Equalization budget as a fraction of length")
      ->capture_default_str();
  landmarks->add_option("-o,--output", lm.output, "Landmark CSV (default stdout)");
  landmarks->add_option("--audit", lm.audit, "Audit JSON");

  HopfArgs hp;
  auto* hopf_cmd = app.add_subcommand("hopf", "Hopf-chart coordinates of planar triangles");
  hopf_cmd->add_option("samples", hp.samples, "Sample-set file of 2 x 3 configurations")->required();
  hopf_cmd->add_flag("--fold", hp.fold, "Map each point into the fundamental domain of --kind");
  hopf_cmd->add_option("-o,--output", hp.output, "CSV output (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    const bool kind_given = app.count("--kind") > 0;
    const ShapeSpaceKind kind = parse_shape_space_kind(common.kind);
    if (*distance) return cmd_distance(dist, kind, out);
    if (*mean) return cmd_mean(mean_args, kind, out);
    if (*test) return cmd_test(test_args, kind, out);
    if (*simulate) return cmd_simulate(sim, common, kind_given ? std::optional(kind) : std::nullopt, out);
    if (*landmarks) return cmd_landmarks(lm, out, err);
    if (*hopf_cmd) return cmd_hopf(hp, kind, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace shapelift::cli
