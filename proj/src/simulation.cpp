#include "shapelift/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/random/normal_distribution.hpp>

#include "shapelift/io.hpp"

namespace shapelift {

namespace {

Configuration from_points(std::initializer_list<std::pair<double, double>> pts) {
  Mat c(2, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index j = 0;
  for (auto [x, y] : pts) {
    c(0, j) = x;
    c(1, j) = y;
    ++j;
  }
  return Configuration(std::move(c));
}

}  // namespace

Configuration default_template_a() {
  return from_points({{-2.0, 0.0}, {-1.5, 1.6}, {-0.4, 1.4}, {0.7, 0.7}, {2.0, 0.0}});
}

Configuration default_template_b() {
  return from_points({{-2.0, 0.0}, {-1.5, 2.0}, {-0.5, 1.9}, {0.6, 0.9}, {2.0, 0.0}});
}

std::vector<Configuration> generate_sample(const Configuration& tmpl, double sd, int n,
                                           CounterRng& rng) {
  if (!(sd > 0.0) || !std::isfinite(sd)) {
    throw Error(ErrorCode::InvalidArgument, "noise standard deviation must be positive");
  }
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "sample size must be non-negative");
  boost::random::normal_distribution<double> noise(0.0, sd);
  std::vector<Configuration> out;
  out.reserve(static_cast<std::size_t>(n));
  const Mat& t = tmpl.entries();
  for (int i = 0; i < n; ++i) {
    Mat x = t;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      for (Eigen::Index r = 0; r < t.rows(); ++r) x(r, j) += noise(rng);
    }
    out.emplace_back(std::move(x));
  }
  return out;
}

std::pair<Configuration, Configuration> make_separated_templates(
    const Configuration& base, double target_distance, ShapeSpaceKind kind,
    const std::optional<Configuration>& toward) {
  if (!(target_distance >= 0.0) || !std::isfinite(target_distance)) {
    throw Error(ErrorCode::InvalidArgument, "target distance must be non-negative");
  }
  const PreShape p = to_preshape(base);
  const double size = center(base.entries()).norm();
  if (target_distance == 0.0) return {base, base};

  Mat direction;
  if (toward) {
    const AlignmentResult lifted = optimal_lift(p, to_preshape(*toward), kind);
    direction = sphere_log(p, lifted.aligned).entries;
  }
  if (direction.size() == 0 || direction.norm() < 1e-12) {
    direction = horizontal_basis(p, kind).front().entries;
  }
  direction /= direction.norm();

  const auto along = [&](double t) { return sphere_exp(p, Mat(t * direction)); };
  const auto gap = [&](double t) { return shape_distance(p, along(t), kind) - target_distance; };

  // Bracket the first crossing on a fine grid, then bisect.
  constexpr double kStep = 0.01;
  double lo = 0.0;
  double hi = -1.0;
  for (double t = kStep; t <= std::numbers::pi + 1e-12; t += kStep) {
    if (gap(t) >= 0.0) {
      hi = t;
      break;
    }
    lo = t;
  }
  if (hi < 0.0) {
    throw Error(ErrorCode::UnreachableDistance,
                "shape distance " + std::to_string(target_distance) + " is not reachable");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  const double t = std::abs(gap(lo)) <= std::abs(gap(hi)) ? lo : hi;
  if (std::abs(gap(t)) > 1e-6) {
    throw Error(ErrorCode::UnreachableDistance, "bisection did not reach the target distance");
  }
  return {base, Configuration(size * along(t).entries())};
}

void StudyConfig::validate() const {
  const auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (!(noise_sd > 0.0)) fail("noise_sd must be positive");
  if (replicates < 1) fail("replicates must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie in (0, 1)");
  if (bootstrap && bootstrap_B < 200) fail("bootstrap_B must be at least 200");
  if (sizes.empty()) fail("sizes must not be empty");
  for (auto [n, m] : sizes) {
    if (n < 2 || m < 2) fail("group sizes must be at least 2");
  }
  if (separation_grid.empty()) fail("separation_grid must not be empty");
  for (double s : separation_grid) {
    if (!(s >= 0.0)) fail("separations must be non-negative");
  }
  if (variants.empty()) fail("at least one test variant is required");
  if (!bootstrap && !quantile) fail("enable bootstrap or quantile tests");
  if (template_a.dim() != template_b.dim() || template_a.landmarks() != template_b.landmarks()) {
    throw Error(ErrorCode::DimensionMismatch, "templates differ in size");
  }
}

StudyConfig study_config_from_json(const nlohmann::json& j) {
  StudyConfig cfg;
  try {
    if (j.contains("template_a")) {
      cfg.template_a = Configuration(io::landmarks_from_json(j.at("template_a"), "template_a"));
    }
    if (j.contains("template_b")) {
      cfg.template_b = Configuration(io::landmarks_from_json(j.at("template_b"), "template_b"));
    }
    if (j.contains("kind")) cfg.kind = parse_shape_space_kind(j.at("kind").get<std::string>());
    if (j.contains("noise_sd")) cfg.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("sizes")) {
      cfg.sizes.clear();
      for (const auto& s : j.at("sizes")) {
        if (s.is_number()) {
          cfg.sizes.emplace_back(s.get<int>(), s.get<int>());
        } else {
          cfg.sizes.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
        }
      }
    }
    if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<int>();
    if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
    if (j.contains("bootstrap_B")) cfg.bootstrap_B = j.at("bootstrap_B").get<int>();
    if (j.contains("separation_grid")) {
      cfg.separation_grid = j.at("separation_grid").get<std::vector<double>>();
    }
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("variants")) {
      cfg.variants.clear();
      for (const auto& v : j.at("variants")) cfg.variants.push_back(parse_test_variant(v.get<std::string>()));
    }
    if (j.contains("bootstrap")) cfg.bootstrap = j.at("bootstrap").get<bool>();
    if (j.contains("quantile")) cfg.quantile = j.at("quantile").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedData, std::string("study config: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedData, std::string("study config: ") + e.what());
  }
  return cfg;
}

nlohmann::json to_json(const StudyConfig& cfg) {
  nlohmann::json j;
  j["template_a"] = io::landmarks_to_json(cfg.template_a.entries());
  j["template_b"] = io::landmarks_to_json(cfg.template_b.entries());
  j["kind"] = std::string(to_string(cfg.kind));
  j["noise_sd"] = cfg.noise_sd;
  j["sizes"] = nlohmann::json::array();
  for (auto [n, m] : cfg.sizes) j["sizes"].push_back({n, m});
  j["replicates"] = cfg.replicates;
  j["alpha"] = cfg.alpha;
  j["bootstrap_B"] = cfg.bootstrap_B;
  j["separation_grid"] = cfg.separation_grid;
  j["seed"] = cfg.seed;
  j["variants"] = nlohmann::json::array();
  for (auto v : cfg.variants) j["variants"].push_back(std::string(to_string(v)));
  j["bootstrap"] = cfg.bootstrap;
  j["quantile"] = cfg.quantile;
  return j;
}

namespace {

enum class Verdict { Reject, Accept, Excluded, Failed };

struct TestRecord {
  Verdict verdict = Verdict::Failed;
  std::string error;
};

struct Job {
  std::size_t size_index;
  std::size_t sep_index;
  int replicate;
};

struct JobResult {
  std::vector<TestRecord> tests;  // one per entry of the test list
  double seconds = 0.0;
};

std::vector<std::string> test_labels(const StudyConfig& cfg) {
  std::vector<std::string> labels;
  for (bool boot : {true, false}) {
    if (boot ? !cfg.bootstrap : !cfg.quantile) continue;
    for (TestVariant v : cfg.variants) {
      labels.push_back(std::string(to_string(v)) + (boot ? "" : "_quantile"));
    }
  }
  return labels;
}

std::vector<PreShape> project(const std::vector<Configuration>& sample) {
  std::vector<PreShape> out;
  out.reserve(sample.size());
  for (const auto& c : sample) out.push_back(to_preshape(c));
  return out;
}

JobResult run_job(const StudyConfig& cfg, const std::vector<Configuration>& targets, const Job& job,
                  std::size_t test_count) {
  const auto start = std::chrono::steady_clock::now();
  JobResult result;
  result.tests.resize(test_count);
  const auto [n, m] = cfg.sizes[job.size_index];
  const CounterRng stream(CounterRng::derive_key(
      CounterRng::derive_key(cfg.seed, job.size_index), static_cast<std::uint64_t>(job.replicate)));
  try {
    CounterRng wr = stream.substream(0);
    CounterRng zr = stream.substream(1);
    const auto w = project(generate_sample(cfg.template_a, cfg.noise_sd, n, wr));
    const auto z = project(generate_sample(targets[job.sep_index], cfg.noise_sd, m, zr));

    TwoSampleRequest request;
    request.kind = cfg.kind;
    request.alpha = cfg.alpha;
    request.variants = cfg.variants;
    request.resamples = cfg.bootstrap_B;
    request.seed = stream.substream(2).key();

    std::size_t slot = 0;
    for (bool boot : {true, false}) {
      if (boot ? !cfg.bootstrap : !cfg.quantile) continue;
      request.bootstrap = boot;
      for (const VariantResult& r : run_two_sample_tests(w, z, request)) {
        TestRecord& rec = result.tests[slot++];
        if (r.failure) {
          rec.verdict = Verdict::Failed;
          rec.error = r.failure->what();
        } else if (r.outcome->near_singular) {
          rec.verdict = Verdict::Excluded;
        } else {
          rec.verdict = r.outcome->reject ? Verdict::Reject : Verdict::Accept;
        }
      }
    }
  } catch (const Error& e) {
    for (auto& rec : result.tests) {
      rec.verdict = Verdict::Failed;
      rec.error = e.what();
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace

StudyResult run_level_power_study(const StudyConfig& cfg, const RunOptions& options) {
  cfg.validate();
  std::vector<Configuration> targets;
  for (double s : cfg.separation_grid) {
    targets.push_back(make_separated_templates(cfg.template_a, s, cfg.kind, cfg.template_b).second);
  }
  const auto labels = test_labels(cfg);

  std::vector<Job> jobs;
  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    for (std::size_t gi = 0; gi < cfg.separation_grid.size(); ++gi) {
      for (int r = 0; r < cfg.replicates; ++r) jobs.push_back({si, gi, r});
    }
  }

  std::vector<JobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      results[i] = run_job(cfg, targets, jobs[i], labels.size());
    }
  };
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(jobs.size(), 1)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Tally in job order so the result is independent of scheduling.
  StudyResult out;
  const std::size_t per_cell = labels.size();
  for (std::size_t si = 0; si < cfg.sizes.size(); ++si) {
    for (std::size_t gi = 0; gi < cfg.separation_grid.size(); ++gi) {
      for (const auto& label : labels) {
        out.cells.push_back(StudyCell{label, cfg.sizes[si].first, cfg.sizes[si].second,
                                      cfg.separation_grid[gi], 0, 0, 0, 0, 0.0});
      }
    }
  }
  std::vector<double> seconds(out.cells.size() / std::max<std::size_t>(per_cell, 1), 0.0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    const std::size_t group = job.size_index * cfg.separation_grid.size() + job.sep_index;
    seconds[group] += results[i].seconds;
    for (std::size_t t = 0; t < per_cell; ++t) {
      StudyCell& cell = out.cells[group * per_cell + t];
      const TestRecord& rec = results[i].tests[t];
      switch (rec.verdict) {
        case Verdict::Reject:
          ++cell.rejections;
          ++cell.replicates;
          break;
        case Verdict::Accept:
          ++cell.replicates;
          break;
        case Verdict::Excluded:
          ++cell.excluded;
          break;
        case Verdict::Failed:
          ++cell.failures;
          out.failures.push_back(
              {cell.test, cell.n, cell.m, cell.separation, job.replicate, rec.error});
          break;
      }
    }
  }
  for (std::size_t c = 0; c < out.cells.size(); ++c) {
    out.cells[c].mean_runtime = seconds[c / per_cell] / cfg.replicates;
  }
  return out;
}

std::string format_table(const StudyResult& result) {
  std::ostringstream out;
  out << "variant,n,m,separation,rejections,replicates,rate\n";
  for (const auto& c : result.cells) {
    out << c.test << ',' << c.n << ',' << c.m << ',' << io::format_double(c.separation) << ','
        << c.rejections << ',' << c.replicates << ',' << io::format_double(c.rate()) << '\n';
  }
  return out.str();
}

void emit_table(const StudyResult& result, const std::filesystem::path& path) {
  io::write_text(path, format_table(result));
}

std::string format_power_curve(const StudyResult& result) {
  // Group cells by (test, n, m) in first-appearance order.
  std::vector<std::tuple<std::string, int, int>> keys;
  for (const auto& c : result.cells) {
    const auto key = std::make_tuple(c.test, c.n, c.m);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& [test, n, m] : keys) {
    if (!first) out << "\n\n";
    first = false;
    out << "# " << test << " n=" << n << " m=" << m << "\n# separation rate\n";
    for (const auto& c : result.cells) {
      if (c.test == test && c.n == n && c.m == m) {
        out << io::format_double(c.separation) << ' ' << io::format_double(c.rate()) << '\n';
      }
    }
  }
  return out.str();
}

void emit_power_curve(const StudyResult& result, const std::filesystem::path& path) {
  io::write_text(path, format_power_curve(result));
}

nlohmann::json summary_json(const StudyResult& result) {
  nlohmann::json j;
  j["cells"] = nlohmann::json::array();
  for (const auto& c : result.cells) {
    j["cells"].push_back({{"variant", c.test},
                          {"n", c.n},
                          {"m", c.m},
                          {"separation", c.separation},
                          {"rejections", c.rejections},
                          {"replicates", c.replicates},
                          {"excluded", c.excluded},
                          {"failures", c.failures},
                          {"rate", c.rate()},
                          {"mean_runtime", c.mean_runtime}});
  }
  j["failures"] = nlohmann::json::array();
  for (const auto& f : result.failures) {
    j["failures"].push_back({{"variant", f.test},
                             {"n", f.n},
                             {"m", f.m},
                             {"separation", f.separation},
                             {"replicate", f.replicate},
                             {"error", f.error}});
  }
  return j;
}

}  // namespace shapelift
