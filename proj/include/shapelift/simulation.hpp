#pragma once

// Level and power studies on synthetic landmark data.
//
// Group W is drawn around template_a. Group Z is drawn around a template at
// the requested shape distance from template_a, reached by walking along a
// horizontal geodesic that points towards template_b. Isotropic normal
// noise is added to the raw landmarks before projection to pre-shapes.
//
// Seeding: replicate r of size pair s draws its noise from
// derive_key(derive_key(seed, s), r), and the same noise is reused at every
// separation of the grid (common random numbers), so power curves are
// compared on identical noise.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "shapelift/geometry.hpp"
#include "shapelift/rng.hpp"
#include "shapelift/shape_spaces.hpp"
#include "shapelift/two_sample.hpp"

namespace shapelift {

/// Five-landmark lopsided arc, full rank and far from its own relabeling.
Configuration default_template_a();
/// A deeper buckle of the same orientation; sets the default direction of
/// separation.
Configuration default_template_b();

/// n configurations template + N(0, sd^2) noise per coordinate, drawn
/// sample by sample, landmark by landmark. Throws InvalidArgument unless
/// sd > 0.
std::vector<Configuration> generate_sample(const Configuration& tmpl, double sd, int n,
                                           CounterRng& rng);

/// (base, moved) with shape_distance(base, moved) = target to 1e-6. `moved`
/// lies on the geodesic from base along the horizontal direction towards
/// `toward` (or the first horizontal basis vector) and is scaled to the
/// centroid size of base. Throws UnreachableDistance when the geodesic never
/// gets that far in the quotient.
std::pair<Configuration, Configuration> make_separated_templates(
    const Configuration& base, double target_distance, ShapeSpaceKind kind,
    const std::optional<Configuration>& toward = std::nullopt);

struct StudyConfig {
  Configuration template_a = default_template_a();
  Configuration template_b = default_template_b();
  ShapeSpaceKind kind = ShapeSpaceKind::ReverseLabelingReflection;
  double noise_sd = 0.2;
  std::vector<std::pair<int, int>> sizes{{100, 100}};
  int replicates = 1000;
  double alpha = 0.05;
  int bootstrap_B = 1000;
  std::vector<double> separation_grid{0.0};
  std::uint64_t seed = 0;
  std::vector<TestVariant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
  bool bootstrap = true;
  /// Also run the Hotelling-calibrated versions.
  bool quantile = false;

  /// Throws InvalidArgument on violated invariants.
  void validate() const;
};

/// Reads a JSON study file; absent fields keep their defaults.
StudyConfig study_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StudyConfig& cfg);

struct StudyCell {
  std::string test;  ///< variant name, "_quantile" suffix for Hotelling versions
  int n = 0;
  int m = 0;
  double separation = 0.0;
  int rejections = 0;
  int replicates = 0;  ///< replicates counted towards the rate
  int excluded = 0;    ///< near the singular stratum, not counted
  int failures = 0;    ///< numerical failures, not counted
  double mean_runtime = 0.0;  ///< seconds per replicate, all tests together

  double rate() const { return replicates > 0 ? double(rejections) / replicates : 0.0; }
};

struct StudyFailure {
  std::string test;
  int n = 0;
  int m = 0;
  double separation = 0.0;
  int replicate = 0;
  std::string error;
};

struct StudyResult {
  std::vector<StudyCell> cells;  ///< ordered by size, separation, test
  std::vector<StudyFailure> failures;
};

struct RunOptions {
  /// Worker threads; 0 picks the hardware concurrency. Results do not depend
  /// on this value.
  unsigned threads = 0;
};

StudyResult run_level_power_study(const StudyConfig& cfg, const RunOptions& options = {});

/// CSV: variant,n,m,separation,rejections,replicates,rate.
std::string format_table(const StudyResult& result);
void emit_table(const StudyResult& result, const std::filesystem::path& path);

/// Whitespace-separated XY blocks (separation, rate), one per test and size,
/// separated by two blank lines so gnuplot's `index` selects them.
std::string format_power_curve(const StudyResult& result);
void emit_power_curve(const StudyResult& result, const std::filesystem::path& path);

/// Failures, exclusions and runtimes, for the record.
nlohmann::json summary_json(const StudyResult& result);

}  // namespace shapelift
