#pragma once

// Five landmarks on traced planar filaments (buckled microtubules).
//
// Landmarks 1 and 5 are the vertex pair maximizing
//   (chord / arc length) * (max perpendicular distance to the chord)^(1/4);
// landmark 3 is the vertex attaining that maximal distance; landmark 2 is the
// vertex between 1 and 3 furthest from the line through 1 and 3, and
// landmark 4 the vertex between 3 and 5 furthest from the line through 3 and
// 5. An equalization pass then nudges landmarks 2, 3, 4 along the curve
// towards equal arc-length gaps.

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "shapelift/geometry.hpp"

namespace shapelift {

class Polyline {
 public:
  /// Cumulative arc length from chord sums. Throws InvalidArgument for
  /// fewer than two points, non-finite or repeated consecutive points.
  explicit Polyline(std::vector<Eigen::Vector2d> points);

  /// Points with prescribed, strictly increasing arc-length parameters.
  Polyline(std::vector<Eigen::Vector2d> points, std::vector<double> arc);

  const std::vector<Eigen::Vector2d>& points() const noexcept { return points_; }
  const std::vector<double>& arc() const noexcept { return arc_; }
  std::size_t size() const noexcept { return points_.size(); }
  double length() const noexcept { return arc_.back() - arc_.front(); }

  /// Same curve traversed backwards; arc re-measured from the new start.
  Polyline reversed() const;

 private:
  std::vector<Eigen::Vector2d> points_;
  std::vector<double> arc_;
};

/// Uniform resampling in arc length by linear interpolation, with
/// round(length / step) segments (at least one). Endpoints are kept and the
/// result carries the parameter values of the input, so the length is
/// preserved and resampling twice with the same step changes nothing.
Polyline resample(const Polyline& p, double step);

struct LandmarkSet {
  std::array<std::size_t, 5> indices{};
  Configuration coordinates;  ///< 2 x 5
};

struct ChordSearch {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t apex = 0;
  double score = 0.0;
  double max_normal_distance = 0.0;
};

/// Exhaustive search for landmarks 1, 3 and 5. Ties keep the
/// lexicographically smallest pair and the smallest apex index. Throws
/// DegenerateChord when every chord is shorter than 1e-9 or no vertex leaves
/// the chord (a straight curve).
ChordSearch search_chord(const Polyline& p);

/// Sum over the four gaps of (s_{i+1} - s_i - L/4)^2, L = s_5 - s_1.
double gap_objective(const std::array<std::size_t, 5>& indices, const Polyline& p);

struct PlacementAudit {
  ChordSearch chord;
  std::array<std::size_t, 5> initial{};
  std::array<double, 5> shifts{};  ///< arc-length displacement by equalization
  double objective_before = 0.0;
  double objective_after = 0.0;
};

/// Moves landmarks 2..4 to vertices that lower gap_objective, each staying
/// within max_shift * L of its starting arc position and strictly between
/// its neighbours. Coordinate descent: landmark 3 first, then 2 and 4; a
/// move is taken only if it strictly lowers the objective.
LandmarkSet equalize(const LandmarkSet& l, const Polyline& p, double max_shift);

/// Requires at least 20 vertices (TooFewPoints). `max_shift` is passed to
/// equalize; 0 disables it.
LandmarkSet place_landmarks(const Polyline& p, double max_shift = 0.15,
                            PlacementAudit* audit = nullptr);

/// CSV with columns curve_id,x,y (curves in order of first appearance) or
/// JSON: an array of curves, each an array of [x, y] points, optionally
/// wrapped as {"curves": [...]}. Curves with fewer than five distinct points
/// are skipped and reported through `warnings`; repeated consecutive points
/// are dropped. Empty input gives an empty list.
std::vector<Polyline> ingest_polylines(const std::filesystem::path& path,
                                       std::vector<std::string>* warnings = nullptr);

/// Writes the CSV form read by ingest_polylines.
void write_polylines(const std::filesystem::path& path, const std::vector<Polyline>& curves);

nlohmann::json audit_json(const PlacementAudit& audit, const LandmarkSet& result);

}  // namespace shapelift
