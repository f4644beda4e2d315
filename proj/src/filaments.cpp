#include "shapelift/filaments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "shapelift/io.hpp"

namespace shapelift {

namespace {

constexpr std::size_t kMinResampledPoints = 20;
constexpr std::size_t kMinCurvePoints = 5;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

double line_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& q) {
  return std::abs(cross(b - a, q - a)) / (b - a).norm();
}

/// Vertex strictly between i and j furthest from the line through p_i, p_j.
std::pair<std::size_t, double> furthest_between(const Polyline& p, std::size_t i, std::size_t j) {
  const auto& pts = p.points();
  std::size_t best = i;
  double dist = -1.0;
  for (std::size_t v = i + 1; v < j; ++v) {
    const double d = line_distance(pts[i], pts[j], pts[v]);
    if (d > dist) {
      dist = d;
      best = v;
    }
  }
  return {best, dist};
}

}  // namespace

Polyline::Polyline(std::vector<Eigen::Vector2d> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw Error(ErrorCode::InvalidArgument, "polyline needs at least two points");
  arc_.assign(points_.size(), 0.0);
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite polyline point");
    if (i == 0) continue;
    const double seg = (points_[i] - points_[i - 1]).norm();
    if (!(seg > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "repeated consecutive point at index " + std::to_string(i));
    }
    arc_[i] = arc_[i - 1] + seg;
  }
}

Polyline::Polyline(std::vector<Eigen::Vector2d> points, std::vector<double> arc)
    : points_(std::move(points)), arc_(std::move(arc)) {
  if (points_.size() < 2 || arc_.size() != points_.size()) {
    throw Error(ErrorCode::InvalidArgument, "polyline needs matching points and arc lengths");
  }
  for (std::size_t i = 1; i < arc_.size(); ++i) {
    if (!(arc_[i] > arc_[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "arc length must increase strictly");
    }
  }
}

Polyline Polyline::reversed() const {
  std::vector<Eigen::Vector2d> pts(points_.rbegin(), points_.rend());
  std::vector<double> arc(arc_.size());
  const double end = arc_.back();
  for (std::size_t i = 0; i < arc_.size(); ++i) arc[i] = end - arc_[arc_.size() - 1 - i];
  return Polyline(std::move(pts), std::move(arc));
}

Polyline resample(const Polyline& p, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::InvalidArgument, "resampling step must be positive");
  }
  const auto& pts = p.points();
  const auto& arc = p.arc();
  const double start = arc.front();
  const double length = p.length();
  const auto segments = std::max<long>(1, std::lround(length / step));
  std::vector<Eigen::Vector2d> out;
  std::vector<double> params;
  out.reserve(static_cast<std::size_t>(segments) + 1);
  std::size_t seg = 0;
  for (long i = 0; i <= segments; ++i) {
    const double s = i == segments ? arc.back() : start + length * static_cast<double>(i) / segments;
    while (seg + 2 < arc.size() && arc[seg + 1] <= s) ++seg;
    const double t = std::clamp((s - arc[seg]) / (arc[seg + 1] - arc[seg]), 0.0, 1.0);
    out.push_back(t == 0.0 ? pts[seg] : t == 1.0 ? pts[seg + 1] : pts[seg] + t * (pts[seg + 1] - pts[seg]));
    params.push_back(s);
  }
  return Polyline(std::move(out), std::move(params));
}

ChordSearch search_chord(const Polyline& p) {
  const auto& pts = p.points();
  const auto& arc = p.arc();
  const std::size_t n = pts.size();
  ChordSearch best;
  bool any_chord = false;
  double best_score = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      const double chord = (pts[j] - pts[i]).norm();
      if (chord < 1e-9) continue;
      any_chord = true;
      const auto [apex, nd] = furthest_between(p, i, j);
      const double score = chord / (arc[j] - arc[i]) * std::pow(nd, 0.25);
      if (score > best_score) {
        best_score = score;
        best = ChordSearch{i, j, apex, score, nd};
      }
    }
  }
  if (!any_chord) throw Error(ErrorCode::DegenerateChord, "all chords shorter than 1e-9");
  if (!(best.score > 0.0)) throw Error(ErrorCode::DegenerateChord, "curve has no buckle");
  return best;
}

double gap_objective(const std::array<std::size_t, 5>& idx, const Polyline& p) {
  const auto& arc = p.arc();
  const double quarter = (arc[idx[4]] - arc[idx[0]]) / 4.0;
  double sum = 0.0;
  for (std::size_t g = 0; g < 4; ++g) {
    const double d = arc[idx[g + 1]] - arc[idx[g]] - quarter;
    sum += d * d;
  }
  return sum;
}

LandmarkSet equalize(const LandmarkSet& l, const Polyline& p, double max_shift) {
  if (!(max_shift >= 0.0)) throw Error(ErrorCode::InvalidArgument, "max_shift must be non-negative");
  const auto& arc = p.arc();
  const std::array<std::size_t, 5> origin = l.indices;
  std::array<std::size_t, 5> idx = l.indices;
  const double length = arc[idx[4]] - arc[idx[0]];
  const double budget = max_shift * length;
  const double eps = 1e-12 * std::max(length, 1e-300);

  // Best feasible vertex for landmark `k` with its neighbours held fixed: the
  // partial objective is a parabola centred at the neighbours' midpoint.
  const auto propose = [&](std::size_t k) {
    const double mid = 0.5 * (arc[idx[k - 1]] + arc[idx[k + 1]]);
    std::size_t best = idx[k];
    double best_gap = std::abs(arc[best] - mid);
    for (std::size_t v = idx[k - 1] + 1; v < idx[k + 1]; ++v) {
      if (std::abs(arc[v] - arc[origin[k]]) > budget + eps) continue;
      const double gap = std::abs(arc[v] - mid);
      const double here = std::abs(arc[v] - arc[idx[k]]);
      const double there = std::abs(arc[best] - arc[idx[k]]);
      if (gap < best_gap - eps || (gap <= best_gap + eps && here < there - eps)) {
        best = v;
        best_gap = gap;
      }
    }
    return best;
  };
  const auto try_move = [&](std::size_t k) {
    const std::size_t candidate = propose(k);
    if (candidate == idx[k]) return false;
    auto moved = idx;
    moved[k] = candidate;
    if (gap_objective(moved, p) < gap_objective(idx, p) - eps * eps) {
      idx = moved;
      return true;
    }
    return false;
  };

  for (std::size_t sweep = 0; sweep < p.size(); ++sweep) {
    bool changed = try_move(2);
    const bool left = try_move(1);
    const bool right = try_move(3);
    if (!(changed || left || right)) break;
  }

  Mat coords(2, 5);
  for (std::size_t k = 0; k < 5; ++k) coords.col(static_cast<Eigen::Index>(k)) = p.points()[idx[k]];
  return LandmarkSet{idx, Configuration(std::move(coords))};
}

LandmarkSet place_landmarks(const Polyline& p, double max_shift, PlacementAudit* audit) {
  if (p.size() < kMinResampledPoints) {
    throw Error(ErrorCode::TooFewPoints, "landmark placement needs at least " +
                                             std::to_string(kMinResampledPoints) + " vertices, got " +
                                             std::to_string(p.size()));
  }
  const ChordSearch chord = search_chord(p);
  if (chord.apex - chord.first < 2 || chord.last - chord.apex < 2) {
    throw Error(ErrorCode::TooFewPoints, "buckle too narrow for five distinct landmarks");
  }
  std::array<std::size_t, 5> idx{chord.first, 0, chord.apex, 0, chord.last};
  idx[1] = furthest_between(p, idx[0], idx[2]).first;
  idx[3] = furthest_between(p, idx[2], idx[4]).first;

  Mat coords(2, 5);
  for (std::size_t k = 0; k < 5; ++k) coords.col(static_cast<Eigen::Index>(k)) = p.points()[idx[k]];
  const LandmarkSet initial{idx, Configuration(std::move(coords))};
  LandmarkSet result = max_shift > 0.0 ? equalize(initial, p, max_shift) : initial;

  if (audit) {
    audit->chord = chord;
    audit->initial = idx;
    for (std::size_t k = 0; k < 5; ++k) {
      audit->shifts[k] = p.arc()[result.indices[k]] - p.arc()[idx[k]];
    }
    audit->objective_before = gap_objective(idx, p);
    audit->objective_after = gap_objective(result.indices, p);
  }
  return result;
}

namespace {

void add_curve(std::vector<Polyline>& out, std::vector<Eigen::Vector2d> pts, const std::string& name,
               std::vector<std::string>* warnings) {
  std::vector<Eigen::Vector2d> kept;
  std::size_t dropped = 0;
  for (const auto& q : pts) {
    if (!kept.empty() && kept.back() == q) {
      ++dropped;
      continue;
    }
    kept.push_back(q);
  }
  if (dropped > 0 && warnings) {
    warnings->push_back("curve " + name + ": dropped " + std::to_string(dropped) + " repeated points");
  }
  if (kept.size() < kMinCurvePoints) {
    if (warnings) {
      warnings->push_back("curve " + name + ": skipped, " + std::to_string(kept.size()) +
                          " points (need " + std::to_string(kMinCurvePoints) + ")");
    }
    return;
  }
  out.emplace_back(std::move(kept));
}

}  // namespace

std::vector<Polyline> ingest_polylines(const std::filesystem::path& path,
                                       std::vector<std::string>* warnings) {
  const std::string where = path.string();
  const std::string text = io::read_text(path);
  std::vector<Polyline> curves;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return curves;

  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedData, where + ": " + e.what());
    }
    const nlohmann::json& list = j.is_object() && j.contains("curves") ? j.at("curves") : j;
    if (!list.is_array()) throw Error(ErrorCode::MalformedData, where + ": expected an array of curves");
    for (std::size_t c = 0; c < list.size(); ++c) {
      const std::string at = where + ": curve " + std::to_string(c);
      const Mat m = io::landmarks_from_json(list[c], at);
      if (m.rows() != 2) throw Error(ErrorCode::MalformedData, at + ": points must be [x, y]");
      std::vector<Eigen::Vector2d> pts;
      for (Eigen::Index k = 0; k < m.cols(); ++k) pts.emplace_back(m(0, k), m(1, k));
      add_curve(curves, std::move(pts), std::to_string(c), warnings);
    }
    return curves;
  }

  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  std::vector<std::string> order;
  std::map<std::string, std::vector<Eigen::Vector2d>> groups;
  bool first_row = true;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = io::split_csv(line);
    const std::string at = where + ":" + std::to_string(number);
    if (first_row) {
      first_row = false;
      if (fields.size() == 3 && fields[1] == "x") continue;  // header
    }
    if (fields.size() != 3) throw Error(ErrorCode::MalformedData, at + ": expected curve_id,x,y");
    const Eigen::Vector2d q(io::parse_double(fields[1], at), io::parse_double(fields[2], at));
    if (!q.allFinite()) throw Error(ErrorCode::MalformedData, at + ": non-finite coordinate");
    auto [it, inserted] = groups.try_emplace(fields[0]);
    if (inserted) order.push_back(fields[0]);
    it->second.push_back(q);
  }
  for (const auto& id : order) add_curve(curves, std::move(groups[id]), id, warnings);
  return curves;
}

void write_polylines(const std::filesystem::path& path, const std::vector<Polyline>& curves) {
  std::string out = "curve_id,x,y\n";
  for (std::size_t c = 0; c < curves.size(); ++c) {
    for (const auto& q : curves[c].points()) {
      out += std::to_string(c) + ',' + io::format_double(q.x()) + ',' + io::format_double(q.y()) + '\n';
    }
  }
  io::write_text(path, out);
}

nlohmann::json audit_json(const PlacementAudit& audit, const LandmarkSet& result) {
  return nlohmann::json{
      {"indices", result.indices},
      {"initial_indices", audit.initial},
      {"chord",
       {{"first", audit.chord.first},
        {"last", audit.chord.last},
        {"apex", audit.chord.apex},
        {"score", audit.chord.score},
        {"max_normal_distance", audit.chord.max_normal_distance}}},
      {"shifts", audit.shifts},
      {"objective_before", audit.objective_before},
      {"objective_after", audit.objective_after},
      {"landmarks", io::landmarks_to_json(result.coordinates.entries())}};
}

}  // namespace shapelift
