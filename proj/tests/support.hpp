#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shapelift/filaments.hpp"
#include "shapelift/geometry.hpp"
#include "shapelift/shape_spaces.hpp"

namespace shapelift::testing {

using Rng = std::mt19937_64;

inline Mat random_matrix(int rows, int cols, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> normal(0.0, sd);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline PreShape random_preshape(int m, int k, Rng& rng) {
  return to_preshape(Configuration(random_matrix(m, k, rng)));
}

inline Mat random_tangent(const PreShape& p, Rng& rng, double norm) {
  Mat v = center(random_matrix(p.dim(), p.landmarks(), rng));
  v -= inner(v, p.entries()) * p.entries();
  return v * (norm / v.norm());
}

/// Haar-distributed orthogonal matrix; `proper` forces det = +1.
inline Eigen::MatrixXd random_orthogonal(int m, Rng& rng, bool proper) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd(random_matrix(m, m, rng)));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int i = 0; i < m; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  if (proper && q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline Eigen::Matrix2d planar_rotation(double angle) {
  Eigen::Matrix2d r;
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return r;
}

/// Random group element of `kind` applied to p.
inline PreShape random_group_action(const PreShape& p, ShapeSpaceKind kind, Rng& rng) {
  GroupElement g{random_orthogonal(p.dim(), rng, kind == ShapeSpaceKind::Rotation), false};
  if (kind == ShapeSpaceKind::ReverseLabelingReflection) g.relabel = (rng() & 1u) != 0;
  return g.apply(p);
}

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SHAPELIFT_FIXTURE_DIR) / name;
}

/// Fresh scratch directory under the system temp directory.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("shapelift_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Asymmetric single buckle: a skewed hump with a small overtone, randomly
/// rotated, resampled at length / 200.
inline Polyline random_buckle(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double height = 0.15 + 0.35 * u(rng);
  const double skew = 0.6 + 0.8 * u(rng);
  const double wiggle = 0.04 * u(rng);
  const double phase = 2 * std::numbers::pi * u(rng);
  const Eigen::Matrix2d r = planar_rotation(2 * std::numbers::pi * u(rng));
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i <= 150; ++i) {
    const double x = i / 150.0;
    const double y = height * std::sin(std::numbers::pi * std::pow(x, skew)) +
                     wiggle * std::sin(3 * std::numbers::pi * x + phase);
    pts.push_back(r * Eigen::Vector2d(x, y));
  }
  const Polyline raw(std::move(pts));
  return resample(raw, raw.length() / 200);
}

/// Reference pair search written without the library's helpers: projection
/// residuals instead of cross products, all pairs, first maximum kept.
inline ChordSearch brute_force_chord(const Polyline& p) {
  const auto& pts = p.points();
  const auto& arc = p.arc();
  ChordSearch best;
  best.score = -1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 2; j < pts.size(); ++j) {
      const Eigen::Vector2d dir = (pts[j] - pts[i]).normalized();
      double nd = -1.0;
      std::size_t apex = i;
      for (std::size_t v = i + 1; v < j; ++v) {
        const Eigen::Vector2d off = pts[v] - pts[i];
        const double d = (off - off.dot(dir) * dir).norm();
        if (d > nd) {
          nd = d;
          apex = v;
        }
      }
      const double score = (pts[j] - pts[i]).norm() / (arc[j] - arc[i]) * std::sqrt(std::sqrt(nd));
      if (score > best.score) best = ChordSearch{i, j, apex, score, nd};
    }
  }
  return best;
}


}  // namespace shapelift::testing
