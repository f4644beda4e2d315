#pragma once

// Allocation-free optimal positioning used by every hot loop (Fréchet
// iterations, lifting, bootstrap). optimal_align is a thin wrapper.

#include <cmath>

#include <Eigen/Dense>

#include "shapelift/geometry.hpp"
#include "shapelift/shape_spaces.hpp"

namespace shapelift::detail {

inline constexpr double kSingularTolerance = 1e-9;
inline constexpr double kTieTolerance = 1e-9;

struct ProcrustesFit {
  Eigen::MatrixXd rotation;
  Eigen::VectorXd singular_values;  // descending
  bool corrected = false;           // determinant sign flip applied
};

/// Maximizes tr(A^T R B') over O(m) (or SO(m) when `proper`), where B' is b
/// or its column reversal.
void procrustes(const Mat& a, const Mat& b, bool reversed, bool proper,
                ProcrustesFit& fit);

bool procrustes_unique(const ProcrustesFit& fit, bool proper);

struct Candidate {
  ProcrustesFit fit;
  Mat aligned;
  double cosine = 0.0;   // <base, aligned>
  double sine = 0.0;     // ||aligned - cosine * base||
  double distance = 0.0;
  bool relabel = false;
};

/// Scratch buffers reused across calls; one per thread.
struct LiftWorkspace {
  Candidate first;
  Candidate second;
  Mat tangent;
};

struct LiftOutcome {
  const Candidate* best;
  bool unique;
};

/// Aligns b to base. The winning candidate lives inside `ws` until the next
/// call.
LiftOutcome lift(const Mat& base, const Mat& b, ShapeSpaceKind kind, LiftWorkspace& ws);

}  // namespace shapelift::detail
