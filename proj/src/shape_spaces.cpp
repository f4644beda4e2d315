#include "shapelift/shape_spaces.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lift_kernel.hpp"

namespace shapelift {

namespace detail {

namespace {

// First nonzero entry of every left singular vector positive; the matching
// right singular vector flips with it.
template <typename U, typename V>
void canonical_signs(U& u, V& v) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      if (std::abs(u(i, j)) > 1e-14) {
        if (u(i, j) < 0.0) {
          u.col(j) *= -1.0;
          v.col(j) *= -1.0;
        }
        break;
      }
    }
  }
}

template <int D>
void procrustes_sized(const Mat& a, const Mat& b, bool reversed, bool proper,
                      ProcrustesFit& fit) {
  using Square = Eigen::Matrix<double, D, D>;
  const Eigen::Index m = a.rows();
  const Eigen::Index k = a.cols();
  Square cross = Square::Zero(m, m);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index jb = reversed ? k - 1 - j : j;
    for (Eigen::Index r = 0; r < m; ++r) {
      const double br = b(r, jb);
      for (Eigen::Index c = 0; c < m; ++c) cross(r, c) += br * a(c, j);
    }
  }
  Eigen::JacobiSVD<Square> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Square u = svd.matrixU();
  Square v = svd.matrixV();
  canonical_signs(u, v);
  fit.singular_values = svd.singularValues();
  fit.corrected = false;
  if (proper && (v * u.transpose()).determinant() < 0.0) {
    v.col(m - 1) *= -1.0;
    fit.corrected = true;
  }
  fit.rotation.noalias() = v * u.transpose();
}

}  // namespace

void procrustes(const Mat& a, const Mat& b, bool reversed, bool proper,
                ProcrustesFit& fit) {
  switch (a.rows()) {
    case 2: procrustes_sized<2>(a, b, reversed, proper, fit); break;
    case 3: procrustes_sized<3>(a, b, reversed, proper, fit); break;
    default: procrustes_sized<Eigen::Dynamic>(a, b, reversed, proper, fit); break;
  }
}

bool procrustes_unique(const ProcrustesFit& fit, bool proper) {
  const auto& s = fit.singular_values;
  const Eigen::Index m = s.size();
  if (proper) {
    // A one-dimensional null space leaves no ambiguity in SO(m).
    if (m >= 2 && s(m - 2) < kSingularTolerance) return false;
    if (fit.corrected && m >= 2 && s(m - 2) - s(m - 1) < kSingularTolerance) return false;
    return true;
  }
  return s(m - 1) >= kSingularTolerance;
}

namespace {

void evaluate(const Mat& base, const Mat& b, bool reversed, bool proper, Candidate& c,
              Mat& scratch) {
  procrustes(base, b, reversed, proper, c.fit);
  if (reversed) {
    c.aligned.noalias() = c.fit.rotation * b.rowwise().reverse();
  } else {
    c.aligned.noalias() = c.fit.rotation * b;
  }
  c.relabel = reversed;
  c.cosine = inner(base, c.aligned);
  scratch = c.aligned - c.cosine * base;
  c.sine = scratch.norm();
  c.distance = std::atan2(c.sine, c.cosine);
}

}  // namespace

LiftOutcome lift(const Mat& base, const Mat& b, ShapeSpaceKind kind, LiftWorkspace& ws) {
  const bool proper = kind == ShapeSpaceKind::Rotation;
  evaluate(base, b, false, proper, ws.first, ws.tangent);
  if (kind != ShapeSpaceKind::ReverseLabelingReflection) {
    return {&ws.first, procrustes_unique(ws.first.fit, proper)};
  }
  evaluate(base, b, true, false, ws.second, ws.tangent);
  const bool tie = std::abs(ws.first.distance - ws.second.distance) < kTieTolerance;
  const Candidate* best = ws.second.distance < ws.first.distance ? &ws.second : &ws.first;
  return {best, !tie && procrustes_unique(best->fit, false)};
}

}  // namespace detail

std::string_view to_string(ShapeSpaceKind kind) noexcept {
  switch (kind) {
    case ShapeSpaceKind::Rotation: return "rotation";
    case ShapeSpaceKind::Reflection: return "reflection";
    case ShapeSpaceKind::ReverseLabelingReflection: return "reverse_labeling_reflection";
  }
  return "unknown";
}

ShapeSpaceKind parse_shape_space_kind(std::string_view name) {
  if (name == "rotation" || name == "so") return ShapeSpaceKind::Rotation;
  if (name == "reflection" || name == "o") return ShapeSpaceKind::Reflection;
  if (name == "reverse_labeling_reflection" || name == "rr") {
    return ShapeSpaceKind::ReverseLabelingReflection;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown shape space kind '" + std::string(name) + "'");
}

GroupElement GroupElement::identity(int m) {
  return GroupElement{Eigen::MatrixXd::Identity(m, m), false};
}

Mat GroupElement::apply(const Mat& b) const {
  Mat out = rotation * b;
  return relabel ? reverse_label(out) : out;
}

PreShape GroupElement::apply(const PreShape& b) const {
  return PreShape::assume_valid(apply(b.entries()));
}

Mat reverse_label(const Mat& c) { return c.rowwise().reverse(); }

Configuration reverse_label(const Configuration& c) {
  return Configuration(reverse_label(c.entries()));
}

PreShape reverse_label(const PreShape& p) {
  return PreShape::assume_valid(reverse_label(p.entries()));
}

Eigen::MatrixXd helmert_relabel_conjugate(int k) {
  const Eigen::MatrixXd h = helmert_submatrix(k);
  return h.transpose() * h.colwise().reverse();
}

int quotient_dimension(int m, int k) { return m * (k - 1) - 1 - m * (m - 1) / 2; }

AlignmentResult optimal_align(const PreShape& a, const PreShape& b, ShapeSpaceKind kind) {
  if (a.dim() != b.dim() || a.landmarks() != b.landmarks()) {
    throw Error(ErrorCode::DimensionMismatch, "pre-shapes differ in size");
  }
  detail::LiftWorkspace ws;
  const auto outcome = detail::lift(a.entries(), b.entries(), kind, ws);
  const auto& best = *outcome.best;
  return AlignmentResult{GroupElement{best.fit.rotation, best.relabel},
                         PreShape::assume_valid(best.aligned), best.distance,
                         outcome.unique};
}

double shape_distance(const PreShape& a, const PreShape& b, ShapeSpaceKind kind) {
  // Aligning the lexicographically smaller argument keeps d(a,b) == d(b,a)
  // bit for bit.
  const Mat& x = a.entries();
  const Mat& y = b.entries();
  const bool swap = std::lexicographical_compare(y.data(), y.data() + y.size(), x.data(),
                                                 x.data() + x.size());
  return swap ? optimal_align(b, a, kind).distance : optimal_align(a, b, kind).distance;
}

namespace {

std::complex<double> hermitian_row_product(const Mat& z, const Mat& w, bool conjugate_w,
                                           bool reverse_z) {
  std::complex<double> sum{0.0, 0.0};
  const Eigen::Index k = z.cols();
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index jz = reverse_z ? k - 1 - j : j;
    const std::complex<double> zj{z(0, jz), z(1, jz)};
    const std::complex<double> wj{w(0, j), conjugate_w ? -w(1, j) : w(1, j)};
    sum += zj * wj;
  }
  return sum;
}

}  // namespace

double shape_distance_planar(const PreShape& a, const PreShape& b, ShapeSpaceKind kind) {
  if (a.dim() != 2 || b.dim() != 2 || a.landmarks() != b.landmarks()) {
    throw Error(ErrorCode::InvalidArgument, "planar distance requires two 2 x k pre-shapes");
  }
  const auto angle = [](std::complex<double> v) {
    return std::acos(std::clamp(std::abs(v), -1.0, 1.0));
  };
  const Mat& z = a.entries();
  const Mat& w = b.entries();
  double d = angle(hermitian_row_product(z, w, true, false));
  if (kind == ShapeSpaceKind::Rotation) return d;
  d = std::min(d, angle(hermitian_row_product(z, w, false, false)));
  if (kind == ShapeSpaceKind::Reflection) return d;
  d = std::min(d, angle(hermitian_row_product(z, w, true, true)));
  d = std::min(d, angle(hermitian_row_product(z, w, false, true)));
  return d;
}

AlignmentResult optimal_lift(const PreShape& p, const PreShape& b, ShapeSpaceKind kind) {
  return optimal_align(p, b, kind);
}

bool isotropy_check(const PreShape& p, ShapeSpaceKind kind) {
  const int m = p.dim();
  Eigen::JacobiSVD<Mat> svd(p.entries());
  const auto& s = svd.singularValues();
  // SO(m) fixes nothing but the identity once rank >= m - 1; O(m) needs
  // full rank to exclude the reflection across the span.
  const int required_rank = kind == ShapeSpaceKind::Rotation ? m - 1 : m;
  if (s(required_rank - 1) < detail::kSingularTolerance) return false;
  if (kind != ShapeSpaceKind::ReverseLabelingReflection) return true;

  const PreShape reversed = reverse_label(p);
  const AlignmentResult fit = optimal_align(p, reversed, ShapeSpaceKind::Reflection);
  const double residual = (fit.aligned.entries() - p.entries()).norm();
  return residual > 1e-10;
}

Eigen::Vector3d hopf(const std::array<std::complex<double>, 2>& w) {
  const double n2 = std::norm(w[0]) + std::norm(w[1]);
  if (std::abs(n2 - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "hopf requires a unit vector in C^2");
  }
  const std::complex<double> c = w[0] * std::conj(w[1]);
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(w[0]) - std::norm(w[1])};
}

std::array<std::complex<double>, 2> helmert_complex(const PreShape& p) {
  if (p.dim() != 2 || p.landmarks() != 3) {
    throw Error(ErrorCode::InvalidArgument, "Hopf chart requires a 2 x 3 pre-shape");
  }
  const Mat h = helmertize(p.entries());
  return {std::complex<double>{h(0, 0), h(1, 0)}, std::complex<double>{h(0, 1), h(1, 1)}};
}

Eigen::Vector3d hopf_chart(const PreShape& p) { return hopf(helmert_complex(p)); }

Eigen::Matrix3d hopf_relabel_map() {
  const double h = std::sqrt(3.0) / 2.0;
  Eigen::Matrix3d m;
  m << 0.5, 0.0, -h,
       0.0, -1.0, 0.0,
       -h, 0.0, -0.5;
  return m;
}

Eigen::Vector3d fold_hopf(const Eigen::Vector3d& v, ShapeSpaceKind kind) {
  if (kind == ShapeSpaceKind::Rotation) return v;
  Eigen::Vector3d out = v;
  if (kind == ShapeSpaceKind::ReverseLabelingReflection &&
      0.5 * out.x() + std::sqrt(3.0) / 2.0 * out.z() < 0.0) {
    out = hopf_relabel_map() * out;
  }
  out.y() = std::abs(out.y());
  return out;
}

}  // namespace shapelift
