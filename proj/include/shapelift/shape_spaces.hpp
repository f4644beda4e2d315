#pragma once

// Quotients of the centered pre-shape sphere by
//   ROTATION                      SO(m) acting from the left,
//   REFLECTION                    O(m) acting from the left,
//   REVERSE_LABELING_REFLECTION   O(m) from the left and {I_k, L_k} from the
//                                 right, L_k reversing landmark order.
// Distances, optimal positioning (optimal lifts), isotropy detection and the
// Hopf chart of the planar triangle shape space.

#include <array>
#include <complex>
#include <string_view>

#include <Eigen/Dense>

#include "shapelift/geometry.hpp"

namespace shapelift {

enum class ShapeSpaceKind { Rotation, Reflection, ReverseLabelingReflection };

std::string_view to_string(ShapeSpaceKind kind) noexcept;

/// Accepts "rotation", "reflection", "reverse_labeling_reflection" and the
/// short forms "so", "o", "rr". Throws InvalidArgument otherwise.
ShapeSpaceKind parse_shape_space_kind(std::string_view name);

/// Element (R, relabel) acting as B -> R B (L_k if relabel).
struct GroupElement {
  Eigen::MatrixXd rotation;
  bool relabel = false;

  static GroupElement identity(int m);

  Mat apply(const Mat& b) const;
  PreShape apply(const PreShape& b) const;
};

struct AlignmentResult {
  GroupElement element;
  PreShape aligned;  ///< element applied to the moving pre-shape
  double distance;   ///< quotient distance, radians
  bool unique;       ///< false at ties / rank deficiency (see optimal_align)
};

/// Right multiplication by L_k (column order reversed).
Mat reverse_label(const Mat& c);
Configuration reverse_label(const Configuration& c);
PreShape reverse_label(const PreShape& p);

/// H_k^T L_k H_k, the (k-1) x (k-1) orthogonal matrix through which reverse
/// labeling acts on Helmertized coordinates.
Eigen::MatrixXd helmert_relabel_conjugate(int k);

/// Dimension m(k-1) - 1 - m(m-1)/2 of the manifold part of the quotient.
int quotient_dimension(int m, int k);

/// Positions `b` optimally with respect to the reference `a`.
///
/// With B A^T = U diag(lambda) V^T (singular values descending, first
/// nonzero entry of every left singular vector positive):
///   REFLECTION  R = V U^T
///   ROTATION    R = V diag(1, ..., 1, det(V U^T)) U^T
///   REVERSE_LABELING_REFLECTION  the better of the REFLECTION alignments of
///               b and reverse_label(b).
/// `unique` is cleared when the smallest singular value is below 1e-9
/// (REFLECTION; for ROTATION the second smallest), when the determinant
/// correction is active and the two smallest singular values are within
/// 1e-9, or when the relabeled and plain minima are within 1e-9.
AlignmentResult optimal_align(const PreShape& a, const PreShape& b, ShapeSpaceKind kind);

/// Quotient distance. Symmetric in its arguments.
double shape_distance(const PreShape& a, const PreShape& b, ShapeSpaceKind kind);

/// Planar (m = 2) quotient distance from the complex representation:
/// arccos |z conj(w)^T|, min with arccos |z w^T| for reflections and with the
/// reversed z for reverse labeling. Independent of the SVD route.
double shape_distance_planar(const PreShape& a, const PreShape& b, ShapeSpaceKind kind);

/// Representative of [b] in optimal position to p. Same computation as
/// optimal_align(p, b, kind); when `unique` is false the representative is
/// the deterministic SVD-branch choice.
AlignmentResult optimal_lift(const PreShape& p, const PreShape& b, ShapeSpaceKind kind);

/// True iff p has trivial isotropy under the group of `kind`.
bool isotropy_check(const PreShape& p, ShapeSpaceKind kind);

/// Hopf map (z1, z2) -> (2 Re(z1 conj z2), 2 Im(z1 conj z2), |z1|^2 - |z2|^2).
/// Throws InvalidArgument unless |z1|^2 + |z2|^2 = 1 (tolerance 1e-9).
Eigen::Vector3d hopf(const std::array<std::complex<double>, 2>& w);

/// Helmertized complex coordinates of a planar triangle pre-shape.
std::array<std::complex<double>, 2> helmert_complex(const PreShape& p);

/// hopf(helmert_complex(p)) for a 2 x 3 pre-shape.
Eigen::Vector3d hopf_chart(const PreShape& p);

/// Linear map that reverse labeling induces on chart coordinates:
/// hopf_chart(reverse_label(p)) = hopf_relabel_map() * hopf_chart(p).
/// It acts on (x, z) as the reflection [[1/2, -sqrt3/2], [-sqrt3/2, -1/2]]
/// and flips the sign of y.
Eigen::Matrix3d hopf_relabel_map();

/// Canonical chart point of the orbit of v: ROTATION keeps v, REFLECTION
/// maps it to y >= 0, REVERSE_LABELING_REFLECTION additionally picks the
/// image on the side (1/2) x + (sqrt3/2) z >= 0 of the relabeling mirror.
Eigen::Vector3d fold_hopf(const Eigen::Vector3d& v, ShapeSpaceKind kind);

}  // namespace shapelift
