#pragma once

// Landmark configurations and the intrinsic geometry of the centered
// pre-shape sphere S_m^k = { B in R^{m x k} : B 1_k = 0, ||B|| = 1 }.
//
// Matrices are m x k with one column per landmark. All functions are pure;
// values are immutable after construction.

#include <Eigen/Dense>

#include "shapelift/error.hpp"

namespace shapelift {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Raw landmark matrix, m x k with 2 <= m < k.
class Configuration {
 public:
  explicit Configuration(Mat entries);

  const Mat& entries() const noexcept { return entries_; }
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  int landmarks() const noexcept { return static_cast<int>(entries_.cols()); }

 private:
  Mat entries_;
};

/// Point on the centered pre-shape sphere.
class PreShape {
 public:
  /// Validates centering and unit norm (tolerance 1e-12).
  static PreShape from_matrix(Mat entries);

  /// Skips validation. For values produced by this library's own maps
  /// (exp, group actions) where the invariants hold by construction.
  static PreShape assume_valid(Mat entries) noexcept {
    return PreShape(std::move(entries));
  }

  const Mat& entries() const noexcept { return entries_; }
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  int landmarks() const noexcept { return static_cast<int>(entries_.cols()); }

  PreShape operator-() const { return PreShape(-entries_); }

 private:
  explicit PreShape(Mat entries) noexcept : entries_(std::move(entries)) {}

  Mat entries_;
};

/// Tangent vector to the pre-shape sphere at `base`.
struct TangentVector {
  PreShape base;
  Mat entries;

  double norm() const { return entries.norm(); }
};

/// Frobenius inner product tr(A^T B).
inline double inner(const Mat& a, const Mat& b) {
  return a.cwiseProduct(b).sum();
}

/// Subtracts the mean landmark: c (I_k - 1_k 1_k^T / k).
Configuration center(const Configuration& c);
Mat center(const Mat& c);

/// Sub-Helmert matrix H_k (k x (k-1)); columns orthonormal and orthogonal
/// to 1_k. Column j (1-based) has j entries 1/sqrt(j(j+1)) followed by
/// -j/sqrt(j(j+1)). Throws InvalidArgument for k < 2.
Eigen::MatrixXd helmert_submatrix(int k);

/// c H_k, an m x (k-1) matrix with the translation removed.
Mat helmertize(const Configuration& c);
Mat helmertize(const Mat& c);

/// center(c) / ||center(c)||. Throws DegenerateConfiguration when c lies on
/// the diagonal orbit (all landmarks coincide, relative tolerance 1e-12).
PreShape to_preshape(const Configuration& c);

/// Great-circle distance in [0, pi].
double sphere_distance(const PreShape& a, const PreShape& b);

PreShape sphere_exp(const PreShape& p, const TangentVector& v);
PreShape sphere_exp(const PreShape& p, const Mat& v);

/// Inverse of sphere_exp. Throws AntipodalPoint when the distance exceeds
/// pi - 1e-8.
TangentVector sphere_log(const PreShape& p, const PreShape& q);

/// Moves v in T_p to T_q along the minimizing great circle. Isometric.
/// Throws AntipodalPoint as sphere_log does.
TangentVector parallel_transport(const PreShape& p, const PreShape& q,
                                 const TangentVector& v);
Mat parallel_transport(const Mat& p, const Mat& q, const Mat& v);

namespace detail {

/// Angle between unit matrices a and b, accurate near 0 and pi.
double unit_angle(const Mat& a, const Mat& b);

/// Log map on raw unit matrices; `out` receives the tangent vector and the
/// return value is its norm (the angle).
double log_into(const Mat& p, const Mat& q, Mat& out);

}  // namespace detail

}  // namespace shapelift
