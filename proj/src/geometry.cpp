#include "shapelift/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace shapelift {

namespace {

constexpr double kPreShapeTolerance = 1e-12;
constexpr double kDegenerateRelative = 1e-12;
constexpr double kAntipodalMargin = 1e-8;

}  // namespace

Configuration::Configuration(Mat entries) : entries_(std::move(entries)) {
  const auto m = entries_.rows();
  const auto k = entries_.cols();
  if (m < 2 || k <= m) {
    throw Error(ErrorCode::InvalidArgument,
                "configuration must be m x k with 2 <= m < k, got " +
                    std::to_string(m) + " x " + std::to_string(k));
  }
  if (!entries_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "configuration has non-finite entries");
  }
}

PreShape PreShape::from_matrix(Mat entries) {
  if (entries.rows() < 1 || entries.cols() < 2) {
    throw Error(ErrorCode::InvalidArgument, "pre-shape must be at least 1 x 2");
  }
  if (!entries.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "pre-shape has non-finite entries");
  }
  if (std::abs(entries.norm() - 1.0) > kPreShapeTolerance) {
    throw Error(ErrorCode::InvalidArgument, "pre-shape must have unit Frobenius norm");
  }
  if (entries.rowwise().sum().cwiseAbs().maxCoeff() > kPreShapeTolerance) {
    throw Error(ErrorCode::InvalidArgument, "pre-shape must be centered");
  }
  return PreShape(std::move(entries));
}

Mat center(const Mat& c) {
  Mat out = c;
  out.colwise() -= c.rowwise().mean();
  return out;
}

Configuration center(const Configuration& c) {
  return Configuration(center(c.entries()));
}

Eigen::MatrixXd helmert_submatrix(int k) {
  if (k < 2) {
    throw Error(ErrorCode::InvalidArgument, "helmert_submatrix requires k >= 2");
  }
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k - 1);
  for (int j = 1; j < k; ++j) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) h(i, j - 1) = scale;
    h(j, j - 1) = -static_cast<double>(j) * scale;
  }
  return h;
}

Mat helmertize(const Mat& c) {
  return c * helmert_submatrix(static_cast<int>(c.cols()));
}

Mat helmertize(const Configuration& c) { return helmertize(c.entries()); }

PreShape to_preshape(const Configuration& c) {
  Mat centered = center(c.entries());
  const double raw = c.entries().norm();
  const double norm = centered.norm();
  if (raw == 0.0 || norm < kDegenerateRelative * raw) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "configuration lies on the diagonal orbit (all landmarks coincide)");
  }
  centered /= norm;
  return PreShape::assume_valid(std::move(centered));
}

namespace detail {

double unit_angle(const Mat& a, const Mat& b) {
  return 2.0 * std::atan2((a - b).norm(), (a + b).norm());
}

double log_into(const Mat& p, const Mat& q, Mat& out) {
  const double c = inner(p, q);
  out = q - c * p;
  const double s = out.norm();
  const double theta = std::atan2(s, c);
  if (theta > std::numbers::pi - kAntipodalMargin) {
    throw Error(ErrorCode::AntipodalPoint, "log map undefined at the antipode");
  }
  if (s == 0.0) {
    out.setZero();
    return 0.0;
  }
  out *= theta / s;
  return theta;
}

}  // namespace detail

double sphere_distance(const PreShape& a, const PreShape& b) {
  return detail::unit_angle(a.entries(), b.entries());
}

PreShape sphere_exp(const PreShape& p, const Mat& v) {
  const double t = v.norm();
  if (t == 0.0) return p;
  Mat out = std::cos(t) * p.entries() + (std::sin(t) / t) * v;
  out /= out.norm();
  return PreShape::assume_valid(std::move(out));
}

PreShape sphere_exp(const PreShape& p, const TangentVector& v) {
  return sphere_exp(p, v.entries);
}

TangentVector sphere_log(const PreShape& p, const PreShape& q) {
  Mat v;
  detail::log_into(p.entries(), q.entries(), v);
  return TangentVector{p, std::move(v)};
}

Mat parallel_transport(const Mat& p, const Mat& q, const Mat& v) {
  if (detail::unit_angle(p, q) > std::numbers::pi - kAntipodalMargin) {
    throw Error(ErrorCode::AntipodalPoint, "transport undefined between antipodes");
  }
  const double c = inner(p, q);
  return v - (inner(v, q) / (1.0 + c)) * (p + q);
}

TangentVector parallel_transport(const PreShape& p, const PreShape& q,
                                 const TangentVector& v) {
  return TangentVector{q, parallel_transport(p.entries(), q.entries(), v.entries)};
}

}  // namespace shapelift
