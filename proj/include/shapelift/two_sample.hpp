#pragma once

// Two-sample tests for quotient shape data built on optimal lifts:
//
//   Pooled                 lift everything to the pooled mean, tangent means
//   PooledIntrinsic        same lift, group Fréchet means as mean vectors
//   Individual             each group lifted to its own mean, positioned
//                          optimally to the pooled mean
//   IndividualAsymmetric   each group lifted to its own mean, the Z mean
//                          positioned optimally to the W mean
//
// Each comes in a Hotelling-calibrated form and a bootstrap form.
//
// Individual variants express group-Z tangent vectors in the common frame by
// parallel transport along the great circle between the bases followed by
// projection onto the horizontal basis of the frame's base point.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "shapelift/error.hpp"
#include "shapelift/geometry.hpp"
#include "shapelift/shape_spaces.hpp"

namespace shapelift {

enum class TestVariant { Pooled, PooledIntrinsic, Individual, IndividualAsymmetric };

inline constexpr TestVariant kAllVariants[] = {
    TestVariant::Pooled, TestVariant::PooledIntrinsic, TestVariant::Individual,
    TestVariant::IndividualAsymmetric};

/// "pooled", "pooled_intrinsic", "individual", "individual_asymmetric".
std::string_view to_string(TestVariant variant) noexcept;
TestVariant parse_test_variant(std::string_view name);

/// Orthonormal basis of the horizontal space at p: tangent to the centered
/// sphere and orthogonal to E p for every skew-symmetric E. Throws
/// DimensionMismatch if its size is not quotient_dimension(m, k), which
/// happens when p is rank deficient.
std::vector<TangentVector> horizontal_basis(const PreShape& p, ShapeSpaceKind kind);

struct TangentCoordinates {
  PreShape base;
  std::vector<TangentVector> basis;
  Eigen::MatrixXd coords;  ///< row j: coordinates of sample j
  std::size_t nonunique = 0;
};

/// Lifts each sample optimally to `base` and expands its log in the
/// horizontal basis at `base`.
TangentCoordinates lift_to_coords(const PreShape& base, std::span<const PreShape> samples,
                                  ShapeSpaceKind kind);

struct TestOutcome {
  TestVariant variant = TestVariant::Pooled;
  bool bootstrap = false;
  double statistic = 0.0;
  double critical_value = 0.0;
  std::optional<double> p_value;
  bool reject = false;
  int dof_d = 0;
  int dof_k = 0;
  /// A group or pooled mean failed the isotropy check; the run sits near
  /// the singular stratum and should not count towards level estimates.
  bool near_singular = false;
  std::vector<std::string> warnings;
};

struct TwoSampleRequest {
  ShapeSpaceKind kind = ShapeSpaceKind::ReverseLabelingReflection;
  double alpha = 0.05;
  std::vector<TestVariant> variants{std::begin(kAllVariants), std::end(kAllVariants)};
  bool bootstrap = true;
  int resamples = 1000;
  std::uint64_t seed = 0;
};

struct VariantResult {
  TestVariant variant;
  std::optional<TestOutcome> outcome;
  std::optional<Error> failure;
};

/// Runs several variants on one data set, sharing the Fréchet means and
/// bootstrap resamples between them. A variant that fails numerically
/// reports its error without affecting the others. Outcomes for a given
/// (data, seed) do not depend on which other variants are requested.
std::vector<VariantResult> run_two_sample_tests(std::span<const PreShape> w,
                                                std::span<const PreShape> z,
                                                const TwoSampleRequest& request);

TestOutcome test_pooled_lifting(std::span<const PreShape> w, std::span<const PreShape> z,
                                ShapeSpaceKind kind, double alpha);
TestOutcome test_pooled_intrinsic(std::span<const PreShape> w, std::span<const PreShape> z,
                                  ShapeSpaceKind kind, double alpha);
TestOutcome test_individual_lifting(std::span<const PreShape> w, std::span<const PreShape> z,
                                    ShapeSpaceKind kind, double alpha);
TestOutcome test_individual_asymmetric(std::span<const PreShape> w,
                                       std::span<const PreShape> z, ShapeSpaceKind kind,
                                       double alpha);

/// Bootstrap calibration. Round one resamples each group once to form
/// C = cov*[W] + cov*[Z]; round two draws `resamples` resamples per group and
/// takes the ceil((1 - alpha) B)-th order statistic of
/// (d*X - d*Y)^T C^{-1} (d*X - d*Y) as critical value. Requires B >= 200.
TestOutcome bootstrap_test(std::span<const PreShape> w, std::span<const PreShape> z,
                           ShapeSpaceKind kind, double alpha, int resamples,
                           TestVariant variant, std::uint64_t seed);

}  // namespace shapelift
