#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "shapelift/geometry.hpp"
#include "shapelift/shape_spaces.hpp"

namespace shapelift {

struct MeanOptions {
  double tol = 1e-9;
  int max_iter = 200;
  /// Starting representative. When absent the sample with the smallest
  /// Fréchet function value among ten pseudo-randomly chosen candidates is
  /// used; the choice depends only on sample contents, not their order.
  std::optional<PreShape> init;
};

struct MeanResult {
  PreShape mean;             ///< representative of the mean orbit
  int iterations = 0;
  double residual = 0.0;     ///< norm of the mean lifted log at `mean`
  double value = 0.0;        ///< Fréchet function at `mean`
  double unique_alignments = 1.0;  ///< fraction of unique lifts at `mean`
  bool converged = false;    ///< residual <= tol within max_iter
};

/// (1/n) sum_j d_Q(q, X_j)^2. Throws EmptySample for an empty sample.
double frechet_function(const PreShape& q, std::span<const PreShape> samples,
                        ShapeSpaceKind kind);

/// Fixed-point iteration mu <- exp_mu(mean_j log_mu(lift_mu X_j)) with step
/// halving (at most 30 times) whenever the Fréchet function would increase.
/// A run that cannot descend or exhausts max_iter comes back with
/// converged == false.
MeanResult frechet_mean(std::span<const PreShape> samples, ShapeSpaceKind kind,
                        const MeanOptions& options = {});

/// frechet_mean of the concatenated groups.
MeanResult pooled_mean(std::span<const PreShape> first, std::span<const PreShape> second,
                       ShapeSpaceKind kind, const MeanOptions& options = {});

}  // namespace shapelift
