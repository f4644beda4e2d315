#pragma once

#include <cstddef>
#include <span>

#include "lift_kernel.hpp"
#include "shapelift/frechet.hpp"

namespace shapelift::detail {

/// A sample, optionally viewed through an index list (bootstrap resamples
/// without copying).
class SampleView {
 public:
  explicit SampleView(std::span<const PreShape> data) : data_(data) {}
  SampleView(std::span<const PreShape> data, std::span<const std::size_t> index)
      : data_(data), index_(index), indexed_(true) {}

  std::size_t size() const { return indexed_ ? index_.size() : data_.size(); }
  const PreShape& operator[](std::size_t i) const {
    return indexed_ ? data_[index_[i]] : data_[i];
  }

 private:
  std::span<const PreShape> data_;
  std::span<const std::size_t> index_;
  bool indexed_ = false;
};

struct PassResult {
  double value = 0.0;         // Fréchet function at the base
  std::size_t nonunique = 0;  // samples whose lift was not unique
};

/// Lifts every sample to `base`; writes the mean log into `mean_log`.
PassResult lift_pass(const Mat& base, const SampleView& samples, ShapeSpaceKind kind,
                     LiftWorkspace& ws, Mat& mean_log);

MeanResult frechet_mean(const SampleView& samples, ShapeSpaceKind kind,
                        const MeanOptions& options);

}  // namespace shapelift::detail
