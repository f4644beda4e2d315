#include "shapelift/frechet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <vector>

#include "frechet_detail.hpp"
#include "shapelift/rng.hpp"

namespace shapelift {

namespace detail {

namespace {

constexpr int kMaxHalvings = 30;
constexpr std::size_t kInitCandidates = 10;
// Relative slack for the descent test; absorbs summation rounding once the
// iteration has converged to machine precision.
constexpr double kDescentSlack = 64.0 * std::numeric_limits<double>::epsilon();

std::uint64_t content_hash(const Mat& m) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t bits;
    const double v = m.data()[i];
    std::memcpy(&bits, &v, sizeof bits);
    h = CounterRng::mix(h ^ bits);
  }
  return h;
}

}  // namespace

PassResult lift_pass(const Mat& base, const SampleView& samples, ShapeSpaceKind kind,
                     LiftWorkspace& ws, Mat& mean_log) {
  mean_log.setZero(base.rows(), base.cols());
  PassResult result;
  const std::size_t n = samples.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto outcome = lift(base, samples[i].entries(), kind, ws);
    const Candidate& c = *outcome.best;
    if (!outcome.unique) ++result.nonunique;
    result.value += c.distance * c.distance;
    if (c.sine > 0.0) {
      const double f = c.distance / c.sine;
      mean_log += f * c.aligned - (f * c.cosine) * base;
    }
  }
  result.value /= static_cast<double>(n);
  mean_log /= static_cast<double>(n);
  return result;
}

MeanResult frechet_mean(const SampleView& samples, ShapeSpaceKind kind,
                        const MeanOptions& options) {
  const std::size_t n = samples.size();
  if (n == 0) throw Error(ErrorCode::EmptySample, "Fréchet mean of an empty sample");

  LiftWorkspace ws;
  Mat step_log;
  Mat log;

  PreShape mu = samples[0];
  PassResult at_mu;
  if (options.init) {
    mu = *options.init;
    at_mu = lift_pass(mu.entries(), samples, kind, ws, log);
  } else {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed(n);
    for (std::size_t i = 0; i < n; ++i) keyed[i] = {content_hash(samples[i].entries()), i};
    const std::size_t count = std::min(kInitCandidates, n);
    std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(count),
                      keyed.end());
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < count; ++c) {
      const PreShape& candidate = samples[keyed[c].second];
      const PassResult r = lift_pass(candidate.entries(), samples, kind, ws, step_log);
      if (r.value < best) {
        best = r.value;
        mu = candidate;
        at_mu = r;
        log = step_log;
      }
    }
  }

  MeanResult result{mu, 0, log.norm(), at_mu.value, 1.0, false};
  bool stalled = false;
  while (result.iterations < options.max_iter) {
    ++result.iterations;
    if (log.norm() <= options.tol) {
      result.converged = true;
      break;
    }
    double step = 1.0;
    bool accepted = false;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      PreShape candidate = sphere_exp(mu, Mat(step * log));
      const PassResult r = lift_pass(candidate.entries(), samples, kind, ws, step_log);
      if (r.value <= at_mu.value * (1.0 + kDescentSlack)) {
        mu = std::move(candidate);
        at_mu = r;
        log.swap(step_log);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }
  if (!result.converged && !stalled && log.norm() <= options.tol) result.converged = true;

  result.mean = mu;
  result.residual = log.norm();
  result.value = at_mu.value;
  result.unique_alignments =
      1.0 - static_cast<double>(at_mu.nonunique) / static_cast<double>(n);
  return result;
}

}  // namespace detail

double frechet_function(const PreShape& q, std::span<const PreShape> samples,
                        ShapeSpaceKind kind) {
  if (samples.empty()) throw Error(ErrorCode::EmptySample, "Fréchet function of an empty sample");
  detail::LiftWorkspace ws;
  Mat log;
  return detail::lift_pass(q.entries(), detail::SampleView(samples), kind, ws, log).value;
}

MeanResult frechet_mean(std::span<const PreShape> samples, ShapeSpaceKind kind,
                        const MeanOptions& options) {
  return detail::frechet_mean(detail::SampleView(samples), kind, options);
}

MeanResult pooled_mean(std::span<const PreShape> first, std::span<const PreShape> second,
                       ShapeSpaceKind kind, const MeanOptions& options) {
  std::vector<PreShape> all;
  all.reserve(first.size() + second.size());
  all.insert(all.end(), first.begin(), first.end());
  all.insert(all.end(), second.begin(), second.end());
  return frechet_mean(all, kind, options);
}

}  // namespace shapelift
