#include "shapelift/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/random/uniform_int_distribution.hpp>

#include "frechet_detail.hpp"
#include "lift_kernel.hpp"
#include "shapelift/frechet.hpp"
#include "shapelift/hotelling.hpp"
#include "shapelift/rng.hpp"

namespace shapelift {

std::string_view to_string(TestVariant variant) noexcept {
  switch (variant) {
    case TestVariant::Pooled: return "pooled";
    case TestVariant::PooledIntrinsic: return "pooled_intrinsic";
    case TestVariant::Individual: return "individual";
    case TestVariant::IndividualAsymmetric: return "individual_asymmetric";
  }
  return "unknown";
}

TestVariant parse_test_variant(std::string_view name) {
  for (TestVariant v : kAllVariants) {
    if (to_string(v) == name) return v;
  }
  if (name == "pooled_tangent") return TestVariant::Pooled;
  throw Error(ErrorCode::InvalidArgument, "unknown test variant '" + std::string(name) + "'");
}

namespace {

using Vec = Eigen::VectorXd;

Eigen::Map<const Vec> flat(const Mat& m) { return {m.data(), m.size()}; }

Mat unflat(const Eigen::Ref<const Vec>& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Eigen::MatrixXd basis_matrix(const std::vector<TangentVector>& basis) {
  const auto size = basis.front().entries.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(basis.size()), size);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = flat(basis[i].entries).transpose();
  }
  return out;
}

/// Writes log_base(lift(base, x)) into `out`; returns whether the lift was unique.
bool lifted_log(const Mat& base, const Mat& x, ShapeSpaceKind kind, detail::LiftWorkspace& ws,
                Mat& out) {
  const auto outcome = detail::lift(base, x, kind, ws);
  const detail::Candidate& c = *outcome.best;
  if (c.sine > 0.0) {
    out = (c.distance / c.sine) * (c.aligned - c.cosine * base);
  } else {
    out.setZero(base.rows(), base.cols());
  }
  return outcome.unique;
}

// One group's coordinate system inside a variant: samples are lifted to
// `base`, their logs mapped by `transform` and shifted by `offset` (the
// location of `base` in the common frame).
struct Frame {
  Mat base;
  Eigen::MatrixXd transform;
  Vec offset;
  Eigen::MatrixXd rows;
  Vec intrinsic_mean;
  std::size_t nonunique = 0;

  Vec locate(const Mat& x, ShapeSpaceKind kind, detail::LiftWorkspace& ws, Mat& log,
             bool* unique = nullptr) const {
    const bool u = lifted_log(base, x, kind, ws, log);
    if (unique) *unique = u;
    return offset + transform * flat(log);
  }
};

Frame make_frame(Mat base, Eigen::MatrixXd transform, Vec offset,
                 std::span<const PreShape> samples, const PreShape& group_mean,
                 ShapeSpaceKind kind) {
  Frame f{std::move(base), std::move(transform), std::move(offset), {}, {}, 0};
  detail::LiftWorkspace ws;
  Mat log;
  f.rows.resize(static_cast<Eigen::Index>(samples.size()), f.transform.rows());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    bool unique = true;
    f.rows.row(static_cast<Eigen::Index>(j)) =
        f.locate(samples[j].entries(), kind, ws, log, &unique).transpose();
    if (!unique) ++f.nonunique;
  }
  f.intrinsic_mean = f.locate(group_mean.entries(), kind, ws, log);
  return f;
}

/// Rows: basis vectors at `from` transported to `to`, so that transform * v
/// gives the `from`-basis coordinates of the transport of v in T_to back to
/// T_from.
Eigen::MatrixXd transported_transform(const std::vector<TangentVector>& basis, const Mat& from,
                                      const Mat& to) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(basis.size()), from.size());
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Mat moved = parallel_transport(from, to, basis[i].entries);
    out.row(static_cast<Eigen::Index>(i)) = flat(moved).transpose();
  }
  return out;
}

struct VariantFrames {
  TestVariant variant;
  Frame w;
  Frame z;
  std::vector<std::string> warnings;

  bool tangent() const { return variant == TestVariant::Pooled; }
  Vec center_w() const { return tangent() ? Vec(w.rows.colwise().mean()) : w.intrinsic_mean; }
  Vec center_z() const { return tangent() ? Vec(z.rows.colwise().mean()) : z.intrinsic_mean; }
};

struct Shared {
  ShapeSpaceKind kind;
  std::span<const PreShape> w;
  std::span<const PreShape> z;
  MeanResult mean_w;
  MeanResult mean_z;
  std::optional<MeanResult> pooled;
  std::vector<std::string> warnings;
  bool near_singular = false;
};

void check_mean(const MeanResult& r, const char* label, ShapeSpaceKind kind, Shared& s) {
  if (!r.converged) {
    s.warnings.push_back(std::string(label) + " Fréchet mean did not converge (residual " +
                         std::to_string(r.residual) + ")");
  }
  if (!isotropy_check(r.mean, kind)) {
    s.near_singular = true;
    s.warnings.push_back(std::string(label) + " mean has nontrivial isotropy");
  }
}

void nonunique_warning(const Frame& f, const char* label, std::vector<std::string>& out) {
  if (f.nonunique > 0) {
    out.push_back(std::to_string(f.nonunique) + " non-unique lifts in group " + label);
  }
}

VariantFrames build_frames(TestVariant variant, const Shared& s) {
  const ShapeSpaceKind kind = s.kind;
  const PreShape& nu_w = s.mean_w.mean;
  const PreShape& nu_z = s.mean_z.mean;
  const auto d = quotient_dimension(nu_w.dim(), nu_w.landmarks());
  VariantFrames out{variant, {}, {}, {}};

  if (variant == TestVariant::IndividualAsymmetric) {
    const auto basis = horizontal_basis(nu_w, kind);
    const Eigen::MatrixXd bw = basis_matrix(basis);
    const AlignmentResult placed = optimal_lift(nu_w, nu_z, kind);
    if (!placed.unique) out.warnings.push_back("Z mean not uniquely positioned to W mean");
    const Mat& mu_z = placed.aligned.entries();
    Mat log;
    detail::log_into(nu_w.entries(), mu_z, log);
    out.w = make_frame(nu_w.entries(), bw, Vec::Zero(d), s.w, nu_w, kind);
    out.z = make_frame(mu_z, transported_transform(basis, nu_w.entries(), mu_z), bw * flat(log),
                       s.z, nu_z, kind);
  } else {
    const PreShape& pool = s.pooled->mean;
    const auto basis = horizontal_basis(pool, kind);
    const Eigen::MatrixXd bp = basis_matrix(basis);
    if (variant == TestVariant::Individual) {
      Mat log;
      const auto individual = [&](const PreShape& nu, std::span<const PreShape> samples,
                                  const char* label) {
        const AlignmentResult placed = optimal_lift(pool, nu, kind);
        if (!placed.unique) {
          out.warnings.push_back(std::string(label) + " mean not uniquely positioned to pooled mean");
        }
        const Mat& mu = placed.aligned.entries();
        detail::log_into(pool.entries(), mu, log);
        return make_frame(mu, transported_transform(basis, pool.entries(), mu), bp * flat(log),
                          samples, nu, kind);
      };
      out.w = individual(nu_w, s.w, "W");
      out.z = individual(nu_z, s.z, "Z");
    } else {
      out.w = make_frame(pool.entries(), bp, Vec::Zero(d), s.w, nu_w, kind);
      out.z = make_frame(pool.entries(), bp, Vec::Zero(d), s.z, nu_z, kind);
    }
  }
  nonunique_warning(out.w, "W", out.warnings);
  nonunique_warning(out.z, "Z", out.warnings);
  return out;
}

TestOutcome base_outcome(const VariantFrames& f, const Shared& s, bool bootstrap) {
  TestOutcome o;
  o.variant = f.variant;
  o.bootstrap = bootstrap;
  o.dof_d = static_cast<int>(f.w.rows.cols());
  o.dof_k = static_cast<int>(s.w.size() + s.z.size()) - 2;
  o.near_singular = s.near_singular;
  o.warnings = s.warnings;
  o.warnings.insert(o.warnings.end(), f.warnings.begin(), f.warnings.end());
  return o;
}

TestOutcome hotelling_outcome(const VariantFrames& f, const Shared& s, double alpha) {
  TestOutcome o = base_outcome(f, s, false);
  std::optional<std::pair<Vec, Vec>> means;
  if (!f.tangent()) means.emplace(f.w.intrinsic_mean, f.z.intrinsic_mean);
  o.statistic = hotelling_t2(f.w.rows, f.z.rows, means);
  o.critical_value = t2_quantile(o.dof_d, o.dof_k, 1.0 - alpha);
  o.p_value = t2_survival(o.statistic, o.dof_d, o.dof_k);
  o.reject = o.statistic > o.critical_value;
  return o;
}

std::vector<std::size_t> draw_indices(CounterRng rng, std::size_t n) {
  boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = pick(rng);
  return idx;
}

Vec row_mean(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& idx) {
  Vec sum = Vec::Zero(rows.cols());
  for (std::size_t i : idx) sum += rows.row(static_cast<Eigen::Index>(i)).transpose();
  return sum / static_cast<double>(idx.size());
}

Eigen::MatrixXd resample_cov(const Eigen::MatrixXd& rows, const std::vector<std::size_t>& idx,
                             const Vec& center) {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  for (std::size_t i : idx) {
    const Vec dev = rows.row(static_cast<Eigen::Index>(i)).transpose() - center;
    cov.noalias() += dev * dev.transpose();
  }
  return cov / static_cast<double>(idx.size());
}

struct ResampledMeans {
  std::optional<MeanResult> w;
  std::optional<MeanResult> z;
};

// Fréchet means of one resample of each group, warm-started at the group means.
ResampledMeans resampled_means(const Shared& s, const std::vector<std::size_t>& iw,
                               const std::vector<std::size_t>& iz, bool needed) {
  ResampledMeans out;
  if (!needed) return out;
  MeanOptions ow;
  ow.init = s.mean_w.mean;
  out.w = detail::frechet_mean(detail::SampleView(s.w, iw), s.kind, ow);
  MeanOptions oz;
  oz.init = s.mean_z.mean;
  out.z = detail::frechet_mean(detail::SampleView(s.z, iz), s.kind, oz);
  return out;
}

Vec resample_center(const Frame& f, bool tangent, const std::vector<std::size_t>& idx,
                    const std::optional<MeanResult>& mean, ShapeSpaceKind kind,
                    detail::LiftWorkspace& ws, Mat& log) {
  if (tangent) return row_mean(f.rows, idx);
  return f.locate(mean->mean.entries(), kind, ws, log);
}

struct BootstrapState {
  Eigen::LDLT<Eigen::MatrixXd> c_inv;
  Vec center_w;
  Vec center_z;
  double observed = 0.0;
  std::vector<double> replicates;
};

void validate_inputs(std::span<const PreShape> w, std::span<const PreShape> z) {
  if (w.size() < 2 || z.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "each group needs at least two samples");
  }
  const int m = w.front().dim();
  const int k = w.front().landmarks();
  for (auto group : {w, z}) {
    for (const PreShape& p : group) {
      if (p.dim() != m || p.landmarks() != k) {
        throw Error(ErrorCode::DimensionMismatch, "all samples must share m and k");
      }
    }
  }
}

}  // namespace

std::vector<TangentVector> horizontal_basis(const PreShape& p, ShapeSpaceKind kind) {
  (void)kind;  // the finite factors of every supported group add no vertical directions
  const Eigen::Index m = p.dim();
  const Eigen::Index k = p.landmarks();
  const Eigen::MatrixXd h = helmert_submatrix(static_cast<int>(k));
  const Eigen::Index n = m * (k - 1);
  const Eigen::Index generators = m * (m - 1) / 2;

  // Spanning set of normal + vertical directions in Helmert coordinates.
  Eigen::MatrixXd span(n, 1 + generators);
  const Mat ph = p.entries() * h;
  span.col(0) = flat(ph);
  Eigen::Index col = 1;
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = a + 1; b < m; ++b) {
      Mat ep = Mat::Zero(m, k - 1);
      ep.row(b) += ph.row(a);
      ep.row(a) -= ph.row(b);
      span.col(col++) = flat(ep);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(span, Eigen::ComputeFullU);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    if (svd.singularValues()(i) > 1e-9) ++rank;
  }
  const int expected = quotient_dimension(static_cast<int>(m), static_cast<int>(k));
  if (n - rank != expected) {
    throw Error(ErrorCode::DimensionMismatch,
                "horizontal space has dimension " + std::to_string(n - rank) + ", expected " +
                    std::to_string(expected) + " (rank-deficient base point)");
  }
  std::vector<TangentVector> basis;
  basis.reserve(static_cast<std::size_t>(expected));
  for (Eigen::Index i = rank; i < n; ++i) {
    const Mat x = unflat(svd.matrixU().col(i), m, k - 1);
    basis.push_back(TangentVector{p, x * h.transpose()});
  }
  return basis;
}

TangentCoordinates lift_to_coords(const PreShape& base, std::span<const PreShape> samples,
                                  ShapeSpaceKind kind) {
  TangentCoordinates out{base, horizontal_basis(base, kind), {}, 0};
  const Eigen::MatrixXd b = basis_matrix(out.basis);
  out.coords.resize(static_cast<Eigen::Index>(samples.size()), b.rows());
  detail::LiftWorkspace ws;
  Mat log;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    if (samples[j].dim() != base.dim() || samples[j].landmarks() != base.landmarks()) {
      throw Error(ErrorCode::DimensionMismatch, "sample size differs from base");
    }
    if (!lifted_log(base.entries(), samples[j].entries(), kind, ws, log)) ++out.nonunique;
    out.coords.row(static_cast<Eigen::Index>(j)) = (b * flat(log)).transpose();
  }
  return out;
}

std::vector<VariantResult> run_two_sample_tests(std::span<const PreShape> w,
                                                std::span<const PreShape> z,
                                                const TwoSampleRequest& request) {
  validate_inputs(w, z);
  if (!(request.alpha > 0.0 && request.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  if (request.bootstrap && request.resamples < 200) {
    throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least 200 resamples");
  }

  Shared s{request.kind, w, z, frechet_mean(w, request.kind), frechet_mean(z, request.kind),
           std::nullopt, {}, false};
  const bool need_pooled =
      std::any_of(request.variants.begin(), request.variants.end(),
                  [](TestVariant v) { return v != TestVariant::IndividualAsymmetric; });
  check_mean(s.mean_w, "W", s.kind, s);
  check_mean(s.mean_z, "Z", s.kind, s);
  if (need_pooled) {
    s.pooled = pooled_mean(w, z, request.kind);
    check_mean(*s.pooled, "pooled", s.kind, s);
  }
  if (request.bootstrap && request.resamples < 1000) {
    s.warnings.push_back("fewer than 1000 bootstrap resamples");
  }

  std::vector<VariantResult> results;
  std::vector<VariantFrames> frames;
  std::vector<std::size_t> slot;  // index into `frames` for each result still alive
  for (TestVariant v : request.variants) {
    VariantResult r{v, std::nullopt, std::nullopt};
    try {
      frames.push_back(build_frames(v, s));
      slot.push_back(frames.size() - 1);
    } catch (const Error& e) {
      r.failure = e;
      slot.push_back(static_cast<std::size_t>(-1));
    }
    results.push_back(std::move(r));
  }

  if (!request.bootstrap) {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (slot[i] == static_cast<std::size_t>(-1)) continue;
      try {
        results[i].outcome = hotelling_outcome(frames[slot[i]], s, request.alpha);
      } catch (const Error& e) {
        results[i].failure = e;
      }
    }
    return results;
  }

  // Bootstrap: round one fixes C, round two calibrates.
  const bool need_means =
      std::any_of(frames.begin(), frames.end(), [](const VariantFrames& f) { return !f.tangent(); });
  const CounterRng root(request.seed);
  detail::LiftWorkspace ws;
  Mat log;

  const auto w1 = draw_indices(root.substream(1), w.size());
  const auto z1 = draw_indices(root.substream(2), z.size());
  const ResampledMeans first = resampled_means(s, w1, z1, need_means);

  std::vector<std::optional<BootstrapState>> states(frames.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (slot[i] == static_cast<std::size_t>(-1)) continue;
    const VariantFrames& f = frames[slot[i]];
    try {
      const Vec cw = resample_center(f.w, f.tangent(), w1, first.w, s.kind, ws, log);
      const Vec cz = resample_center(f.z, f.tangent(), z1, first.z, s.kind, ws, log);
      const Eigen::MatrixXd c = resample_cov(f.w.rows, w1, cw) + resample_cov(f.z.rows, z1, cz);
      require_well_conditioned(c);
      BootstrapState st;
      st.c_inv.compute(c);
      st.center_w = f.center_w();
      st.center_z = f.center_z();
      const Vec delta = st.center_w - st.center_z;
      st.observed = delta.dot(st.c_inv.solve(delta));
      st.replicates.reserve(static_cast<std::size_t>(request.resamples));
      states[slot[i]] = std::move(st);
    } catch (const Error& e) {
      results[i].failure = e;
    }
  }

  const CounterRng second(CounterRng::derive_key(request.seed, 3));
  std::size_t stalled = 0;
  for (int b = 0; b < request.resamples; ++b) {
    const auto wb = draw_indices(second.substream(2 * static_cast<std::uint64_t>(b)), w.size());
    const auto zb = draw_indices(second.substream(2 * static_cast<std::uint64_t>(b) + 1), z.size());
    const ResampledMeans rm = resampled_means(s, wb, zb, need_means);
    if (need_means && (!rm.w->converged || !rm.z->converged)) ++stalled;
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      if (!states[fi]) continue;
      const VariantFrames& f = frames[fi];
      BootstrapState& st = *states[fi];
      const Vec dw = resample_center(f.w, f.tangent(), wb, rm.w, s.kind, ws, log) - st.center_w;
      const Vec dz = resample_center(f.z, f.tangent(), zb, rm.z, s.kind, ws, log) - st.center_z;
      const Vec diff = dw - dz;
      st.replicates.push_back(diff.dot(st.c_inv.solve(diff)));
    }
  }

  const auto resamples = static_cast<std::size_t>(request.resamples);
  auto rank = static_cast<std::size_t>(
      std::ceil((1.0 - request.alpha) * static_cast<double>(resamples) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, resamples);
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (slot[i] == static_cast<std::size_t>(-1) || !states[slot[i]]) continue;
    const VariantFrames& f = frames[slot[i]];
    BootstrapState& st = *states[slot[i]];
    TestOutcome o = base_outcome(f, s, true);
    const auto exceed = std::count_if(st.replicates.begin(), st.replicates.end(),
                                      [&](double t) { return t >= st.observed; });
    std::nth_element(st.replicates.begin(),
                     st.replicates.begin() + static_cast<std::ptrdiff_t>(rank - 1),
                     st.replicates.end());
    o.statistic = st.observed;
    o.critical_value = st.replicates[rank - 1];
    o.p_value = static_cast<double>(exceed) / static_cast<double>(resamples);
    o.reject = o.statistic > o.critical_value;
    if (stalled > 0 && !f.tangent()) {
      o.warnings.push_back(std::to_string(stalled) + " bootstrap resamples with unconverged means");
    }
    results[i].outcome = std::move(o);
  }
  return results;
}

namespace {

TestOutcome single(std::span<const PreShape> w, std::span<const PreShape> z,
                   TwoSampleRequest request) {
  auto results = run_two_sample_tests(w, z, request);
  auto& r = results.front();
  if (r.failure) throw *r.failure;
  return std::move(*r.outcome);
}

TwoSampleRequest quantile_request(ShapeSpaceKind kind, double alpha, TestVariant v) {
  TwoSampleRequest r;
  r.kind = kind;
  r.alpha = alpha;
  r.variants = {v};
  r.bootstrap = false;
  return r;
}

}  // namespace

TestOutcome test_pooled_lifting(std::span<const PreShape> w, std::span<const PreShape> z,
                                ShapeSpaceKind kind, double alpha) {
  return single(w, z, quantile_request(kind, alpha, TestVariant::Pooled));
}

TestOutcome test_pooled_intrinsic(std::span<const PreShape> w, std::span<const PreShape> z,
                                  ShapeSpaceKind kind, double alpha) {
  return single(w, z, quantile_request(kind, alpha, TestVariant::PooledIntrinsic));
}

TestOutcome test_individual_lifting(std::span<const PreShape> w, std::span<const PreShape> z,
                                    ShapeSpaceKind kind, double alpha) {
  return single(w, z, quantile_request(kind, alpha, TestVariant::Individual));
}

TestOutcome test_individual_asymmetric(std::span<const PreShape> w,
                                       std::span<const PreShape> z, ShapeSpaceKind kind,
                                       double alpha) {
  return single(w, z, quantile_request(kind, alpha, TestVariant::IndividualAsymmetric));
}

TestOutcome bootstrap_test(std::span<const PreShape> w, std::span<const PreShape> z,
                           ShapeSpaceKind kind, double alpha, int resamples,
                           TestVariant variant, std::uint64_t seed) {
  TwoSampleRequest r;
  r.kind = kind;
  r.alpha = alpha;
  r.variants = {variant};
  r.bootstrap = true;
  r.resamples = resamples;
  r.seed = seed;
  return single(w, z, r);
}

}  // namespace shapelift
