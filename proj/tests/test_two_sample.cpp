#include <gtest/gtest.h>

#include <algorithm>

#include "shapelift/frechet.hpp"
#include "shapelift/hotelling.hpp"
#include "shapelift/two_sample.hpp"
#include "support.hpp"

namespace shapelift {
namespace {

using testing::Rng;
constexpr auto kRR = ShapeSpaceKind::ReverseLabelingReflection;

Mat buckle() {
  Mat t(2, 5);
  t << -2, -1.5, -0.4, 0.7, 2, 0, 1.6, 1.4, 0.7, 0;
  return t;
}

std::vector<PreShape> noisy(const Mat& tmpl, int n, double sd, Rng& rng) {
  std::vector<PreShape> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(to_preshape(Configuration(Mat(tmpl + testing::random_matrix(tmpl.rows(), tmpl.cols(), rng, sd)))));
  }
  return out;
}

TEST(HorizontalBasis, DimensionsAndOrthogonality) {
  Rng rng(1);
  struct Case { int m, k, d; };
  for (auto c : {Case{2, 5, 6}, Case{2, 3, 2}, Case{3, 5, 8}, Case{3, 4, 5}}) {
    for (auto kind : {ShapeSpaceKind::Rotation, ShapeSpaceKind::Reflection, kRR}) {
      const PreShape p = testing::random_preshape(c.m, c.k, rng);
      const auto basis = horizontal_basis(p, kind);
      ASSERT_EQ(static_cast<int>(basis.size()), c.d);
      for (std::size_t i = 0; i < basis.size(); ++i) {
        const Mat& v = basis[i].entries;
        EXPECT_LT(std::abs(inner(v, p.entries())), 1e-12);
        EXPECT_LT(v.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
        for (std::size_t j = 0; j < basis.size(); ++j) {
          EXPECT_NEAR(inner(v, basis[j].entries), i == j ? 1.0 : 0.0, 1e-10);
        }
        for (int a = 0; a < c.m; ++a) {
          for (int b = a + 1; b < c.m; ++b) {
            Eigen::MatrixXd e = Eigen::MatrixXd::Zero(c.m, c.m);
            e(a, b) = -1;
            e(b, a) = 1;
            EXPECT_LT(std::abs(inner(v, Mat(e * p.entries()))), 1e-12);
          }
        }
      }
    }
  }
}

TEST(HorizontalBasis, RankDeficientBaseIsRejected) {
  // A collinear configuration in 3D has a one-parameter isotropy group.
  Mat line(3, 5);
  line << 0, 1, 2, 4, 7, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0;
  try {
    horizontal_basis(to_preshape(Configuration(line)), kRR);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(LiftToCoords, BaseMapsToZeroAndNormsAreDistances) {
  Rng rng(2);
  const PreShape base = to_preshape(Configuration(buckle()));
  const auto zero = lift_to_coords(base, std::vector<PreShape>(3, base), kRR);
  EXPECT_LT(zero.coords.cwiseAbs().maxCoeff(), 1e-7);

  const auto samples = noisy(buckle(), 50, 0.3, rng);
  const auto tc = lift_to_coords(base, samples, kRR);
  ASSERT_EQ(tc.coords.rows(), 50);
  ASSERT_EQ(tc.coords.cols(), 6);
  for (int j = 0; j < 50; ++j) {
    EXPECT_NEAR(tc.coords.row(j).norm(), shape_distance(base, samples[static_cast<std::size_t>(j)], kRR), 1e-9);
  }
  EXPECT_EQ(tc.nonunique, 0u);
}

TEST(LiftToCoords, StatisticIgnoresTheChoiceOfBasis) {
  Rng rng(3);
  const PreShape base = to_preshape(Configuration(buckle()));
  const auto x = lift_to_coords(base, noisy(buckle(), 30, 0.3, rng), kRR).coords;
  const auto y = lift_to_coords(base, noisy(buckle(), 25, 0.3, rng), kRR).coords;
  const Eigen::MatrixXd q = testing::random_orthogonal(6, rng, false);
  EXPECT_NEAR(hotelling_t2(x * q, y * q), hotelling_t2(x, y), 1e-9);
}

class TwoSampleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    Rng rng(4);
    w_ = noisy(buckle(), 40, 0.2, rng);
    z_ = noisy(buckle(), 35, 0.2, rng);
  }
  std::vector<PreShape> w_;
  std::vector<PreShape> z_;
};

TEST_F(TwoSampleTest, IdenticalGroupsGiveZero) {
  TwoSampleRequest req;
  req.resamples = 200;
  for (bool boot : {false, true}) {
    req.bootstrap = boot;
    for (const auto& r : run_two_sample_tests(w_, w_, req)) {
      ASSERT_TRUE(r.outcome) << to_string(r.variant);
      EXPECT_NEAR(r.outcome->statistic, 0.0, 1e-12) << to_string(r.variant);
      EXPECT_FALSE(r.outcome->reject);
    }
  }
}

TEST_F(TwoSampleTest, OutcomeInvariants) {
  TwoSampleRequest req;
  req.resamples = 300;
  for (bool boot : {false, true}) {
    req.bootstrap = boot;
    for (const auto& r : run_two_sample_tests(w_, z_, req)) {
      ASSERT_TRUE(r.outcome);
      const TestOutcome& o = *r.outcome;
      EXPECT_EQ(o.variant, r.variant);
      EXPECT_EQ(o.bootstrap, boot);
      EXPECT_EQ(o.reject, o.statistic > o.critical_value);
      EXPECT_EQ(o.dof_d, 6);
      EXPECT_EQ(o.dof_k, 73);
      ASSERT_TRUE(o.p_value);
      EXPECT_GE(*o.p_value, 0.0);
      EXPECT_LE(*o.p_value, 1.0);
      EXPECT_FALSE(o.near_singular);
      if (!boot) EXPECT_NEAR(o.critical_value, t2_quantile(6, 73, 0.95), 1e-12);
    }
  }
}

TEST_F(TwoSampleTest, StatisticsInvariantUnderOneGroupElement) {
  Rng rng(5);
  const Eigen::MatrixXd g = testing::random_orthogonal(2, rng, false);
  std::vector<PreShape> gw, gz;
  for (const auto& s : w_) gw.push_back(reverse_label(GroupElement{g, false}.apply(s)));
  for (const auto& s : z_) gz.push_back(reverse_label(GroupElement{g, false}.apply(s)));
  TwoSampleRequest req;
  req.resamples = 200;
  for (bool boot : {false, true}) {
    req.bootstrap = boot;
    const auto a = run_two_sample_tests(w_, z_, req);
    const auto b = run_two_sample_tests(gw, gz, req);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i].outcome->statistic, b[i].outcome->statistic,
                  1e-6 * std::max(1.0, a[i].outcome->statistic));
    }
  }
}

TEST_F(TwoSampleTest, WrappersMatchTheCombinedRunner) {
  TwoSampleRequest req;
  req.bootstrap = false;
  const auto all = run_two_sample_tests(w_, z_, req);
  EXPECT_EQ(test_pooled_lifting(w_, z_, kRR, 0.05).statistic, all[0].outcome->statistic);
  EXPECT_EQ(test_pooled_intrinsic(w_, z_, kRR, 0.05).statistic, all[1].outcome->statistic);
  EXPECT_EQ(test_individual_lifting(w_, z_, kRR, 0.05).statistic, all[2].outcome->statistic);
  EXPECT_EQ(test_individual_asymmetric(w_, z_, kRR, 0.05).statistic, all[3].outcome->statistic);
}

TEST_F(TwoSampleTest, BootstrapIsDeterministicAndIndependentOfVariantSelection) {
  TwoSampleRequest req;
  req.resamples = 250;
  req.seed = 99;
  const auto all = run_two_sample_tests(w_, z_, req);
  const auto again = run_two_sample_tests(w_, z_, req);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const TestOutcome single = bootstrap_test(w_, z_, kRR, 0.05, 250, all[i].variant, 99);
    EXPECT_EQ(single.statistic, all[i].outcome->statistic);
    EXPECT_EQ(single.critical_value, all[i].outcome->critical_value);
    EXPECT_EQ(*single.p_value, *all[i].outcome->p_value);
    EXPECT_EQ(again[i].outcome->critical_value, all[i].outcome->critical_value);
  }
  const TestOutcome other = bootstrap_test(w_, z_, kRR, 0.05, 250, TestVariant::Pooled, 100);
  EXPECT_NE(other.critical_value, all[0].outcome->critical_value);
}

TEST_F(TwoSampleTest, BootstrapNeedsEnoughResamples) {
  EXPECT_THROW(bootstrap_test(w_, z_, kRR, 0.05, 199, TestVariant::Pooled, 1), Error);
  const TestOutcome o = bootstrap_test(w_, z_, kRR, 0.05, 200, TestVariant::Pooled, 1);
  EXPECT_TRUE(std::any_of(o.warnings.begin(), o.warnings.end(),
                          [](const std::string& w) { return w.find("1000") != std::string::npos; }));
}

TEST_F(TwoSampleTest, ClearSeparationIsDetected) {
  Mat shifted = buckle();
  shifted(1, 1) += 0.8;
  Rng rng(6);
  const auto far = noisy(shifted, 35, 0.2, rng);
  TwoSampleRequest req;
  req.resamples = 200;
  for (bool boot : {false, true}) {
    req.bootstrap = boot;
    for (const auto& r : run_two_sample_tests(w_, far, req)) {
      EXPECT_TRUE(r.outcome->reject) << to_string(r.variant);
    }
  }
}

TEST_F(TwoSampleTest, AsymmetricVariantRunsInBothOrders) {
  const TestOutcome wz = test_individual_asymmetric(w_, z_, kRR, 0.05);
  const TestOutcome zw = test_individual_asymmetric(z_, w_, kRR, 0.05);
  EXPECT_GT(wz.statistic, 0.0);
  EXPECT_GT(zw.statistic, 0.0);
}

TEST(TwoSampleErrors, SingularCovarianceIsReportedPerVariant) {
  Rng rng(7);
  const PreShape p = to_preshape(Configuration(buckle()));
  const std::vector<PreShape> flat(5, p);
  TwoSampleRequest req;
  req.bootstrap = false;
  for (const auto& r : run_two_sample_tests(flat, flat, req)) {
    ASSERT_TRUE(r.failure);
    EXPECT_EQ(r.failure->code(), ErrorCode::SingularCovariance);
  }
  EXPECT_THROW(test_pooled_lifting(flat, flat, kRR, 0.05), Error);
}

TEST(TwoSampleErrors, InputValidation) {
  Rng rng(8);
  const auto w = noisy(buckle(), 10, 0.2, rng);
  const std::vector<PreShape> one{w.front()};
  EXPECT_THROW(test_pooled_lifting(w, one, kRR, 0.05), Error);
  EXPECT_THROW(test_pooled_lifting(w, w, kRR, 1.5), Error);
  std::vector<PreShape> other{testing::random_preshape(2, 6, rng), testing::random_preshape(2, 6, rng)};
  EXPECT_THROW(test_pooled_lifting(w, other, kRR, 0.05), Error);
  EXPECT_EQ(parse_test_variant("pooled_tangent"), TestVariant::Pooled);
  for (auto v : kAllVariants) EXPECT_EQ(parse_test_variant(to_string(v)), v);
  EXPECT_THROW(parse_test_variant("t_j"), Error);
}

}  // namespace
}  // namespace shapelift
