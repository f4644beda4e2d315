#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shapelift/geometry.hpp"
#include "support.hpp"

namespace shapelift {
namespace {

using testing::Rng;

Mat three_in_a_row() {
  Mat c(2, 3);
  c << 0, 1, 2, 0, 0, 0;
  return c;
}

TEST(Center, CollinearSymmetricCase) {
  Mat expected(2, 3);
  expected << -1, 0, 1, 0, 0, 0;
  EXPECT_TRUE(center(three_in_a_row()).isApprox(expected));
}

TEST(Center, IdempotentAndRemovesMean) {
  Rng rng(1);
  for (int t = 0; t < 20; ++t) {
    const Mat c = testing::random_matrix(2, 5, rng);
    const Mat once = center(c);
    EXPECT_LT(once.rowwise().sum().cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((center(once) - once).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Configuration, RejectsBadShapes) {
  EXPECT_THROW(Configuration(Mat::Zero(2, 2)), Error);
  EXPECT_THROW(Configuration(Mat::Zero(3, 3)), Error);
  Mat bad = Mat::Zero(2, 4);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(Configuration{bad}, Error);
}

TEST(Helmert, DisplayedColumns) {
  const Eigen::MatrixXd h2 = helmert_submatrix(2);
  ASSERT_EQ(h2.rows(), 2);
  ASSERT_EQ(h2.cols(), 1);
  EXPECT_NEAR(h2(0, 0), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(h2(1, 0), -1 / std::sqrt(2.0), 1e-15);

  const Eigen::MatrixXd h3 = helmert_submatrix(3);
  EXPECT_NEAR(h3(0, 1), 1 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(h3(1, 1), 1 / std::sqrt(6.0), 1e-15);
  EXPECT_NEAR(h3(2, 1), -2 / std::sqrt(6.0), 1e-15);
}

TEST(Helmert, OrthonormalAndOrthogonalToOnes) {
  for (int k = 2; k <= 20; ++k) {
    const Eigen::MatrixXd h = helmert_submatrix(k);
    EXPECT_LT((h.transpose() * h - Eigen::MatrixXd::Identity(k - 1, k - 1)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((Eigen::RowVectorXd::Ones(k) * h).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_THROW(helmert_submatrix(1), Error);
}

TEST(Helmertize, DiagonalOrbitMapsToZero) {
  Mat c(2, 4);
  c << 3, 3, 3, 3, -1, -1, -1, -1;
  EXPECT_LT(helmertize(c).norm(), 1e-14);
}

TEST(Helmertize, IsometryAndRoundTrip) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const Mat c = testing::random_matrix(3, 7, rng);
    const Mat hc = helmertize(c);
    EXPECT_NEAR(hc.norm(), center(c).norm(), 1e-12);
    const Eigen::MatrixXd h = helmert_submatrix(7);
    EXPECT_LT((Mat(hc * h.transpose()) - center(c)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ToPreshape, HandComputedNorm) {
  const PreShape p = to_preshape(Configuration(three_in_a_row()));
  Mat expected(2, 3);
  expected << -1, 0, 1, 0, 0, 0;
  expected /= std::sqrt(2.0);
  EXPECT_LT((p.entries() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ToPreshape, DiagonalOrbitIsDegenerate) {
  Mat c(2, 3);
  c << 5, 5, 5, 2, 2, 2;
  try {
    to_preshape(Configuration(c));
    FAIL() << "expected degenerate-configuration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
  EXPECT_THROW(to_preshape(Configuration(Mat::Zero(2, 3))), Error);
}

TEST(ToPreshape, Idempotent) {
  Rng rng(3);
  const PreShape p = testing::random_preshape(2, 6, rng);
  const PreShape q = to_preshape(Configuration(p.entries()));
  EXPECT_LT((p.entries() - q.entries()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PreShape, ValidatesInvariants) {
  Mat c(2, 3);
  c << 1, 0, 0, 0, 0, 0;
  EXPECT_THROW(PreShape::from_matrix(c), Error);
  Rng rng(4);
  const PreShape p = testing::random_preshape(2, 4, rng);
  EXPECT_NO_THROW(PreShape::from_matrix(p.entries()));
  EXPECT_THROW(PreShape::from_matrix(2.0 * p.entries()), Error);
}

TEST(SphereDistance, Landmarks) {
  Rng rng(5);
  const PreShape a = testing::random_preshape(2, 5, rng);
  EXPECT_EQ(sphere_distance(a, a), 0.0);
  EXPECT_NEAR(sphere_distance(a, -a), std::numbers::pi, 1e-15);
  const Mat v = testing::random_tangent(a, rng, 1.0);
  EXPECT_NEAR(sphere_distance(a, PreShape::from_matrix(v)), std::numbers::pi / 2, 1e-14);
}

TEST(SphereDistance, IsAMetric) {
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const PreShape a = testing::random_preshape(2, 4, rng);
    const PreShape b = testing::random_preshape(2, 4, rng);
    const PreShape c = testing::random_preshape(2, 4, rng);
    ASSERT_EQ(sphere_distance(a, b), sphere_distance(b, a));
    ASSERT_LE(sphere_distance(a, c), sphere_distance(a, b) + sphere_distance(b, c) + 1e-12);
  }
}

TEST(SphereExp, ZeroAndAntipode) {
  Rng rng(7);
  const PreShape p = testing::random_preshape(3, 6, rng);
  EXPECT_EQ(sphere_exp(p, Mat(Mat::Zero(3, 6))).entries(), p.entries());
  const Mat v = testing::random_tangent(p, rng, std::numbers::pi);
  EXPECT_LT((sphere_exp(p, v).entries() + p.entries()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SphereExp, MovesByTheTangentNorm) {
  Rng rng(8);
  for (int t = 0; t < 200; ++t) {
    const PreShape p = testing::random_preshape(2, 5, rng);
    const double len = 3.1 * (t + 0.5) / 200;
    const PreShape q = sphere_exp(p, testing::random_tangent(p, rng, len));
    EXPECT_NEAR(sphere_distance(p, q), len, 1e-10);
    EXPECT_NO_THROW(PreShape::from_matrix(q.entries()));
  }
}

TEST(SphereLog, ZeroAtBaseAndErrorAtAntipode) {
  Rng rng(9);
  const PreShape p = testing::random_preshape(2, 5, rng);
  EXPECT_LT(sphere_log(p, p).norm(), 1e-15);
  try {
    sphere_log(p, -p);
    FAIL() << "expected antipodal-point";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AntipodalPoint);
  }
}

TEST(SphereLog, InvertsExp) {
  Rng rng(10);
  for (int t = 0; t < 1000; ++t) {
    const PreShape p = testing::random_preshape(2, 5, rng);
    std::uniform_real_distribution<double> len(0.0, 3.0);
    const Mat v = testing::random_tangent(p, rng, len(rng));
    const PreShape q = sphere_exp(p, v);
    const TangentVector back = sphere_log(p, q);
    ASSERT_LT((back.entries - v).norm(), 1e-9);
    ASSERT_LT((sphere_exp(p, back).entries() - q.entries()).norm(), 1e-10);
    ASSERT_NEAR(back.norm(), sphere_distance(p, q), 1e-12);
  }
}

TEST(ParallelTransport, IdentityWhenBasesCoincide) {
  Rng rng(11);
  const PreShape p = testing::random_preshape(2, 5, rng);
  const Mat v = testing::random_tangent(p, rng, 0.7);
  EXPECT_LT((parallel_transport(p.entries(), p.entries(), v) - v).norm(), 1e-15);
}

TEST(ParallelTransport, IsometryTangencyAndReversibility) {
  Rng rng(12);
  for (int t = 0; t < 500; ++t) {
    const PreShape p = testing::random_preshape(3, 6, rng);
    const PreShape q = sphere_exp(p, testing::random_tangent(p, rng, 2.5 * (t + 1) / 500));
    const Mat v = testing::random_tangent(p, rng, 1.3);
    const Mat w = testing::random_tangent(p, rng, 0.4);
    const Mat tv = parallel_transport(p.entries(), q.entries(), v);
    const Mat tw = parallel_transport(p.entries(), q.entries(), w);
    ASSERT_NEAR(tv.norm(), v.norm(), 1e-12);
    ASSERT_NEAR(inner(tv, tw), inner(v, w), 1e-12);
    ASSERT_LT(std::abs(inner(tv, q.entries())), 1e-12);
    ASSERT_LT(tv.rowwise().sum().cwiseAbs().maxCoeff(), 1e-12);
    ASSERT_LT((parallel_transport(q.entries(), p.entries(), tv) - v).norm(), 1e-10);
  }
}

TEST(ParallelTransport, CarriesTheGeodesicVelocity) {
  // Transporting log_p(q) to q gives minus log_q(p).
  Rng rng(13);
  const PreShape p = testing::random_preshape(2, 5, rng);
  const PreShape q = sphere_exp(p, testing::random_tangent(p, rng, 1.1));
  const Mat moved = parallel_transport(p.entries(), q.entries(), sphere_log(p, q).entries);
  EXPECT_LT((moved + sphere_log(q, p).entries).norm(), 1e-12);
}

TEST(ParallelTransport, AntipodesAreRejected) {
  Rng rng(14);
  const PreShape p = testing::random_preshape(2, 5, rng);
  const Mat v = testing::random_tangent(p, rng, 1.0);
  EXPECT_THROW(parallel_transport(p.entries(), Mat(-p.entries()), v), Error);
}

}  // namespace
}  // namespace shapelift
