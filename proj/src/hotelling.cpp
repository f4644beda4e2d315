#include "shapelift/hotelling.hpp"

#include <cmath>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "shapelift/error.hpp"

namespace shapelift {

namespace {

Eigen::MatrixXd scatter(const Eigen::MatrixXd& rows, const Eigen::VectorXd& center) {
  const Eigen::MatrixXd dev = rows.rowwise() - center.transpose();
  return dev.transpose() * dev;
}

}  // namespace

void require_well_conditioned(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    throw Error(ErrorCode::SingularCovariance,
                "covariance is singular or ill-conditioned (eigenvalues " + std::to_string(lo) +
                    " .. " + std::to_string(hi) + ")");
  }
}

double mahalanobis_form(const Eigen::VectorXd& delta, const Eigen::MatrixXd& c) {
  require_well_conditioned(c);
  return delta.dot(c.ldlt().solve(delta));
}

double hotelling_t2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& means) {
  const auto n = static_cast<double>(x.rows());
  const auto m = static_cast<double>(y.rows());
  const auto d = x.cols();
  if (y.cols() != d) throw Error(ErrorCode::DimensionMismatch, "coordinate dimensions differ");
  if (x.rows() + y.rows() - 2 < d || x.rows() == 0 || y.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "need n + m - 2 >= d observations");
  }
  const Eigen::VectorXd xbar = means ? means->first : Eigen::VectorXd(x.colwise().mean());
  const Eigen::VectorXd ybar = means ? means->second : Eigen::VectorXd(y.colwise().mean());
  const Eigen::MatrixXd pooled = (scatter(x, xbar) + scatter(y, ybar)) / (n + m - 2.0);
  return (n * m / (n + m)) * mahalanobis_form(xbar - ybar, pooled);
}

double f_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  const double u = d1 * x / (d1 * x + d2);
  return boost::math::ibeta(d1 / 2.0, d2 / 2.0, u);
}

double f_quantile(double p, double d1, double d2) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile level must lie in (0, 1)");
  }
  const double u = boost::math::ibeta_inv(d1 / 2.0, d2 / 2.0, p);
  return d2 * u / (d1 * (1.0 - u));
}

double t2_quantile(int d, int k, double p) {
  if (d < 1 || k < d) {
    throw Error(ErrorCode::InvalidArgument, "t2_quantile requires k >= d >= 1");
  }
  const double df2 = static_cast<double>(k - d + 1);
  return static_cast<double>(d) * k / df2 * f_quantile(p, d, df2);
}

double t2_survival(double t, int d, int k) {
  if (d < 1 || k < d) {
    throw Error(ErrorCode::InvalidArgument, "t2_survival requires k >= d >= 1");
  }
  const double df2 = static_cast<double>(k - d + 1);
  const double f = t * df2 / (static_cast<double>(d) * k);
  if (f <= 0.0) return 1.0;
  const double u = d * f / (d * f + df2);
  return boost::math::ibetac(d / 2.0, df2 / 2.0, u);
}

}  // namespace shapelift
