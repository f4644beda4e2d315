#pragma once

// Two-sample Hotelling T^2 machinery on tangent-space coordinates.

#include <optional>
#include <utility>

#include <Eigen/Dense>

namespace shapelift {

/// Covariances whose condition number exceeds this are rejected.
inline constexpr double kMaxConditionNumber = 1e12;

/// (nm/(n+m)) (xbar - ybar)^T S^{-1} (xbar - ybar) with pooled covariance
/// S = (n cov_n[X] + m cov_m[Y]) / (n+m-2).
///
/// Rows of `x` and `y` are observations. Without `means` the covariances are
/// centered at the row averages; with `means` = (xbar, ybar) they are
/// centered at the supplied (intrinsic) mean vectors, which also form the
/// difference. Throws SingularCovariance when S is not safely invertible and
/// InvalidArgument when n + m - 2 < d.
double hotelling_t2(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& means =
                        std::nullopt);

/// delta^T C^{-1} delta, with the same conditioning guard as hotelling_t2.
double mahalanobis_form(const Eigen::VectorXd& delta, const Eigen::MatrixXd& c);

/// Throws SingularCovariance unless c is symmetric positive definite with
/// condition number at most kMaxConditionNumber.
void require_well_conditioned(const Eigen::MatrixXd& c);

/// CDF of the F(d1, d2) distribution.
double f_cdf(double x, double d1, double d2);

/// Quantile of F(d1, d2) through the inverse regularized incomplete beta.
double f_quantile(double p, double d1, double d2);

/// Quantile at probability p of Hotelling's T^2_{d,k}, through
/// T^2_{d,k} = d k / (k - d + 1) F_{d, k-d+1}. Requires k >= d >= 1.
double t2_quantile(int d, int k, double p);

/// Upper tail P(T^2_{d,k} > t).
double t2_survival(double t, int d, int k);

}  // namespace shapelift
