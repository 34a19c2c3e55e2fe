#ifndef FRACPREDICT_GAUSSIAN_HPP
#define FRACPREDICT_GAUSSIAN_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "fracpredict/linalg.hpp"

namespace fracpredict {

double normal_pdf(double x);
double normal_cdf(double x);

/// Conditional law of one Gaussian coordinate given others:
/// prediction(x) = offset + weight . x, with conditional variance `variance`.
struct GaussianConditional {
    Vector weight;
    double offset = 0.0;
    double variance = 0.0;

    double predict(std::span<const double> x) const { return offset + dot(weight, x); }
};

/// Relative clamp tolerance for tiny negative conditional variances.
inline constexpr double kVarianceClampRel = 1e-10;

/// Condition coordinate `target_index` of N(mean, cov) on the coordinates in
/// `observed_indices`. The weight solves Sigma22 w = Sigma21 through a
/// Cholesky factorization (never an explicit inverse).
GaussianConditional gaussian_condition(std::span<const double> mean, const Matrix& cov,
                                       std::size_t target_index,
                                       std::span<const std::size_t> observed_indices);

/// Block variant: conditional mean map and covariance of several target
/// coordinates given the observed ones. mean(x) = offset + W (x - mu_obs)
/// is folded as offset' + W x.
struct GaussianConditionalBlock {
    Matrix weight;      // n_targets x n_observed
    Vector offset;      // n_targets
    Matrix covariance;  // n_targets x n_targets

    Vector mean(std::span<const double> x) const;
};

GaussianConditionalBlock gaussian_condition_block(std::span<const double> mean, const Matrix& cov,
                                                  std::span<const std::size_t> target_indices,
                                                  std::span<const std::size_t> observed_indices);

/// E[U^2 1_{U>0}] for U ~ N(mu, sigma^2), closed form
/// (mu^2+sigma^2) Phi(mu/sigma) + mu sigma phi(mu/sigma).
double truncated_normal_upper_second_moment(double mu, double sigma);

/// E[U^2 1_{U<0}], by reflection.
double truncated_normal_lower_second_moment(double mu, double sigma);

}  // namespace fracpredict

#endif
