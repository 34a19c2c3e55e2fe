#include "fracpredict/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fracpredict/errors.hpp"

namespace fracpredict {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) * 0.39894228040143267793994605993438;
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485);
}

namespace {

Matrix submatrix(const Matrix& cov, std::span<const std::size_t> rows,
                 std::span<const std::size_t> cols) {
    Matrix out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = cov(rows[i], cols[j]);
    return out;
}

Matrix observed_cholesky(const Matrix& cov, std::span<const std::size_t> observed) {
    Matrix s22 = submatrix(cov, observed, observed);
    try {
        return cholesky_factor(s22);
    } catch (const NotPositiveDefiniteError& e) {
        throw ConditioningError("singular observation covariance; observation index " +
                                std::to_string(observed[e.pivot]) + " is redundant");
    }
}

}  // namespace

GaussianConditional gaussian_condition(std::span<const double> mean, const Matrix& cov,
                                       std::size_t target_index,
                                       std::span<const std::size_t> observed_indices) {
    const std::size_t n = cov.rows();
    if (cov.cols() != n || mean.size() != n) throw ShapeError("gaussian_condition: shape mismatch");
    if (target_index >= n) throw DomainError("gaussian_condition: target index out of range");
    for (std::size_t idx : observed_indices) {
        if (idx >= n) throw DomainError("gaussian_condition: observed index out of range");
        if (idx == target_index)
            throw DomainError("gaussian_condition: target must not be observed");
    }

    const Matrix l = observed_cholesky(cov, observed_indices);
    Vector s21(observed_indices.size());
    for (std::size_t i = 0; i < observed_indices.size(); ++i)
        s21[i] = cov(observed_indices[i], target_index);

    GaussianConditional cond;
    cond.weight = cholesky_solve(l, s21);

    double mu_obs = 0.0;
    for (std::size_t i = 0; i < observed_indices.size(); ++i)
        mu_obs += cond.weight[i] * mean[observed_indices[i]];
    cond.offset = mean[target_index] - mu_obs;

    const double s11 = cov(target_index, target_index);
    double var = s11 - dot(cond.weight, s21);
    const double eps = kVarianceClampRel * std::abs(s11);
    if (var < 0.0) {
        if (var < -eps)
            throw ConditioningError("conditional variance " + std::to_string(var) +
                                    " below clamp tolerance");
        var = 0.0;
    }
    cond.variance = var;
    return cond;
}

Vector GaussianConditionalBlock::mean(std::span<const double> x) const {
    if (x.size() != weight.cols()) throw ShapeError("conditional mean: observation size mismatch");
    Vector m(offset);
    for (std::size_t i = 0; i < weight.rows(); ++i) m[i] += dot(weight.row(i), x);
    return m;
}

GaussianConditionalBlock gaussian_condition_block(std::span<const double> mean, const Matrix& cov,
                                                  std::span<const std::size_t> target_indices,
                                                  std::span<const std::size_t> observed_indices) {
    const std::size_t n = cov.rows();
    if (cov.cols() != n || mean.size() != n)
        throw ShapeError("gaussian_condition_block: shape mismatch");

    GaussianConditionalBlock out;
    const std::size_t nt = target_indices.size();
    const std::size_t no = observed_indices.size();
    out.covariance = submatrix(cov, target_indices, target_indices);
    out.offset.resize(nt);
    for (std::size_t i = 0; i < nt; ++i) out.offset[i] = mean[target_indices[i]];
    out.weight = Matrix(nt, no);
    if (no == 0) return out;

    const Matrix l = observed_cholesky(cov, observed_indices);
    const Matrix s_ot = submatrix(cov, observed_indices, target_indices);

    for (std::size_t t = 0; t < nt; ++t) {
        Vector col(no);
        for (std::size_t i = 0; i < no; ++i) col[i] = s_ot(i, t);
        const Vector w = cholesky_solve(l, col);
        for (std::size_t i = 0; i < no; ++i) out.weight(t, i) = w[i];
        double mu_obs = 0.0;
        for (std::size_t i = 0; i < no; ++i) mu_obs += w[i] * mean[observed_indices[i]];
        out.offset[t] -= mu_obs;
        for (std::size_t u = 0; u < nt; ++u) {
            double c = 0.0;
            for (std::size_t i = 0; i < no; ++i) c += w[i] * s_ot(i, u);
            out.covariance(t, u) -= c;
        }
    }
    // symmetrize roundoff
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t j = i + 1; j < nt; ++j) {
            const double v = 0.5 * (out.covariance(i, j) + out.covariance(j, i));
            out.covariance(i, j) = out.covariance(j, i) = v;
        }
    return out;
}

double truncated_normal_upper_second_moment(double mu, double sigma) {
    if (!(sigma > 0.0))
        throw DomainError("truncated_normal_upper_second_moment: sigma must be > 0");
    const double z = mu / sigma;
    const double v = (mu * mu + sigma * sigma) * normal_cdf(z) + mu * sigma * normal_pdf(z);
    return std::max(0.0, v);
}

double truncated_normal_lower_second_moment(double mu, double sigma) {
    return truncated_normal_upper_second_moment(-mu, sigma);
}

}  // namespace fracpredict
