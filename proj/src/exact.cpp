#include "fracpredict/exact.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "fracpredict/quadrature.hpp"
#include "fracpredict/rng.hpp"

namespace fracpredict {

namespace {

void validate_observation_layout(const TimeGrid& obs, double horizon) {
    if (!(obs.front() > 0.0))
        throw DomainError("observation times must satisfy 0 < t_1");
    if (!(obs.last() < horizon))
        throw DomainError("horizon must exceed the last observation time");
}

std::vector<std::size_t> iota_from(std::size_t first, std::size_t count) {
    std::vector<std::size_t> v(count);
    for (std::size_t i = 0; i < count; ++i) v[i] = first + i;
    return v;
}

/// Conditional of the value at `horizon` given the values at `obs` under a
/// covariance model discretized on `sim_grid`. Joint points are laid out as
/// (t_1..t_N, horizon); the target is the last index.
GaussianConditional condition_on_observations(const CovarianceModel& model,
                                              const TimeGrid& obs, double horizon,
                                              const TimeGrid& sim_grid) {
    const std::size_t n = obs.size();
    Vector pts(obs.points().begin(), obs.points().end());
    pts.push_back(horizon);
    const Matrix cov = model_cov_at(model, sim_grid, pts);
    const Vector mean = model_mean_at(model, pts);

    // degenerate noise-free model: prediction is pure deterministic mean
    double scale = 0.0;
    for (std::size_t i = 0; i <= n; ++i) scale = std::max(scale, std::abs(cov(i, i)));
    if (scale == 0.0) {
        GaussianConditional cond;
        cond.weight.assign(n, 0.0);
        cond.offset = mean[n];
        cond.variance = 0.0;
        return cond;
    }
    return gaussian_condition(mean, cov, n, iota_from(0, n));
}

}  // namespace

double ExactPredictor::predict(std::span<const double> observations) const {
    if (transform == Transform::Identity) return conditional.predict(observations);

    // fCIR: map observations to latent coordinates, condition the latent
    // Gaussian, take the signed-square moment of the conditional law.
    Vector latent(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (observations[i] == 0.0)
            throw OrthantCaseRequired(
                "zero observation at index " + std::to_string(i) +
                "; use fcir_predict_orthant_mc");
        latent[i] = fcir_transform_inverse(observations[i], fcir_sigma);
    }
    const double mu_hat = conditional.predict(latent);
    const double var_hat = conditional.variance;
    if (var_hat <= 0.0) return fcir_transform(mu_hat, fcir_sigma);
    const double sd_hat = std::sqrt(var_hat);
    const double upper = truncated_normal_upper_second_moment(mu_hat, sd_hat);
    const double lower = truncated_normal_lower_second_moment(mu_hat, sd_hat);
    return 0.25 * fcir_sigma * fcir_sigma * (upper - lower);
}

double theoretical_mse(const ExactPredictor& predictor) {
    if (predictor.transform != ExactPredictor::Transform::Identity)
        throw UnsupportedRegimeError(
            "theoretical_mse: no closed form for transformed predictors");
    return predictor.conditional.variance;
}

void export_weights_csv(const ExactPredictor& predictor, std::ostream& out) {
    out << "t_i,weight\n";
    char buf[64];
    for (std::size_t i = 0; i < predictor.observation_times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", predictor.observation_times[i],
                      predictor.conditional.weight[i]);
        out << buf;
    }
}

ExactPredictor build_fbm_predictor(HurstIndex h, const TimeGrid& obs, double horizon) {
    validate_observation_layout(obs, horizon);
    const std::size_t n = obs.size();
    Vector pts(obs.points().begin(), obs.points().end());
    pts.push_back(horizon);
    Matrix cov(n + 1, n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        for (std::size_t j = 0; j <= i; ++j) cov(i, j) = cov(j, i) = fbm_cov(pts[i], pts[j], h);
    const Vector mean(n + 1, 0.0);
    ExactPredictor p{gaussian_condition(mean, cov, n, iota_from(0, n)), obs, horizon,
                     ExactPredictor::Transform::Identity, 0.0};
    return p;
}

ExactPredictor build_integral_predictor(const std::function<double(double)>& f, HurstIndex h,
                                        const TimeGrid& obs, double horizon,
                                        const TimeGrid& sim_grid) {
    validate_observation_layout(obs, horizon);
    const auto model = CovarianceModel::integral_process(h, f);
    ExactPredictor p{condition_on_observations(model, obs, horizon, sim_grid), obs, horizon,
                     ExactPredictor::Transform::Identity, 0.0};
    return p;
}

ExactPredictor build_fou_predictor(const FouCoeffs& coeffs, double a0, HurstIndex h,
                                   const TimeGrid& obs, double horizon,
                                   const TimeGrid& sim_grid) {
    validate_observation_layout(obs, horizon);
    if (coeffs.is_constant) {
        const auto model = CovarianceModel::fou(h, coeffs.k, coeffs.a, coeffs.sigma, a0);
        return {condition_on_observations(model, obs, horizon, sim_grid), obs, horizon,
                ExactPredictor::Transform::Identity, 0.0};
    }

    // general coefficients: kernel mirrors the Euler-Maruyama recursion so the
    // predictor covariance matches sample_fou exactly.
    double step = 0.0;
    if (!sim_grid.origin_included() || !sim_grid.is_regular(&step))
        throw DomainError("build_fou_predictor: sim grid must be regular from 0");
    const std::size_t m = sim_grid.size() - 1;
    Vector pts(obs.points().begin(), obs.points().end());
    pts.push_back(horizon);
    const std::size_t k_out = pts.size();

    std::vector<std::size_t> cuts(k_out);
    for (std::size_t i = 0; i < k_out; ++i) cuts[i] = sim_grid.index_of(pts[i]);

    Vector av(m), sv(m), kv(m);
    for (std::size_t j = 0; j < m; ++j) {
        kv[j] = coeffs.k_fn(sim_grid[j]);
        av[j] = coeffs.a_fn(sim_grid[j]);
        sv[j] = coeffs.sigma_fn(sim_grid[j]);
    }
    // deterministic mean via the same recursion
    Vector mean_grid(m + 1);
    mean_grid[0] = a0;
    for (std::size_t j = 0; j < m; ++j)
        mean_grid[j + 1] = mean_grid[j] + (kv[j] - av[j] * mean_grid[j]) * step;
    Vector mean(k_out);
    for (std::size_t i = 0; i < k_out; ++i) mean[i] = mean_grid[cuts[i]];

    // weight of increment j in the value at cut c: sigma_j * prod_{l=j+1}^{c-1} (1 - a_l step)
    Matrix w(k_out, m);
    for (std::size_t i = 0; i < k_out; ++i) {
        const std::size_t c = cuts[i];
        double prod = 1.0;
        for (std::size_t jj = c; jj-- > 0;) {
            w(i, jj) = sv[jj] * prod;
            prod *= 1.0 - av[jj] * step;
        }
    }
    Vector autocov(m);
    for (std::size_t l = 0; l < m; ++l) autocov[l] = fgn_autocov(l, h, step);
    Matrix cov(k_out, k_out);
    {
        // W C W^T with Toeplitz C done row-by-row
        Matrix wc(k_out, m);
        for (std::size_t i = 0; i < k_out; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < m; ++k)
                    s += w(i, k) * autocov[(j >= k) ? j - k : k - j];
                wc(i, j) = s;
            }
        for (std::size_t i = 0; i < k_out; ++i)
            for (std::size_t j = 0; j <= i; ++j)
                cov(i, j) = cov(j, i) = dot(wc.row(i), w.row(j));
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < k_out; ++i) scale = std::max(scale, std::abs(cov(i, i)));
    GaussianConditional cond;
    if (scale == 0.0) {
        cond.weight.assign(obs.size(), 0.0);
        cond.offset = mean.back();
        cond.variance = 0.0;
    } else {
        cond = gaussian_condition(mean, cov, k_out - 1, iota_from(0, obs.size()));
    }
    return {std::move(cond), obs, horizon, ExactPredictor::Transform::Identity, 0.0};
}

ExactPredictor build_fcir_predictor(double lambda, double sigma, double r0, HurstIndex h,
                                    const TimeGrid& obs, double horizon,
                                    const TimeGrid& sim_grid) {
    validate_observation_layout(obs, horizon);
    if (!(h.value() > 0.5))
        throw UnsupportedRegimeError("build_fcir_predictor: requires H > 1/2");
    if (!(lambda > 0.0) || !(sigma > 0.0))
        throw DomainError("build_fcir_predictor: lambda, sigma must be > 0");
    if (!(r0 > 0.0)) throw DomainError("build_fcir_predictor: r0 must be > 0");
    const double latent_a0 = fcir_transform_inverse(r0, sigma);
    const auto model = CovarianceModel::fcir_latent(h, lambda, latent_a0);
    return {condition_on_observations(model, obs, horizon, sim_grid), obs, horizon,
            ExactPredictor::Transform::FcirMoment, sigma};
}

double fou_gamma_cov(double t_i, double t_j, HurstIndex h, double decay, double horizon,
                     std::size_t inner_nodes, std::size_t outer_nodes) {
    const double hh = h.value();
    if (!(hh > 0.5)) throw UnsupportedRegimeError("fou_gamma_cov: requires H > 1/2");
    if (t_i < 0.0 || t_j < 0.0 || t_i > horizon || t_j > horizon)
        throw DomainError("fou_gamma_cov: times must lie in [0, horizon]");
    if (t_i == 0.0 || t_j == 0.0) return 0.0;

    const double alpha = hh - 0.5;  // in (0, 1/2)
    // kappa_H through log-gamma: Gamma(2-2H) blows up near H=1
    const double log_kappa = 0.5 * (std::log(2.0 * hh) + std::lgamma(1.5 - hh) -
                                    std::lgamma(hh + 0.5) - std::lgamma(2.0 - 2.0 * hh));
    const double kappa = std::exp(log_kappa);

    const auto inner_rule = GaussLegendre::get(inner_nodes);
    const auto outer_rule = GaussLegendre::get(outer_nodes);

    // inner transform: w = (u-s)^alpha turns u^{H-1/2}(u-s)^{H-3/2} du into
    // (s + w^{1/alpha})^alpha dw / alpha * alpha = smooth dw
    const auto gamma_star = [&](double t, double s) {
        if (s >= t) return 0.0;
        const double w_max = std::pow(t - s, alpha);
        const double integral = inner_rule->integrate(0.0, w_max, [&](double w) {
            const double u = s + std::pow(w, 1.0 / alpha);
            return std::pow(u, alpha) * std::exp(-decay * (t - u));
        });
        // s^{1/2-H} prefactor is pulled out by the outer substitution
        return kappa * integral;
    };

    // outer: s^{1-2H} (Gamma* i)(Gamma* j) ds with x = s^{2-2H}
    const double upper = std::min(t_i, t_j);
    const double beta = 2.0 - 2.0 * hh;
    const double x_max = std::pow(upper, beta);
    const double value = outer_rule->integrate(0.0, x_max, [&](double x) {
        const double s = std::pow(x, 1.0 / beta);
        return gamma_star(t_i, s) * gamma_star(t_j, s);
    });
    return value / beta;
}

OrthantEstimate fcir_predict_orthant_mc(double lambda, double sigma, double r0, HurstIndex h,
                                        const TimeGrid& obs, std::span<const double> observed,
                                        double horizon, const TimeGrid& sim_grid,
                                        std::size_t n_mc, std::uint64_t seed) {
    validate_observation_layout(obs, horizon);
    if (!(h.value() > 0.5))
        throw UnsupportedRegimeError("fcir_predict_orthant_mc: requires H > 1/2");
    if (observed.size() != obs.size())
        throw ShapeError("fcir_predict_orthant_mc: observation size mismatch");
    if (n_mc < 2) throw DomainError("fcir_predict_orthant_mc: n_mc must be >= 2");

    std::vector<std::size_t> fixed_idx, zero_idx;
    for (std::size_t i = 0; i < observed.size(); ++i)
        (observed[i] == 0.0 ? zero_idx : fixed_idx).push_back(i);
    if (zero_idx.empty())
        throw DomainError("fcir_predict_orthant_mc: no zero observations; use the closed form");

    const double latent_a0 = fcir_transform_inverse(r0, sigma);
    const auto model = CovarianceModel::fcir_latent(h, lambda, latent_a0);

    // joint layout: (horizon, zero-observation times) conditioned on the fixed ones
    Vector pts;
    pts.push_back(horizon);
    for (std::size_t z : zero_idx) pts.push_back(obs[z]);
    for (std::size_t f : fixed_idx) pts.push_back(obs[f]);
    const Matrix cov = model_cov_at(model, sim_grid, pts);
    const Vector mean = model_mean_at(model, pts);

    const std::size_t n_t = 1 + zero_idx.size();
    const auto targets = iota_from(0, n_t);
    const auto observed_pos = iota_from(n_t, fixed_idx.size());
    const auto block = gaussian_condition_block(mean, cov, targets, observed_pos);

    Vector fixed_latent(fixed_idx.size());
    for (std::size_t i = 0; i < fixed_idx.size(); ++i)
        fixed_latent[i] = fcir_transform_inverse(observed[fixed_idx[i]], sigma);
    const Vector cond_mean = fixed_idx.empty() ? block.offset : block.mean(fixed_latent);
    const Matrix chol = cholesky_psd_repair(block.covariance);

    RngStream rng(derive_seed(seed, stream_purpose::kOrthant), 0);
    double sum = 0.0, sum_sq = 0.0;
    std::size_t accepted = 0, proposed = 0;
    const std::size_t max_proposals =
        std::max<std::size_t>(1000000, 200 * n_mc);
    Vector z(n_t), x(n_t);
    while (accepted < n_mc) {
        if (proposed >= max_proposals &&
            static_cast<double>(accepted) < 1e-6 * static_cast<double>(proposed))
            throw InfeasibleOrthantError(
                "orthant acceptance rate below 1e-6 after " + std::to_string(proposed) +
                " proposals");
        ++proposed;
        for (auto& v : z) v = rng.next_normal();
        for (std::size_t i = 0; i < n_t; ++i) {
            double s = cond_mean[i];
            for (std::size_t k = 0; k <= i; ++k) s += chol(i, k) * z[k];
            x[i] = s;
        }
        bool ok = true;
        for (std::size_t i = 1; i < n_t; ++i)
            if (x[i] > 0.0) {
                ok = false;
                break;
            }
        if (!ok) continue;
        const double value = fcir_transform(x[0], sigma);
        sum += value;
        sum_sq += value * value;
        ++accepted;
    }
    OrthantEstimate est;
    est.accepted = accepted;
    est.proposed = proposed;
    est.value = sum / static_cast<double>(accepted);
    const double var =
        (sum_sq - sum * sum / static_cast<double>(accepted)) / (static_cast<double>(accepted) - 1.0);
    est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(accepted));
    return est;
}

}  // namespace fracpredict
