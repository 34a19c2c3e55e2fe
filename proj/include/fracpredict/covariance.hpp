#ifndef FRACPREDICT_COVARIANCE_HPP
#define FRACPREDICT_COVARIANCE_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fracpredict/linalg.hpp"
#include "fracpredict/types.hpp"

namespace fracpredict {

/// fBm covariance (1/2)(t^{2H} + s^{2H} - |t-s|^{2H}).
double fbm_cov(double t, double s, HurstIndex h);

/// Autocovariance of fBm increments on an equally spaced grid with step dt:
/// (1/2) dt^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
double fgn_autocov(std::size_t lag, HurstIndex h, double dt);

/// Joint Gaussian law descriptor for the processes handled by the library.
/// Non-fBm kinds are realized as explicit linear maps of fBm increments on a
/// simulation grid, so their covariance is exact for the discretized process.
struct CovarianceModel {
    enum class Kind { Fbm, FgnIncrements, IntegralProcess, Fou, FcirLatent };

    Kind kind;
    HurstIndex hurst;
    std::function<double(double)> integrand;              // IntegralProcess
    double fou_k = 0.0, fou_a = 0.0, fou_sigma = 1.0, fou_a0 = 0.0;  // Fou
    double fcir_lambda = 0.0, fcir_latent_a0 = 0.0;       // FcirLatent

    static CovarianceModel fbm(HurstIndex h);
    static CovarianceModel fgn_increments(HurstIndex h);
    static CovarianceModel integral_process(HurstIndex h, std::function<double(double)> f);
    static CovarianceModel fou(HurstIndex h, double k, double a, double sigma, double a0);
    static CovarianceModel fcir_latent(HurstIndex h, double lambda, double latent_a0);

    std::string label() const;

    /// Deterministic mean of the process at time t (0 for the centered kinds).
    double mean_at(double t) const;
};

/// Covariance matrix of the model's values on `grid`. For linear-map kinds the
/// grid doubles as the discretization grid (0 is prepended internally when
/// absent).
Matrix build_cov_matrix(const CovarianceModel& model, const TimeGrid& grid);

/// Covariance of the model at `eval_times` (exact members of `sim_grid`),
/// discretized by left-point sums over the sim grid increments.
Matrix model_cov_at(const CovarianceModel& model, const TimeGrid& sim_grid,
                    std::span<const double> eval_times);

Vector model_mean_at(const CovarianceModel& model, std::span<const double> eval_times);

/// Covariance of cut-prefix weighted sums S_p = sum_{j < cuts[p]} phi_j X_j of
/// a stationary sequence X with autocovariance `autocov` (needs lags up to
/// max(cuts)-1). O(M^2 + M K) time, O(K^2) memory.
Matrix prefix_weighted_cov(std::span<const double> phi, std::span<const double> autocov,
                           std::span<const std::size_t> cuts);

/// Covariance of fBm increments on an arbitrary (possibly irregular) grid.
Matrix increment_cov(const TimeGrid& grid, HurstIndex h);

/// Cholesky with the documented one-shot PSD repair: on failure adds jitter
/// 1e-12 * trace/n to the diagonal and retries once.
Matrix cholesky_psd_repair(Matrix a, bool* jitter_applied = nullptr);

}  // namespace fracpredict

#endif
