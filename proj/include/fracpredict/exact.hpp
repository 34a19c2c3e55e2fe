#ifndef FRACPREDICT_EXACT_HPP
#define FRACPREDICT_EXACT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>

#include "fracpredict/gaussian.hpp"
#include "fracpredict/sampling.hpp"
#include "fracpredict/types.hpp"

namespace fracpredict {

/// Closed-form optimal predictor of the value at the horizon given the
/// observed coordinates. Identity-transform predictors are affine in the
/// observations; the fCIR predictor maps through the signed-square moment.
struct ExactPredictor {
    enum class Transform { Identity, FcirMoment };

    GaussianConditional conditional;
    TimeGrid observation_times;
    double horizon = 0.0;
    Transform transform = Transform::Identity;
    double fcir_sigma = 0.0;  // FcirMoment only

    double predict(std::span<const double> observations) const;
};

/// Minimal achievable MSE of an identity-transform predictor (the conditional
/// variance). The fCIR transform has no closed form; estimate empirically.
double theoretical_mse(const ExactPredictor& predictor);

void export_weights_csv(const ExactPredictor& predictor, std::ostream& out);

ExactPredictor build_fbm_predictor(HurstIndex h, const TimeGrid& observation_times, double horizon);

ExactPredictor build_integral_predictor(const std::function<double(double)>& f, HurstIndex h,
                                        const TimeGrid& observation_times, double horizon,
                                        const TimeGrid& sim_grid);

ExactPredictor build_fou_predictor(const FouCoeffs& coeffs, double a0, HurstIndex h,
                                   const TimeGrid& observation_times, double horizon,
                                   const TimeGrid& sim_grid);

ExactPredictor build_fcir_predictor(double lambda, double sigma, double r0, HurstIndex h,
                                    const TimeGrid& observation_times, double horizon,
                                    const TimeGrid& sim_grid);

/// Covariance E[ I(t_i) I(t_j) ] of the Wiener-type integrals
/// I(t) = int_0^t e^{-decay (t-u)} dB^H_u for H > 1/2, computed by the
/// weighted fractional-integral transform with two-level Gauss-Legendre
/// quadrature (both singularities removed by power substitutions).
double fou_gamma_cov(double t_i, double t_j, HurstIndex h, double decay, double horizon,
                     std::size_t inner_nodes = 64, std::size_t outer_nodes = 64);

/// Rejection-sampled fCIR prediction when some observations are exactly zero
/// (latent coordinates constrained to the negative orthant).
struct OrthantEstimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t accepted = 0;
    std::size_t proposed = 0;
};

OrthantEstimate fcir_predict_orthant_mc(double lambda, double sigma, double r0, HurstIndex h,
                                        const TimeGrid& observation_times,
                                        std::span<const double> observed_values, double horizon,
                                        const TimeGrid& sim_grid, std::size_t n_mc,
                                        std::uint64_t seed);

}  // namespace fracpredict

#endif
