#ifndef FRACPREDICT_CONTINUOUS_HPP
#define FRACPREDICT_CONTINUOUS_HPP

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "fracpredict/types.hpp"

namespace fracpredict {

/// The published fOU weight prints the exponential factor with the outer
/// variable, where it is constant inside the z-integral; the classical kernel
/// uses the integration variable. Both are available.
enum class FouKernelVariant { AsWritten, ZArgument };

struct ContinuousPredictorConfig {
    double s = 0.0;        // observation endpoint
    double horizon = 0.0;  // prediction time T > s
    HurstIndex hurst;
    std::size_t inner_nodes = 64;
    FouKernelVariant fou_kernel_variant = FouKernelVariant::ZArgument;
    double fou_decay = 0.5;
    double fou_sigma = 1.0;

    ContinuousPredictorConfig(double s_, double horizon_, HurstIndex h)
        : s(s_), horizon(horizon_), hurst(h) {
        if (!(0.0 < s && s < horizon))
            throw DomainError("ContinuousPredictorConfig: need 0 < s < horizon");
        if (inner_nodes < 8) throw DomainError("ContinuousPredictorConfig: inner_nodes >= 8");
    }
};

/// Prediction weight for fBm under continuous observation of [0,s]:
///   sin((H-1/2)pi)/pi * v^{1/2-H} (s-v)^{1/2-H} *
///       int_s^T z^{H-1/2} (z-s)^{H-1/2} / (z-v) dz,
/// zero at v in {0, s}. The endpoint behavior of the inner integrand is
/// removed by the substitution z = s + (T-s) xi^{1/(H+1/2)}.
double psi_fbm(double s, double horizon, double v, HurstIndex h, std::size_t inner_nodes = 64);

/// fOU analog with exponential decay weighting; see FouKernelVariant.
double psi_fou(double s, double horizon, double v, HurstIndex h,
               FouKernelVariant variant = FouKernelVariant::ZArgument,
               std::size_t inner_nodes = 64, double decay = 0.5);

/// B_s + sum_k Psi(s,T,m_k) (B_{v_{k+1}} - B_{v_k}) over the part of the grid
/// covering [0,s], with midpoint kernel evaluation.
double predict_fbm_continuous(std::span<const double> path, const TimeGrid& grid,
                              const ContinuousPredictorConfig& config);

/// A_s e^{-decay (T-s)} + Riemann-Stieltjes sum of Psi_c against the driving
/// increments recovered from the A path by inverting the exponential-kernel
/// recursion on the fine grid.
double predict_fou_continuous(std::span<const double> path, const TimeGrid& grid,
                              const ContinuousPredictorConfig& config);

/// Tabulated kernel over the midpoints of a fine grid restricted to [0,s];
/// reused when predicting many paths on one grid.
struct PsiTable {
    std::size_t s_index = 0;     // grid index of s
    std::vector<double> psi;     // per increment interval [v_k, v_{k+1}), k < s_index
};

PsiTable tabulate_psi_fbm(const TimeGrid& grid, const ContinuousPredictorConfig& config);
PsiTable tabulate_psi_fou(const TimeGrid& grid, const ContinuousPredictorConfig& config);

double predict_fbm_continuous(std::span<const double> path, const PsiTable& table);
double predict_fou_continuous(std::span<const double> path, const TimeGrid& grid,
                              const PsiTable& table, const ContinuousPredictorConfig& config);

/// CSV columns `v, psi` for plotting.
void export_psi_table_csv(const TimeGrid& grid, const PsiTable& table, std::ostream& out);

}  // namespace fracpredict

#endif
