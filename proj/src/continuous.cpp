#include "fracpredict/continuous.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "fracpredict/parallel.hpp"
#include "fracpredict/quadrature.hpp"

namespace fracpredict {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Common factor sin((H-1/2)pi)/pi * v^{1/2-H} (s-v)^{1/2-H} and the smooth
/// inner integral after the power substitution. `weight(z)` multiplies the
/// integrand (identity for fBm).
template <typename WeightFn>
double psi_kernel(double s, double horizon, double v, HurstIndex h, std::size_t inner_nodes,
                  WeightFn&& weight) {
    if (v < 0.0 || v > s) throw DomainError("psi: v must lie in [0, s]");
    if (!(0.0 < s && s < horizon)) throw DomainError("psi: need 0 < s < horizon");
    if (v == 0.0 || v == s) return 0.0;

    const double hh = h.value();
    const double sine = std::sin((hh - 0.5) * kPi);
    if (sine == 0.0) return 0.0;

    const double p = hh + 0.5;
    const auto rule = GaussLegendre::get(inner_nodes);
    // z = s + (T-s) xi^{q} with q = 3/p: (z-s)^{H-1/2} dz = q (T-s)^p xi^2 dxi,
    // so the endpoint behavior cancels with two extra orders of smoothness
    const double q = 3.0 / p;
    const double span = horizon - s;
    const double inner = rule->integrate(0.0, 1.0, [&](double xi) {
        const double z = s + span * std::pow(xi, q);
        return xi * xi * std::pow(z, hh - 0.5) / (z - v) * weight(z);
    });
    const double scaled = inner * std::pow(span, p) * q;
    return sine / kPi * std::pow(v, 0.5 - hh) * std::pow(s - v, 0.5 - hh) * scaled;
}

std::size_t index_of_s(const TimeGrid& grid, double s) {
    const std::size_t idx = grid.index_of(s);
    if (idx < 16) throw DomainError("continuous predictor: grid over [0,s] needs >= 16 points");
    if (!grid.origin_included()) throw DomainError("continuous predictor: grid must start at 0");
    return idx;
}

}  // namespace

double psi_fbm(double s, double horizon, double v, HurstIndex h, std::size_t inner_nodes) {
    return psi_kernel(s, horizon, v, h, inner_nodes, [](double) { return 1.0; });
}

double psi_fou(double s, double horizon, double v, HurstIndex h, FouKernelVariant variant,
               std::size_t inner_nodes, double decay) {
    if (variant == FouKernelVariant::AsWritten) {
        // e^{-decay (T-v)} is constant in z and factors out
        return psi_fbm(s, horizon, v, h, inner_nodes) * std::exp(-decay * (horizon - v));
    }
    return psi_kernel(s, horizon, v, h, inner_nodes,
                      [&](double z) { return std::exp(-decay * (horizon - z)); });
}

namespace {

/// Cell averages of a Psi kernel over each grid cell of [0,s]. Interior cells
/// are smooth; the first and last cells carry the v^{1/2-H} and (s-v)^{1/2-H}
/// endpoint factors, which a power substitution turns smooth. Cell averages
/// integrate the kernel exactly where midpoint samples pick up an O(step^{1/2})
/// bias against rough paths.
template <typename Psi>
PsiTable tabulate_cells(const TimeGrid& grid, double s, double hurst, Psi&& psi) {
    PsiTable table;
    table.s_index = grid.index_of(s);
    table.psi.resize(table.s_index);
    const auto rule = GaussLegendre::get(16);
    const double edge_power = 1.5 - hurst;  // 1 + (1/2 - H)
    parallel_for(table.s_index, [&](std::size_t k) {
        const double a = grid[k], b = grid[k + 1];
        const double width = b - a;
        double integral;
        if (k == 0) {
            // v = b xi^{2/(1.5-H)}
            const double p = 2.0 / edge_power;
            integral = rule->integrate(0.0, 1.0, [&](double xi) {
                const double v = b * std::pow(xi, p);
                return psi(v) * b * p * std::pow(xi, p - 1.0);
            });
        } else if (k + 1 == table.s_index) {
            // s - v = width xi^{2/(1.5-H)}
            const double p = 2.0 / edge_power;
            integral = rule->integrate(0.0, 1.0, [&](double xi) {
                const double v = s - width * std::pow(xi, p);
                return psi(v) * width * p * std::pow(xi, p - 1.0);
            });
        } else {
            integral = rule->integrate(a, b, psi);
        }
        table.psi[k] = integral / width;
    });
    return table;
}

}  // namespace

PsiTable tabulate_psi_fbm(const TimeGrid& grid, const ContinuousPredictorConfig& config) {
    (void)index_of_s(grid, config.s);
    return tabulate_cells(grid, config.s, config.hurst.value(), [&](double v) {
        return psi_fbm(config.s, config.horizon, v, config.hurst, config.inner_nodes);
    });
}

PsiTable tabulate_psi_fou(const TimeGrid& grid, const ContinuousPredictorConfig& config) {
    (void)index_of_s(grid, config.s);
    return tabulate_cells(grid, config.s, config.hurst.value(), [&](double v) {
        return psi_fou(config.s, config.horizon, v, config.hurst, config.fou_kernel_variant,
                       config.inner_nodes, config.fou_decay);
    });
}

double predict_fbm_continuous(std::span<const double> path, const PsiTable& table) {
    double acc = path[table.s_index];  // B_s
    for (std::size_t k = 0; k < table.s_index; ++k)
        acc += table.psi[k] * (path[k + 1] - path[k]);
    return acc;
}

double predict_fbm_continuous(std::span<const double> path, const TimeGrid& grid,
                              const ContinuousPredictorConfig& config) {
    if (path.size() != grid.size()) throw ShapeError("predict_fbm_continuous: path/grid mismatch");
    return predict_fbm_continuous(path, tabulate_psi_fbm(grid, config));
}

double predict_fou_continuous(std::span<const double> path, const TimeGrid& grid,
                              const PsiTable& table, const ContinuousPredictorConfig& config) {
    if (path.size() != grid.size()) throw ShapeError("predict_fou_continuous: path/grid mismatch");
    const std::size_t si = table.s_index;
    double acc = path[si] * std::exp(-config.fou_decay * (config.horizon - config.s));
    // driving increments (times sigma) from the exponential-kernel recursion
    // A_{k+1} = e^{-a dk} (A_k + sigma dB_k)
    for (std::size_t k = 0; k < si; ++k) {
        const double dk = grid[k + 1] - grid[k];
        const double recovered = path[k + 1] * std::exp(config.fou_decay * dk) - path[k];
        acc += table.psi[k] * recovered;
    }
    return acc;
}

double predict_fou_continuous(std::span<const double> path, const TimeGrid& grid,
                              const ContinuousPredictorConfig& config) {
    return predict_fou_continuous(path, grid, tabulate_psi_fou(grid, config), config);
}

void export_psi_table_csv(const TimeGrid& grid, const PsiTable& table, std::ostream& out) {
    out << "v,psi\n";
    char buf[64];
    for (std::size_t k = 0; k < table.psi.size(); ++k) {
        const double mid = 0.5 * (grid[k] + grid[k + 1]);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", mid, table.psi[k]);
        out << buf;
    }
}

}  // namespace fracpredict
