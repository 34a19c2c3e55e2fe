#ifndef FRACPREDICT_QUADRATURE_HPP
#define FRACPREDICT_QUADRATURE_HPP

#include <cstddef>
#include <memory>
#include <vector>

namespace fracpredict {

/// Gauss-Legendre rule on [-1,1]. Rules are cached per node count; the shared
/// instances are immutable so callers can hold them across threads.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    static std::shared_ptr<const GaussLegendre> get(std::size_t n);

    /// Integrate f over [a,b].
    template <typename F>
    double integrate(double a, double b, F&& f) const {
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            s += weights[i] * f(mid + half * nodes[i]);
        return s * half;
    }
};

}  // namespace fracpredict

#endif
