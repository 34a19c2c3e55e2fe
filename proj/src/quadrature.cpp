#include "fracpredict/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "fracpredict/errors.hpp"

namespace fracpredict {

namespace {

GaussLegendre build_rule(std::size_t n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t i = 0; i < n; ++i) {
        // Newton from the Chebyshev-like initial guess
        double x = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

std::shared_ptr<const GaussLegendre> GaussLegendre::get(std::size_t n) {
    if (n == 0) throw DomainError("GaussLegendre: node count must be >= 1");
    static std::mutex mu;
    static std::map<std::size_t, std::shared_ptr<const GaussLegendre>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto rule = std::make_shared<GaussLegendre>(build_rule(n));
    cache.emplace(n, rule);
    return rule;
}

}  // namespace fracpredict
