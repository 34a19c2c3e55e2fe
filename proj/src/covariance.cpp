#include "fracpredict/covariance.hpp"

#include <algorithm>
#include <cmath>

namespace fracpredict {

double fbm_cov(double t, double s, HurstIndex h) {
    if (t < 0.0 || s < 0.0) throw DomainError("fbm_cov: times must be non-negative");
    const double hh = h.value();
    if (hh == 0.5) return std::min(t, s);  // half-integer exponent reduces to min(t,s)
    const double e = 2.0 * hh;
    return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
}

double fgn_autocov(std::size_t lag, HurstIndex h, double dt) {
    if (!(dt > 0.0)) throw DomainError("fgn_autocov: dt must be > 0");
    const double e = 2.0 * h.value();
    const double k = static_cast<double>(lag);
    const double core =
        std::pow(k + 1.0, e) - 2.0 * std::pow(k, e) + std::pow(std::abs(k - 1.0), e);
    return 0.5 * std::pow(dt, e) * core;
}

CovarianceModel CovarianceModel::fbm(HurstIndex h) { return {Kind::Fbm, h, {}, 0, 0, 1, 0, 0, 0}; }

CovarianceModel CovarianceModel::fgn_increments(HurstIndex h) {
    return {Kind::FgnIncrements, h, {}, 0, 0, 1, 0, 0, 0};
}

CovarianceModel CovarianceModel::integral_process(HurstIndex h, std::function<double(double)> f) {
    if (!f) throw DomainError("integral_process: integrand required");
    return {Kind::IntegralProcess, h, std::move(f), 0, 0, 1, 0, 0, 0};
}

CovarianceModel CovarianceModel::fou(HurstIndex h, double k, double a, double sigma, double a0) {
    return {Kind::Fou, h, {}, k, a, sigma, a0, 0, 0};
}

CovarianceModel CovarianceModel::fcir_latent(HurstIndex h, double lambda, double latent_a0) {
    if (!(lambda > 0.0)) throw DomainError("fcir_latent: lambda must be > 0");
    return {Kind::FcirLatent, h, {}, 0, 0, 1, 0, lambda, latent_a0};
}

std::string CovarianceModel::label() const {
    const std::string hs = "H=" + std::to_string(hurst.value());
    switch (kind) {
        case Kind::Fbm: return "fbm(" + hs + ")";
        case Kind::FgnIncrements: return "fgn(" + hs + ")";
        case Kind::IntegralProcess: return "integral(" + hs + ")";
        case Kind::Fou:
            return "fou(" + hs + ",k=" + std::to_string(fou_k) + ",a=" + std::to_string(fou_a) +
                   ",sigma=" + std::to_string(fou_sigma) + ",a0=" + std::to_string(fou_a0) + ")";
        case Kind::FcirLatent:
            return "fcir_latent(" + hs + ",lambda=" + std::to_string(fcir_lambda) + ")";
    }
    return "model";
}

double CovarianceModel::mean_at(double t) const {
    switch (kind) {
        case Kind::Fou: {
            const double decayed = fou_a0 * std::exp(-fou_a * t);
            const double drift = (fou_a == 0.0) ? fou_k * t : fou_k * (1.0 - std::exp(-fou_a * t)) / fou_a;
            return decayed + drift;
        }
        case Kind::FcirLatent:
            return fcir_latent_a0 * std::exp(-0.5 * fcir_lambda * t);
        default:
            return 0.0;
    }
}

Vector model_mean_at(const CovarianceModel& model, std::span<const double> eval_times) {
    Vector m(eval_times.size());
    for (std::size_t i = 0; i < eval_times.size(); ++i) m[i] = model.mean_at(eval_times[i]);
    return m;
}

Matrix increment_cov(const TimeGrid& grid, HurstIndex h) {
    const std::size_t m = grid.size() - 1;
    Matrix c(m, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k <= j; ++k) {
            const double v = fbm_cov(grid[j + 1], grid[k + 1], h) - fbm_cov(grid[j + 1], grid[k], h) -
                             fbm_cov(grid[j], grid[k + 1], h) + fbm_cov(grid[j], grid[k], h);
            c(j, k) = c(k, j) = v;
        }
    return c;
}

Matrix prefix_weighted_cov(std::span<const double> phi, std::span<const double> autocov,
                           std::span<const std::size_t> cuts) {
    const std::size_t k_out = cuts.size();
    std::size_t max_cut = 0;
    for (std::size_t c : cuts) max_cut = std::max(max_cut, c);
    if (max_cut > phi.size() || (max_cut > 0 && autocov.size() < max_cut))
        throw ShapeError("prefix_weighted_cov: cut beyond weight/autocov length");
    for (std::size_t p = 1; p < k_out; ++p)
        if (cuts[p] < cuts[p - 1]) throw DomainError("prefix_weighted_cov: cuts must be sorted");

    Matrix out(k_out, k_out);
    Vector acc(k_out, 0.0);
    Vector rowvals(k_out, 0.0);
    std::size_t p_ptr = 0;
    for (std::size_t j = 0; j < max_cut; ++j) {
        while (p_ptr < k_out && cuts[p_ptr] == j) {
            for (std::size_t q = 0; q < k_out; ++q) out(p_ptr, q) = acc[q];
            ++p_ptr;
        }
        // prefix sums of phi_k * c(|j-k|) captured at each cut
        double run = 0.0;
        std::size_t q_ptr = 0;
        for (std::size_t k = 0; k < max_cut; ++k) {
            while (q_ptr < k_out && cuts[q_ptr] == k) rowvals[q_ptr++] = run;
            const std::size_t lag = (j >= k) ? j - k : k - j;
            run += phi[k] * autocov[lag];
        }
        while (q_ptr < k_out) rowvals[q_ptr++] = run;
        const double pj = phi[j];
        for (std::size_t q = 0; q < k_out; ++q) acc[q] += pj * rowvals[q];
    }
    while (p_ptr < k_out) {
        for (std::size_t q = 0; q < k_out; ++q) out(p_ptr, q) = acc[q];
        ++p_ptr;
    }
    // exact symmetry despite summation-order differences
    for (std::size_t p = 0; p < k_out; ++p)
        for (std::size_t q = p + 1; q < k_out; ++q) {
            const double v = 0.5 * (out(p, q) + out(q, p));
            out(p, q) = out(q, p) = v;
        }
    return out;
}

namespace {

TimeGrid with_origin(const TimeGrid& grid) {
    if (grid.origin_included()) return grid;
    std::vector<double> pts;
    pts.reserve(grid.size() + 1);
    pts.push_back(0.0);
    pts.insert(pts.end(), grid.points().begin(), grid.points().end());
    return TimeGrid(std::move(pts));
}

// Left-point kernel weight of increment j (spanning [u_j, u_{j+1})) in the
// value at time t, for each linear-map kind.
double kernel_weight(const CovarianceModel& model, double u_j, double t) {
    switch (model.kind) {
        case CovarianceModel::Kind::IntegralProcess:
            return model.integrand(u_j);
        case CovarianceModel::Kind::Fou:
            return model.fou_sigma * std::exp(-model.fou_a * (t - u_j));
        case CovarianceModel::Kind::FcirLatent:
            return std::exp(-0.5 * model.fcir_lambda * (t - u_j));
        default:
            return 1.0;  // fBm: plain increment sum
    }
}

Matrix linear_map_cov(const CovarianceModel& model, const TimeGrid& sim_grid,
                      std::span<const double> eval_times) {
    const TimeGrid grid = with_origin(sim_grid);
    const std::size_t m = grid.size() - 1;

    std::vector<std::size_t> cuts(eval_times.size());
    for (std::size_t i = 0; i < eval_times.size(); ++i) cuts[i] = grid.index_of(eval_times[i]);

    double step = 0.0;
    const bool regular = grid.is_regular(&step);

    // separable fast path on regular grids: weight(t, u) = scale(t) * phi(u)
    double decay = 0.0;
    bool separable = false;
    switch (model.kind) {
        case CovarianceModel::Kind::Fbm:
        case CovarianceModel::Kind::IntegralProcess:
            decay = 0.0;
            separable = true;
            break;
        case CovarianceModel::Kind::Fou:
            decay = model.fou_a;
            separable = true;
            break;
        case CovarianceModel::Kind::FcirLatent:
            decay = 0.5 * model.fcir_lambda;
            separable = true;
            break;
        default:
            separable = false;
    }
    // exp(decay * u) factors must stay far from overflow
    if (std::abs(decay) * grid.last() > 300.0) separable = false;

    if (regular && separable) {
        Vector phi(m), autocov(m > 0 ? m : 1);
        for (std::size_t j = 0; j < m; ++j) {
            const double u = grid[j];
            phi[j] = (model.kind == CovarianceModel::Kind::IntegralProcess) ? model.integrand(u)
                                                                            : std::exp(decay * u);
        }
        for (std::size_t l = 0; l < std::max<std::size_t>(m, 1); ++l)
            autocov[l] = fgn_autocov(l, model.hurst, step);
        // eval times may arrive in any order; compute on sorted cuts, un-permute
        std::vector<std::size_t> order(cuts.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return cuts[a] < cuts[b]; });
        std::vector<std::size_t> sorted_cuts(cuts.size());
        for (std::size_t i = 0; i < order.size(); ++i) sorted_cuts[i] = cuts[order[i]];
        const Matrix sorted = prefix_weighted_cov(phi, autocov, sorted_cuts);
        Matrix out(cuts.size(), cuts.size());
        for (std::size_t p = 0; p < cuts.size(); ++p)
            for (std::size_t q = 0; q < cuts.size(); ++q) out(order[p], order[q]) = sorted(p, q);
        const double sigma = (model.kind == CovarianceModel::Kind::Fou) ? model.fou_sigma : 1.0;
        for (std::size_t p = 0; p < out.rows(); ++p)
            for (std::size_t q = 0; q < out.cols(); ++q)
                out(p, q) *= sigma * sigma *
                             std::exp(-decay * (eval_times[p] + eval_times[q]));
        return out;
    }

    // generic path: W C W^T over explicit increment covariance
    const Matrix c = increment_cov(grid, model.hurst);
    Matrix w(eval_times.size(), m);
    for (std::size_t i = 0; i < eval_times.size(); ++i)
        for (std::size_t j = 0; j < cuts[i]; ++j)
            w(i, j) = kernel_weight(model, grid[j], eval_times[i]);
    Matrix wc = matmul(w, c);
    Matrix out(eval_times.size(), eval_times.size());
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = dot(wc.row(i), w.row(j));
            out(i, j) = out(j, i) = v;
        }
    return out;
}

}  // namespace

Matrix model_cov_at(const CovarianceModel& model, const TimeGrid& sim_grid,
                    std::span<const double> eval_times) {
    if (model.kind == CovarianceModel::Kind::Fbm) {
        Matrix out(eval_times.size(), eval_times.size());
        for (std::size_t i = 0; i < eval_times.size(); ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = fbm_cov(eval_times[i], eval_times[j], model.hurst);
                out(i, j) = out(j, i) = v;
            }
        return out;
    }
    if (model.kind == CovarianceModel::Kind::FgnIncrements)
        throw DomainError("model_cov_at: fGn increments have no pointwise value map");
    return linear_map_cov(model, sim_grid, eval_times);
}

Matrix build_cov_matrix(const CovarianceModel& model, const TimeGrid& grid) {
    switch (model.kind) {
        case CovarianceModel::Kind::Fbm:
            return model_cov_at(model, grid, grid.points());
        case CovarianceModel::Kind::FgnIncrements: {
            double step = 0.0;
            if (grid.size() >= 2 && !grid.is_regular(&step))
                throw DomainError("build_cov_matrix: fGn increments need an equally spaced grid");
            if (grid.size() < 2) step = grid[0] > 0 ? grid[0] : 1.0;
            Matrix out(grid.size(), grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double v = fgn_autocov(i - j, model.hurst, step);
                    out(i, j) = out(j, i) = v;
                }
            return out;
        }
        default:
            return model_cov_at(model, grid, grid.points());
    }
}

Matrix cholesky_psd_repair(Matrix a, bool* jitter_applied) {
    if (jitter_applied) *jitter_applied = false;
    try {
        return cholesky_factor(a);
    } catch (const NotPositiveDefiniteError&) {
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) trace += a(i, i);
    const double jitter = 1e-12 * trace / static_cast<double>(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += jitter;
    if (jitter_applied) *jitter_applied = true;
    return cholesky_factor(a);  // second failure propagates
}

}  // namespace fracpredict
