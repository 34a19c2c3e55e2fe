#include "fracpredict/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fracpredict/parallel.hpp"
#include "fracpredict/rng.hpp"

namespace fracpredict {

namespace {

void require_regular_from_zero(const TimeGrid& grid, double* step) {
    if (!grid.origin_included())
        throw DomainError("sampler grid must start at t=0");
    if (grid.size() < 2 || !grid.is_regular(step))
        throw DomainError("sampler grid must be equally spaced with >= 2 points");
}

void check_finite(std::span<const double> values) {
    for (double v : values)
        if (!std::isfinite(v)) throw SimulationError("non-finite sample value");
}

}  // namespace

FbmSampler::FbmSampler(HurstIndex h, const TimeGrid& grid, bool force_cholesky) {
    require_regular_from_zero(grid, &dt_);
    m_ = grid.size() - 1;

    // circulant embedding of the fGn autocovariance
    const std::size_t g = Fft::next_pow2(2 * m_);
    Vector autocov(g / 2 + 1);
    for (std::size_t l = 0; l <= g / 2; ++l) autocov[l] = fgn_autocov(l, h, dt_);
    std::vector<std::complex<double>> c(g);
    for (std::size_t j = 0; j < g; ++j) c[j] = autocov[std::min(j, g - j)];
    Fft fft(g);
    fft.forward(c);

    double max_eig = 0.0, min_eig = 0.0;
    for (const auto& e : c) {
        max_eig = std::max(max_eig, e.real());
        min_eig = std::min(min_eig, e.real());
    }
    if (!force_cholesky && min_eig >= -1e-10 * max_eig) {
        embed_size_ = g;
        spectrum_sqrt_.resize(g);
        for (std::size_t j = 0; j < g; ++j)
            spectrum_sqrt_[j] = std::sqrt(std::max(0.0, c[j].real()) / static_cast<double>(g));
        fft_ = std::make_shared<Fft>(g);
        return;
    }

    // embedding rejected: factor the fGn Toeplitz directly
    use_cholesky_ = true;
    Matrix cov(m_, m_);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t j = 0; j <= i; ++j) cov(i, j) = cov(j, i) = autocov[i - j];
    try {
        chol_ = cholesky_psd_repair(std::move(cov));
    } catch (const NotPositiveDefiniteError& e) {
        throw SimulationError("fBm sampling failed: embedding eigenvalue " +
                              std::to_string(min_eig) + " and Cholesky pivot " +
                              std::to_string(e.pivot) + " both rejected");
    }
}

void FbmSampler::fill_increments(std::uint64_t seed, std::size_t path_index,
                                 std::span<double> out) const {
    if (out.size() != m_) throw ShapeError("fill_increments: output size mismatch");
    RngStream rng(derive_seed(seed, stream_purpose::kPaths), path_index);

    if (use_cholesky_) {
        Vector z(m_);
        for (auto& v : z) v = rng.next_normal();
        for (std::size_t i = 0; i < m_; ++i) {
            double s = 0.0;
            const double* li = chol_.data() + i * m_;
            for (std::size_t k = 0; k <= i; ++k) s += li[k] * z[k];
            out[i] = s;
        }
        return;
    }

    const std::size_t g = embed_size_;
    std::vector<std::complex<double>> a(g);
    a[0] = spectrum_sqrt_[0] * rng.next_normal();
    a[g / 2] = spectrum_sqrt_[g / 2] * rng.next_normal();
    const double inv_sqrt2 = 0.70710678118654752440084436210485;
    for (std::size_t k = 1; k < g / 2; ++k) {
        const double re = rng.next_normal() * inv_sqrt2;
        const double im = rng.next_normal() * inv_sqrt2;
        a[k] = spectrum_sqrt_[k] * std::complex<double>(re, im);
        a[g - k] = std::conj(a[k]);
    }
    fft_->forward(a);
    for (std::size_t j = 0; j < m_; ++j) out[j] = a[j].real();
}

namespace {

/// Shared driver: simulate per-path fBm increments, transform them into path
/// values via `fill_path(increments, out_row)`.
template <typename Fill>
PathBatch simulate(HurstIndex h, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                   std::string label, Fill&& fill_path) {
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");
    FbmSampler sampler(h, grid);
    PathBatch batch{grid, n_paths, Vector(n_paths * grid.size()), std::move(label), seed};
    const std::size_t m = sampler.n_increments();
    parallel_for(n_paths, [&](std::size_t p) {
        Vector inc(m);
        sampler.fill_increments(seed, p, inc);
        fill_path(std::span<const double>(inc),
                  std::span<double>(batch.values.data() + p * grid.size(), grid.size()));
    });
    check_finite(batch.values);
    return batch;
}

}  // namespace

PathBatch sample_fbm(HurstIndex h, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    return simulate(h, grid, n_paths, seed, CovarianceModel::fbm(h).label(),
                    [](std::span<const double> inc, std::span<double> out) {
                        out[0] = 0.0;
                        for (std::size_t j = 0; j < inc.size(); ++j) out[j + 1] = out[j] + inc[j];
                    });
}

PathBatch sample_integral_process(const std::function<double(double)>& f, HurstIndex h,
                                  const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed) {
    if (!f) throw DomainError("sample_integral_process: integrand required");
    Vector fv(grid.size() - 1);
    for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        fv[j] = f(grid[j]);
        if (!std::isfinite(fv[j]))
            throw DomainError("sample_integral_process: integrand not finite on grid");
    }
    return simulate(h, grid, n_paths, seed, CovarianceModel::integral_process(h, f).label(),
                    [&fv](std::span<const double> inc, std::span<double> out) {
                        out[0] = 0.0;
                        for (std::size_t j = 0; j < inc.size(); ++j)
                            out[j + 1] = out[j] + fv[j] * inc[j];
                    });
}

PathBatch sample_fou(const FouCoeffs& coeffs, double a0, HurstIndex h, const TimeGrid& grid,
                     std::size_t n_paths, std::uint64_t seed) {
    double step = 0.0;
    require_regular_from_zero(grid, &step);
    const std::size_t n = grid.size();

    if (coeffs.is_constant) {
        // exact exponential-kernel sum: A_{m+1} = e^{-a du}(A_m^stoch + sigma dB_m) + mean
        const double decay = std::exp(-coeffs.a * step);
        Vector mean(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = grid[i];
            const double drift = (coeffs.a == 0.0)
                                     ? coeffs.k * t
                                     : coeffs.k * (1.0 - std::exp(-coeffs.a * t)) / coeffs.a;
            mean[i] = a0 * std::exp(-coeffs.a * t) + drift;
        }
        const std::string label = "fou(H=" + std::to_string(h.value()) + ",const)";
        return simulate(h, grid, n_paths, seed, label,
                        [&](std::span<const double> inc, std::span<double> out) {
                            double stoch = 0.0;
                            out[0] = mean[0];
                            for (std::size_t j = 0; j < inc.size(); ++j) {
                                stoch = decay * (stoch + coeffs.sigma * inc[j]);
                                out[j + 1] = mean[j + 1] + stoch;
                            }
                        });
    }

    // general coefficients: Euler-Maruyama
    Vector kv(n - 1), av(n - 1), sv(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        kv[j] = coeffs.k_fn(grid[j]);
        av[j] = coeffs.a_fn(grid[j]);
        sv[j] = coeffs.sigma_fn(grid[j]);
        if (!std::isfinite(kv[j]) || !std::isfinite(av[j]) || !std::isfinite(sv[j]))
            throw DomainError("sample_fou: coefficient not finite on grid");
    }
    const std::string label = "fou(H=" + std::to_string(h.value()) + ",general)";
    return simulate(h, grid, n_paths, seed, label,
                    [&](std::span<const double> inc, std::span<double> out) {
                        out[0] = a0;
                        for (std::size_t j = 0; j < inc.size(); ++j)
                            out[j + 1] =
                                out[j] + (kv[j] - av[j] * out[j]) * step + sv[j] * inc[j];
                    });
}

double fcir_transform(double x, double sigma) {
    const double mag = sigma * sigma * x * x * 0.25;
    return x < 0.0 ? -mag : mag;
}

double fcir_transform_inverse(double r, double sigma) {
    const double mag = std::sqrt(4.0 * std::abs(r) / (sigma * sigma));
    return r < 0.0 ? -mag : mag;
}

PathBatch sample_fcir(double lambda, double sigma, double r0, HurstIndex h, const TimeGrid& grid,
                      std::size_t n_paths, std::uint64_t seed) {
    if (!(h.value() > 0.5))
        throw UnsupportedRegimeError("sample_fcir: pathwise solution requires H > 1/2");
    if (!(lambda > 0.0) || !(sigma > 0.0)) throw DomainError("sample_fcir: lambda, sigma must be > 0");
    if (!(r0 > 0.0)) throw DomainError("sample_fcir: r0 must be > 0");

    const double a0 = fcir_transform_inverse(r0, sigma);
    PathBatch latent =
        sample_fou(FouCoeffs::constants(0.0, 0.5 * lambda, 1.0), a0, h, grid, n_paths, seed);
    PathBatch batch{grid, n_paths, Vector(latent.values.size()),
                    "fcir(H=" + std::to_string(h.value()) + ",lambda=" + std::to_string(lambda) +
                        ",sigma=" + std::to_string(sigma) + ")",
                    seed};
    for (std::size_t i = 0; i < latent.values.size(); ++i)
        batch.values[i] = fcir_transform(latent.values[i], sigma);
    // R_0 = r0 exactly (inverse round-trip is within 1 ulp; pin the start)
    for (std::size_t p = 0; p < n_paths; ++p) batch.values[p * grid.size()] = r0;
    return batch;
}

std::pair<ObservationSet, Vector> subsample(const PathBatch& batch,
                                            std::span<const double> observation_times,
                                            double horizon) {
    if (observation_times.empty()) throw DomainError("subsample: no observation times");
    std::vector<std::size_t> idx(observation_times.size());
    for (std::size_t i = 0; i < observation_times.size(); ++i)
        idx[i] = batch.grid.index_of(observation_times[i]);
    const std::size_t h_idx = batch.grid.index_of(horizon);
    if (!(observation_times.back() < horizon))
        throw DomainError("subsample: horizon must lie beyond the last observation");

    ObservationSet obs{TimeGrid(Vector(observation_times.begin(), observation_times.end())),
                       batch.n_paths, Vector(batch.n_paths * observation_times.size()), horizon};
    Vector target(batch.n_paths);
    for (std::size_t p = 0; p < batch.n_paths; ++p) {
        const auto row = batch.path(p);
        for (std::size_t i = 0; i < idx.size(); ++i)
            obs.values[p * idx.size() + i] = row[idx[i]];
        target[p] = row[h_idx];
    }
    return {std::move(obs), std::move(target)};
}

}  // namespace fracpredict
