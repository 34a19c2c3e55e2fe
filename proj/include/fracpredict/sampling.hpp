#ifndef FRACPREDICT_SAMPLING_HPP
#define FRACPREDICT_SAMPLING_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracpredict/covariance.hpp"
#include "fracpredict/fft.hpp"
#include "fracpredict/linalg.hpp"
#include "fracpredict/types.hpp"

namespace fracpredict {

/// Simulated sample paths on a shared grid, row-major n_paths x |grid|.
struct PathBatch {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::vector<double> values;
    std::string model_label;
    std::uint64_t seed = 0;

    double at(std::size_t path, std::size_t i) const { return values[path * grid.size() + i]; }
    std::span<const double> path(std::size_t p) const {
        return {values.data() + p * grid.size(), grid.size()};
    }
};

/// Observed coordinates (t_1..t_N = s) of each path, plus the horizon T > s.
struct ObservationSet {
    TimeGrid times;
    std::size_t n_paths = 0;
    std::vector<double> values;  // n_paths x |times|
    double horizon = 0.0;

    std::span<const double> row(std::size_t p) const {
        return {values.data() + p * times.size(), times.size()};
    }
};

/// fOU drift/diffusion coefficients. Constant coefficients get the exact
/// exponential-kernel path; function coefficients fall back to Euler-Maruyama.
struct FouCoeffs {
    bool is_constant = true;
    double k = 0.0, a = 0.0, sigma = 1.0;
    std::function<double(double)> k_fn, a_fn, sigma_fn;

    static FouCoeffs constants(double k, double a, double sigma) {
        FouCoeffs c;
        c.k = k;
        c.a = a;
        c.sigma = sigma;
        return c;
    }
    static FouCoeffs functions(std::function<double(double)> k, std::function<double(double)> a,
                               std::function<double(double)> sigma) {
        FouCoeffs c;
        c.is_constant = false;
        c.k_fn = std::move(k);
        c.a_fn = std::move(a);
        c.sigma_fn = std::move(sigma);
        return c;
    }
};

/// Exact-in-distribution fBm increment sampler on an equally spaced grid:
/// circulant embedding of the fGn autocovariance with a Cholesky fallback.
/// One instance holds the spectral/factor data and serves all paths.
class FbmSampler {
  public:
    FbmSampler(HurstIndex h, const TimeGrid& grid, bool force_cholesky = false);

    std::size_t n_increments() const { return m_; }
    bool cholesky_fallback() const { return use_cholesky_; }

    /// Increments of path `path_index` of the stream `seed`, deterministic in
    /// (seed, path_index) regardless of call order or worker count.
    void fill_increments(std::uint64_t seed, std::size_t path_index, std::span<double> out) const;

  private:
    std::size_t m_;
    double dt_;
    bool use_cholesky_ = false;
    std::size_t embed_size_ = 0;
    Vector spectrum_sqrt_;            // sqrt(lambda_k / g), circulant route
    std::shared_ptr<const Fft> fft_;  // plan shared across threads
    Matrix chol_;                     // fallback factor of the fGn Toeplitz
};

PathBatch sample_fbm(HurstIndex h, const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

/// Z_t = sum_{u_j < t} f(u_j) dB_j (left-point sum against fBm increments).
PathBatch sample_integral_process(const std::function<double(double)>& f, HurstIndex h,
                                  const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

PathBatch sample_fou(const FouCoeffs& coeffs, double a0, HurstIndex h, const TimeGrid& grid,
                     std::size_t n_paths, std::uint64_t seed);

PathBatch sample_fcir(double lambda, double sigma, double r0, HurstIndex h, const TimeGrid& grid,
                      std::size_t n_paths, std::uint64_t seed);

/// fCIR pathwise map f(x) = sgn(x) sigma^2 x^2 / 4 and its positive-branch inverse.
double fcir_transform(double x, double sigma);
double fcir_transform_inverse(double r, double sigma);

/// Exact subsampling (no interpolation): observed columns at `observation_times`
/// and the target column at `horizon`.
std::pair<ObservationSet, Vector> subsample(const PathBatch& batch,
                                            std::span<const double> observation_times,
                                            double horizon);

}  // namespace fracpredict

#endif
