#ifndef FRACPREDICT_FFT_HPP
#define FRACPREDICT_FFT_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "fracpredict/errors.hpp"

namespace fracpredict {

/// In-place radix-2 complex FFT (forward: e^{-2*pi*i/n} convention).
/// Size must be a power of two. Twiddle factors are precomputed so one plan
/// can be shared read-only across worker threads.
class Fft {
  public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }

    void forward(std::span<std::complex<double>> data) const { transform(data, false); }
    void inverse(std::span<std::complex<double>> data) const { transform(data, true); }

    static bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
    static std::size_t next_pow2(std::size_t n);

  private:
    void transform(std::span<std::complex<double>> data, bool inverse) const;

    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddle_;  // e^{-2 pi i k / n}, k < n/2
};

}  // namespace fracpredict

#endif
