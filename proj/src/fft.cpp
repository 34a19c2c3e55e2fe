#include "fracpredict/fft.hpp"

#include <cmath>

namespace fracpredict {

std::size_t Fft::next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

Fft::Fft(std::size_t n) : n_(n) {
    if (!is_pow2(n)) throw DomainError("Fft: size must be a power of two");
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    const double base = -6.283185307179586476925286766559 / static_cast<double>(n);
    for (std::size_t k = 0; k < n / 2; ++k)
        twiddle_[k] = {std::cos(base * static_cast<double>(k)), std::sin(base * static_cast<double>(k))};
}

void Fft::transform(std::span<std::complex<double>> data, bool inverse) const {
    if (data.size() != n_) throw ShapeError("Fft: buffer size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(data[i], data[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                std::complex<double> w = twiddle_[k * stride];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = data[start + k];
                const std::complex<double> t = w * data[start + k + half];
                data[start + k] = u + t;
                data[start + k + half] = u - t;
            }
        }
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n_);
        for (auto& x : data) x *= inv_n;
    }
}

}  // namespace fracpredict
