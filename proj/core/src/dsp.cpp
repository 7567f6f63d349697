#include "rehabkit/dsp.hpp"

#include <cmath>
#include <stdexcept>

namespace rehabkit {

void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");

    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    constexpr double kTwoPi = 2.0 * 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -kTwoPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<double> resample_linear(std::span<const double> x, int target_len) {
    if (x.empty()) throw std::invalid_argument("resample_linear: empty input");
    if (target_len <= 0) throw std::invalid_argument("resample_linear: bad target length");
    std::vector<double> out(static_cast<std::size_t>(target_len));
    const std::size_t n = x.size();
    if (n == 1 || target_len == 1) {
        for (auto& v : out) v = x[0];
        return out;
    }
    const double step = static_cast<double>(n - 1) / static_cast<double>(target_len - 1);
    for (int i = 0; i < target_len; ++i) {
        const double pos = step * i;
        std::size_t lo = static_cast<std::size_t>(pos);
        if (lo >= n - 1) lo = n - 2;
        const double frac = pos - static_cast<double>(lo);
        out[static_cast<std::size_t>(i)] = x[lo] + frac * (x[lo + 1] - x[lo]);
    }
    return out;
}

std::vector<double> spectral_magnitudes(std::span<const double> slice, int n_bins) {
    if (slice.empty()) throw std::invalid_argument("spectral_magnitudes: empty input");
    const std::vector<double> r = resample_linear(slice, kSpectrumLength);
    std::vector<std::complex<double>> buf(r.begin(), r.end());
    fft_radix2(buf);
    std::vector<double> out(static_cast<std::size_t>(n_bins));
    for (int k = 1; k <= n_bins; ++k)
        out[static_cast<std::size_t>(k - 1)] =
            std::abs(buf[static_cast<std::size_t>(k)]) / kSpectrumLength;
    return out;
}

} // namespace rehabkit
