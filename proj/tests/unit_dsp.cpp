#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "rehabkit/dsp.hpp"
#include "rehabkit/rng.hpp"

using namespace rehabkit;

TEST_CASE("fft matches the naive DFT on random data") {
    Rng rng(11);
    std::vector<double> x(256);
    for (auto& v : x) v = rng.next_gaussian();

    std::vector<std::complex<double>> buf(x.begin(), x.end());
    fft_radix2(buf);
    const auto ref = oracle::naive_dft(x);
    for (std::size_t k = 0; k < x.size(); ++k)
        CHECK(std::abs(buf[k] - ref[k]) < 1e-9 * (1.0 + std::abs(ref[k])));
}

TEST_CASE("fft rejects non-power-of-two sizes") {
    std::vector<std::complex<double>> buf(100);
    CHECK_THROWS_AS(fft_radix2(buf), std::invalid_argument);
}

TEST_CASE("resample_linear maps endpoints onto endpoints") {
    const std::vector<double> x = {1.0, 3.0, -2.0, 5.0};
    const auto y = resample_linear(x, 256);
    CHECK(y.front() == doctest::Approx(1.0));
    CHECK(y.back() == doctest::Approx(5.0));
    CHECK(y.size() == 256);
}

TEST_CASE("resample_linear on a single sample repeats it") {
    const std::vector<double> x = {7.5};
    const auto y = resample_linear(x, 16);
    for (const double v : y) CHECK(v == 7.5);
}

TEST_CASE("resampling a linear ramp is exact") {
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.3 * static_cast<double>(i) - 4.0;
    const auto y = resample_linear(x, 256);
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double pos = static_cast<double>(i) * 99.0 / 255.0;
        CHECK(y[i] == doctest::Approx(0.3 * pos - 4.0).epsilon(1e-12));
    }
}

TEST_CASE("spectral magnitudes match the naive pipeline") {
    Rng rng(5);
    std::vector<double> x(311);
    for (auto& v : x) v = rng.next_double();

    const auto mags = spectral_magnitudes(x, 20);
    const auto res = oracle::naive_resample(x, 256);
    const auto spec = oracle::naive_dft(res);
    REQUIRE(mags.size() == 20);
    for (int k = 1; k <= 20; ++k)
        CHECK(mags[static_cast<std::size_t>(k - 1)] ==
              doctest::Approx(std::abs(spec[static_cast<std::size_t>(k)]) / 256.0).epsilon(1e-9));
}
