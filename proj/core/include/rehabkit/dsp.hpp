#pragma once

#include <complex>
#include <span>
#include <vector>

namespace rehabkit {

/// Spectral features are computed on slices resampled to this length so
/// variable-duration repetitions yield comparable coefficients.
inline constexpr int kSpectrumLength = 256;

/// In-place iterative radix-2 FFT. Size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a);

/// Resamples a signal to `target_len` points by linear interpolation,
/// mapping endpoints onto endpoints.
std::vector<double> resample_linear(std::span<const double> x, int target_len);

/// Magnitudes |X_k| / kSpectrumLength for bins k = 1..n_bins of the
/// kSpectrumLength-point transform of the resampled slice.
std::vector<double> spectral_magnitudes(std::span<const double> slice, int n_bins);

} // namespace rehabkit
