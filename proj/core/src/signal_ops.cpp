#include "rehabkit/signal_ops.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "rehabkit/errors.hpp"

namespace rehabkit {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Expands prod (z - roots[i]) into monomial coefficients, highest power first.
std::vector<std::complex<double>> poly_from_roots(const std::vector<std::complex<double>>& roots) {
    std::vector<std::complex<double>> coeffs{1.0};
    for (const auto& r : roots) {
        std::vector<std::complex<double>> next(coeffs.size() + 1, 0.0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i] += coeffs[i];
            next[i + 1] -= coeffs[i] * r;
        }
        coeffs = std::move(next);
    }
    return coeffs;
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b, int n) {
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(A[col * n + col]);
        for (int r = col + 1; r < n; ++r) {
            const double v = std::abs(A[r * n + col]);
            if (v > best) { best = v; pivot = r; }
        }
        if (best == 0.0) throw std::runtime_error("singular system in filter setup");
        if (pivot != col) {
            for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] / A[col * n + col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

} // namespace

IirCoeffs butterworth_design(double cutoff_hz, int order, double fs_hz) {
    if (order < 1) throw std::invalid_argument("butterworth_design: order must be positive");
    if (!(fs_hz > 0.0)) throw std::invalid_argument("butterworth_design: bad sampling rate");
    if (!(cutoff_hz > 0.0) || cutoff_hz >= fs_hz / 2.0)
        throw std::invalid_argument("butterworth_design: cutoff must lie in (0, Nyquist)");

    // Analog prototype poles on the left unit semicircle, scaled by the
    // prewarped cutoff, then mapped with the bilinear transform.
    const double warped = 2.0 * fs_hz * std::tan(kPi * cutoff_hz / fs_hz);
    std::vector<std::complex<double>> zpoles;
    zpoles.reserve(static_cast<std::size_t>(order));
    for (int k = 0; k < order; ++k) {
        const double theta = kPi / 2.0 + kPi * (2.0 * k + 1.0) / (2.0 * order);
        const std::complex<double> p = warped * std::complex<double>(std::cos(theta), std::sin(theta));
        zpoles.push_back((2.0 * fs_hz + p) / (2.0 * fs_hz - p));
    }
    const std::vector<std::complex<double>> zzeros(static_cast<std::size_t>(order),
                                                   std::complex<double>(-1.0, 0.0));

    const auto bc = poly_from_roots(zzeros);
    const auto ac = poly_from_roots(zpoles);

    IirCoeffs c;
    c.b.resize(bc.size());
    c.a.resize(ac.size());
    for (std::size_t i = 0; i < ac.size(); ++i) c.a[i] = ac[i].real();

    // Unit gain at DC: H(1) = sum(b)/sum(a) = 1.
    double bsum = 0.0, asum = 0.0;
    for (const auto& v : bc) bsum += v.real();
    for (const double v : c.a) asum += v;
    const double gain = asum / bsum;
    for (std::size_t i = 0; i < bc.size(); ++i) c.b[i] = bc[i].real() * gain;
    return c;
}

std::vector<double> steady_state_delays(const IirCoeffs& c) {
    const int n = c.order();
    // Solve (I - C^T) zi = b[1:] - a[1:] * b[0], where C is the companion
    // matrix of the denominator (transposed direct form II state update).
    std::vector<double> A(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<double> rhs(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        A[i * n + 0] = (i == 0 ? 1.0 : 0.0) + c.a[i + 1];
        if (i > 0) A[(i - 1) * n + i] -= 1.0;
        A[i * n + i] += (i == 0 ? 0.0 : 1.0);
        rhs[i] = c.b[i + 1] - c.a[i + 1] * c.b[0];
    }
    return solve_dense(std::move(A), std::move(rhs), n);
}

std::vector<double> iir_filter(const IirCoeffs& c, std::span<const double> x,
                               std::span<const double> zi) {
    const int n = c.order();
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    if (!zi.empty()) {
        if (static_cast<int>(zi.size()) != n)
            throw std::invalid_argument("iir_filter: initial state size mismatch");
        std::copy(zi.begin(), zi.end(), z.begin());
    }
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double xi = x[i];
        const double yi = c.b[0] * xi + z[0];
        for (int k = 0; k < n - 1; ++k)
            z[k] = c.b[k + 1] * xi + z[k + 1] - c.a[k + 1] * yi;
        z[n - 1] = c.b[n] * xi - c.a[n] * yi;
        y[i] = yi;
    }
    return y;
}

namespace {

void check_filter_input(std::span<const double> signal, int order) {
    if (static_cast<int>(signal.size()) < 3 * order)
        throw std::invalid_argument("butterworth: signal too short for filter order");
}

// Extends the signal on both ends by reflecting about the edge values,
// which keeps constants constant and suppresses startup transients.
std::vector<double> reflect_extend(std::span<const double> x, int pad) {
    std::vector<double> ext;
    ext.reserve(x.size() + 2 * static_cast<std::size_t>(pad));
    const std::size_t n = x.size();
    for (int i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[static_cast<std::size_t>(i)]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (int i = 1; i <= pad; ++i)
        ext.push_back(2.0 * x[n - 1] - x[n - 1 - static_cast<std::size_t>(i)]);
    return ext;
}

std::vector<double> filter_with_steady_start(const IirCoeffs& c, std::span<const double> x,
                                             const std::vector<double>& zi_unit) {
    std::vector<double> zi(zi_unit.size());
    for (std::size_t i = 0; i < zi.size(); ++i) zi[i] = zi_unit[i] * x[0];
    return iir_filter(c, x, zi);
}

} // namespace

std::vector<double> butterworth_forward(std::span<const double> signal, double cutoff_hz,
                                        int order, double fs_hz) {
    check_filter_input(signal, order);
    const IirCoeffs c = butterworth_design(cutoff_hz, order, fs_hz);
    return filter_with_steady_start(c, signal, steady_state_delays(c));
}

std::vector<double> butterworth_lowpass(std::span<const double> signal, double cutoff_hz,
                                        int order, double fs_hz) {
    check_filter_input(signal, order);
    const IirCoeffs c = butterworth_design(cutoff_hz, order, fs_hz);
    const std::vector<double> zi = steady_state_delays(c);
    const int pad = std::min(3 * order, static_cast<int>(signal.size()) - 1);

    std::vector<double> ext = reflect_extend(signal, pad);
    std::vector<double> y = filter_with_steady_start(c, ext, zi);
    std::reverse(y.begin(), y.end());
    y = filter_with_steady_start(c, y, zi);
    std::reverse(y.begin(), y.end());

    return std::vector<double>(y.begin() + pad, y.begin() + pad + static_cast<long>(signal.size()));
}

std::array<std::vector<double>, kChannelCount> derive_channels(const RawRecording& raw,
                                                               MagnitudeSource mag_source) {
    if (raw.samples.empty()) throw std::invalid_argument("derive_channels: empty input");
    const std::size_t n = raw.samples.size();
    std::array<std::vector<double>, kChannelCount> out;
    for (auto& v : out) v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const RawSample& s = raw.samples[i];
        out[index_of(Channel::AX)][i] = s.ax;
        out[index_of(Channel::AY)][i] = s.ay;
        out[index_of(Channel::AZ)][i] = s.az;
        out[index_of(Channel::GX)][i] = s.gx;
        out[index_of(Channel::GY)][i] = s.gy;
        out[index_of(Channel::GZ)][i] = s.gz;
        const double mx = mag_source == MagnitudeSource::gyro ? s.gx : s.ax;
        const double my = mag_source == MagnitudeSource::gyro ? s.gy : s.ay;
        const double mz = mag_source == MagnitudeSource::gyro ? s.gz : s.az;
        out[index_of(Channel::MAG)][i] = std::sqrt(mx * mx + my * my + mz * mz);
        out[index_of(Channel::PITCH)][i] = std::atan2(-s.ax, std::sqrt(s.ay * s.ay + s.az * s.az));
        out[index_of(Channel::ROLL)][i] = std::atan2(s.ay, s.az);
    }
    return out;
}

std::vector<double> minmax_normalize(std::span<const double> signal, ChannelBounds* out_bounds) {
    if (signal.empty()) throw std::invalid_argument("minmax_normalize: empty input");
    const auto [mn_it, mx_it] = std::minmax_element(signal.begin(), signal.end());
    const ChannelBounds bounds{*mn_it, *mx_it};
    if (out_bounds) *out_bounds = bounds;
    std::vector<double> out(signal.size());
    if (bounds.degenerate()) return out; // constant input maps to all zeros
    const double inv = 1.0 / (bounds.max - bounds.min);
    for (std::size_t i = 0; i < signal.size(); ++i) out[i] = (signal[i] - bounds.min) * inv;
    return out;
}

ProcessedRecording preprocess(const RawRecording& raw, double cutoff_hz,
                              MagnitudeSource mag_source) {
    if (raw.samples.empty()) throw std::invalid_argument("preprocess: empty input");
    raw.validate();

    ProcessedRecording rec;
    rec.cutoff_hz = cutoff_hz;
    rec.filter_order = 4;
    rec.mag_source = mag_source;
    rec.subject_id = raw.subject_id;
    rec.exercise = raw.exercise;
    rec.device = raw.device;

    auto derived = derive_channels(raw, mag_source);
    for (int ch = 0; ch < kChannelCount; ++ch) {
        const std::vector<double> filtered =
            butterworth_lowpass(derived[ch], cutoff_hz, rec.filter_order,
                                raw.device.sampling_rate_hz);
        rec.vectors[ch] = minmax_normalize(filtered, &rec.bounds[ch]);
    }
    return rec;
}

} // namespace rehabkit
