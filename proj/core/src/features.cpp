#include "rehabkit/features.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "rehabkit/dsp.hpp"

namespace rehabkit {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : data) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

const char* kStaticNames[kStaticFeatureCount] = {
    "mean", "median", "std",      "var",      "range",    "kurtosis", "skewness",
    "max",  "min",    "pos_mean", "neg_mean", "abs_diff_sum", "q1",   "q3"};

std::vector<std::string> dynamic_names() {
    std::vector<std::string> names = {"energy", "energy_ratio", "energy_avg",
                                      "harmonic_ratio", "energy_entropy"};
    for (int k = 1; k <= kSpectralCoeffCount; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "fft_%02d", k);
        names.emplace_back(buf);
    }
    return names;
}

} // namespace

FeatureSchema::FeatureSchema(std::string version, std::vector<Entry> entries)
    : version_(std::move(version)), entries_(std::move(entries)) {
    std::string blob = version_;
    for (const Entry& e : entries_) {
        blob += '\n';
        blob += e.column;
    }
    hash_ = fnv1a64(blob);
}

FeatureSchema FeatureSchema::standard() {
    std::vector<Entry> entries;
    entries.reserve(kRepetitionFeatureCount);
    const auto dyn = dynamic_names();
    for (Channel c : kAllChannels) {
        const std::string prefix = std::string(channel_name(c)) + "_";
        for (const char* n : kStaticNames) entries.push_back({prefix + n});
        for (const auto& n : dyn) entries.push_back({prefix + n});
    }
    entries.push_back({"pitch_corr_pitch_roll"});
    entries.push_back({"roll_corr_pitch_roll"});
    return FeatureSchema("rehabkit-features-v1", std::move(entries));
}

FeatureSchema FeatureSchema::chunk_schema() {
    std::vector<Entry> entries = {{"length"}, {"height"}, {"std"}, {"skewness"}, {"kurtosis"}};
    for (int k = 1; k <= kSpectralCoeffCount; ++k) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "fft_%02d", k);
        entries.push_back({buf});
    }
    return FeatureSchema("rehabkit-chunks-v1", std::move(entries));
}

FeatureSchema FeatureSchema::custom(std::string version, const std::vector<std::string>& columns) {
    std::vector<Entry> entries;
    entries.reserve(columns.size());
    for (const auto& c : columns) entries.push_back({c});
    return FeatureSchema(std::move(version), std::move(entries));
}

namespace {

struct Moments {
    double mean = 0.0, var = 0.0, skew = 0.0, kurt = 0.0;
};

// Population central moments; skewness and non-excess kurtosis are
// defined as 0 for (numerically) constant input.
Moments central_moments(std::span<const double> x) {
    Moments m;
    const double n = static_cast<double>(x.size());
    for (const double v : x) m.mean += v;
    m.mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double v : x) {
        const double d = v - m.mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n; m3 /= n; m4 /= n;
    m.var = m2;
    if (m2 > 0.0) {
        m.skew = m3 / std::pow(m2, 1.5);
        m.kurt = m4 / (m2 * m2);
    }
    return m;
}

} // namespace

double quantile_linear(std::span<const double> signal, double q) {
    if (signal.empty()) throw std::invalid_argument("quantile_linear: empty input");
    std::vector<double> sorted(signal.begin(), signal.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::array<double, kStaticFeatureCount> static_features(std::span<const double> signal) {
    if (signal.empty()) throw std::invalid_argument("static_features: empty input");

    const auto [mn_it, mx_it] = std::minmax_element(signal.begin(), signal.end());
    if (*mn_it == *mx_it) {
        // constant input: moments and centered means are 0 by decision
        const double v = signal[0];
        return {v, v, 0.0, 0.0, 0.0, 0.0, 0.0, v, v, 0.0, 0.0, 0.0, v, v};
    }
    const Moments m = central_moments(signal);

    double pos_sum = 0.0, neg_sum = 0.0;
    std::size_t pos_n = 0, neg_n = 0;
    for (const double v : signal) {
        const double d = v - m.mean;
        if (d > 0.0) { pos_sum += d; ++pos_n; }
        else if (d < 0.0) { neg_sum += d; ++neg_n; }
    }
    double abs_diff = 0.0;
    for (std::size_t i = 1; i < signal.size(); ++i) abs_diff += std::abs(signal[i] - signal[i - 1]);

    return {m.mean,
            quantile_linear(signal, 0.5),
            std::sqrt(m.var),
            m.var,
            *mx_it - *mn_it,
            m.kurt,
            m.skew,
            *mx_it,
            *mn_it,
            pos_n ? pos_sum / static_cast<double>(pos_n) : 0.0,
            neg_n ? neg_sum / static_cast<double>(neg_n) : 0.0,
            abs_diff,
            quantile_linear(signal, 0.25),
            quantile_linear(signal, 0.75)};
}

std::array<double, kDynamicFeatureCount> dynamic_features(std::span<const double> signal) {
    if (signal.empty()) throw std::invalid_argument("dynamic_features: empty input");
    const double n = static_cast<double>(signal.size());

    double energy = 0.0;
    for (const double v : signal) energy += v * v;

    // Spectrum of the 256-point resampled slice, squared magnitudes for
    // the band ratios (non-DC bins up to Nyquist).
    const std::vector<double> res = resample_linear(signal, kSpectrumLength);
    std::vector<std::complex<double>> buf(res.begin(), res.end());
    fft_radix2(buf);
    const int half = kSpectrumLength / 2;            // 128
    const int low_band = kSpectrumLength / 8;        // 32
    std::vector<double> power(static_cast<std::size_t>(half) + 1, 0.0);
    for (int k = 1; k <= half; ++k) power[static_cast<std::size_t>(k)] = std::norm(buf[static_cast<std::size_t>(k)]);

    double low_energy = 0.0, half_energy = 0.0;
    for (int k = 1; k <= low_band; ++k) low_energy += power[static_cast<std::size_t>(k)];
    for (int k = 1; k <= half; ++k) half_energy += power[static_cast<std::size_t>(k)];
    const double energy_ratio = half_energy > 0.0 ? low_energy / half_energy : 0.0;

    double harmonic_ratio = 0.0;
    if (half_energy > 0.0) {
        int f0 = 1;
        for (int k = 2; k <= half; ++k)
            if (power[static_cast<std::size_t>(k)] > power[static_cast<std::size_t>(f0)]) f0 = k;
        double harm = power[static_cast<std::size_t>(f0)];
        if (2 * f0 <= half) harm += power[static_cast<std::size_t>(2 * f0)];
        if (3 * f0 <= half) harm += power[static_cast<std::size_t>(3 * f0)];
        harmonic_ratio = harm / half_energy;
    }

    // Entropy of the energy distribution over 10 equal time frames.
    double entropy = 0.0;
    if (energy > 0.0) {
        constexpr int kFrames = 10;
        const std::size_t len = signal.size();
        for (int f = 0; f < kFrames; ++f) {
            const std::size_t lo = len * static_cast<std::size_t>(f) / kFrames;
            const std::size_t hi = len * (static_cast<std::size_t>(f) + 1) / kFrames;
            double fe = 0.0;
            for (std::size_t i = lo; i < hi; ++i) fe += signal[i] * signal[i];
            const double p = fe / energy;
            if (p > 0.0) entropy -= p * std::log2(p);
        }
    }

    std::array<double, kDynamicFeatureCount> out{};
    out[0] = energy;
    out[1] = energy_ratio;
    out[2] = energy / n;
    out[3] = harmonic_ratio;
    out[4] = entropy;
    for (int k = 1; k <= kSpectralCoeffCount; ++k)
        out[static_cast<std::size_t>(4 + k)] =
            std::abs(buf[static_cast<std::size_t>(k)]) / kSpectrumLength;
    return out;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("pearson_correlation: length mismatch");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) { ma += a[i]; mb += b[i]; }
    ma /= n; mb /= n;
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va <= 0.0 || vb <= 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

FeatureVector repetition_feature_vector(
    const std::array<std::span<const double>, kChannelCount>& slices) {
    const std::size_t len = slices[0].size();
    if (len == 0) throw std::invalid_argument("repetition_feature_vector: empty slices");
    for (const auto& s : slices)
        if (s.size() != len)
            throw std::invalid_argument("repetition_feature_vector: channel length mismatch");

    FeatureVector fv;
    fv.values.reserve(kRepetitionFeatureCount);
    for (int ch = 0; ch < kChannelCount; ++ch) {
        const auto st = static_features(slices[static_cast<std::size_t>(ch)]);
        fv.values.insert(fv.values.end(), st.begin(), st.end());
        const auto dy = dynamic_features(slices[static_cast<std::size_t>(ch)]);
        fv.values.insert(fv.values.end(), dy.begin(), dy.end());
    }
    const double corr = pearson_correlation(slices[index_of(Channel::PITCH)],
                                            slices[index_of(Channel::ROLL)]);
    fv.values.push_back(corr);
    fv.values.push_back(corr);

    assert(fv.values.size() == kRepetitionFeatureCount);
    for (const double v : fv.values)
        if (!std::isfinite(v))
            throw std::runtime_error("repetition_feature_vector: non-finite feature");
    return fv;
}

} // namespace rehabkit
