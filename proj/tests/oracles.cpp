#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kSpectrumLen = 256;

double quantile_ref(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - (h - static_cast<double>(lo))) +
           sorted[lo + 1] * (h - static_cast<double>(lo));
}
} // namespace

std::vector<std::complex<double>> naive_dft(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = -2.0 * kPi * static_cast<double>(k) * static_cast<double>(t) /
                               static_cast<double>(n);
            acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

std::vector<double> naive_resample(std::span<const double> x, int target_len) {
    std::vector<double> out(static_cast<std::size_t>(target_len));
    if (x.size() == 1 || target_len == 1) {
        std::fill(out.begin(), out.end(), x[0]);
        return out;
    }
    for (int i = 0; i < target_len; ++i) {
        const double pos = static_cast<double>(i) * static_cast<double>(x.size() - 1) /
                           static_cast<double>(target_len - 1);
        auto lo = static_cast<std::size_t>(std::floor(pos));
        if (lo >= x.size() - 1) lo = x.size() - 2;
        const double f = pos - static_cast<double>(lo);
        out[static_cast<std::size_t>(i)] = (1.0 - f) * x[lo] + f * x[lo + 1];
    }
    return out;
}

double butterworth_magnitude(double freq_hz, double cutoff_hz, int order) {
    return 1.0 / std::sqrt(1.0 + std::pow(freq_hz / cutoff_hz, 2.0 * order));
}

double measure_amplitude(std::span<const double> x, double freq_hz, double fs_hz,
                         std::size_t start) {
    const double period_samples = fs_hz / freq_hz;
    const auto periods =
        static_cast<std::size_t>(std::floor(static_cast<double>(x.size() - start) / period_samples));
    const auto len = static_cast<std::size_t>(std::floor(static_cast<double>(periods) * period_samples));
    double cs = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        const double ang = 2.0 * kPi * freq_hz * static_cast<double>(start + i) / fs_hz;
        cs += x[start + i] * std::cos(ang);
        sn += x[start + i] * std::sin(ang);
    }
    return 2.0 * std::sqrt(cs * cs + sn * sn) / static_cast<double>(len);
}

double band_energy(std::span<const double> x, double fs_hz, double lo_hz, double hi_hz) {
    const auto spec = naive_dft(x);
    const std::size_t n = x.size();
    double e = 0.0;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double f = static_cast<double>(k) * fs_hz / static_cast<double>(n);
        if (f > lo_hz && f <= hi_hz) e += std::norm(spec[k]);
    }
    return e;
}

std::array<double, 14> static_features_reference(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (const double v : x) {
        m2 += std::pow(v - mean, 2.0);
        m3 += std::pow(v - mean, 3.0);
        m4 += std::pow(v - mean, 4.0);
    }
    m2 /= n; m3 /= n; m4 /= n;
    const double sd = std::sqrt(m2);

    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const double mx = sorted.back(), mn = sorted.front();

    double pos = 0.0, neg = 0.0;
    int npos = 0, nneg = 0;
    for (const double v : x) {
        if (v - mean > 0.0) { pos += v - mean; ++npos; }
        if (v - mean < 0.0) { neg += v - mean; ++nneg; }
    }
    double sad = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) sad += std::fabs(x[i] - x[i - 1]);

    return {mean,
            quantile_ref(sorted, 0.5),
            sd,
            m2,
            mx - mn,
            sd > 0.0 ? m4 / (m2 * m2) : 0.0,
            sd > 0.0 ? m3 / (m2 * sd) : 0.0,
            mx,
            mn,
            npos ? pos / npos : 0.0,
            nneg ? neg / nneg : 0.0,
            sad,
            quantile_ref(sorted, 0.25),
            quantile_ref(sorted, 0.75)};
}

std::array<double, 25> dynamic_features_reference(std::span<const double> x) {
    const auto n = static_cast<double>(x.size());
    double energy = 0.0;
    for (const double v : x) energy += v * v;

    const std::vector<double> res = naive_resample(x, kSpectrumLen);
    const auto spec = naive_dft(res);
    std::array<double, 129> power{};
    for (int k = 1; k <= 128; ++k) power[static_cast<std::size_t>(k)] = std::norm(spec[static_cast<std::size_t>(k)]);

    double low = 0.0, half = 0.0;
    for (int k = 1; k <= 32; ++k) low += power[static_cast<std::size_t>(k)];
    for (int k = 1; k <= 128; ++k) half += power[static_cast<std::size_t>(k)];

    double harmonic = 0.0;
    if (half > 0.0) {
        int f0 = 1;
        for (int k = 2; k <= 128; ++k)
            if (power[static_cast<std::size_t>(k)] > power[static_cast<std::size_t>(f0)]) f0 = k;
        harmonic = power[static_cast<std::size_t>(f0)];
        if (2 * f0 <= 128) harmonic += power[static_cast<std::size_t>(2 * f0)];
        if (3 * f0 <= 128) harmonic += power[static_cast<std::size_t>(3 * f0)];
        harmonic /= half;
    }

    double entropy = 0.0;
    if (energy > 0.0) {
        for (int f = 0; f < 10; ++f) {
            const std::size_t lo = x.size() * static_cast<std::size_t>(f) / 10;
            const std::size_t hi = x.size() * static_cast<std::size_t>(f + 1) / 10;
            double fe = 0.0;
            for (std::size_t i = lo; i < hi; ++i) fe += x[i] * x[i];
            if (fe > 0.0) entropy -= (fe / energy) * std::log2(fe / energy);
        }
    }

    std::array<double, 25> out{};
    out[0] = energy;
    out[1] = half > 0.0 ? low / half : 0.0;
    out[2] = energy / n;
    out[3] = harmonic;
    out[4] = entropy;
    for (int k = 1; k <= 20; ++k)
        out[static_cast<std::size_t>(4 + k)] = std::abs(spec[static_cast<std::size_t>(k)]) / kSpectrumLen;
    return out;
}

std::vector<double> repetition_features_reference(
    const std::array<std::vector<double>, 9>& slices) {
    std::vector<double> out;
    out.reserve(353);
    for (const auto& s : slices) {
        const auto st = static_features_reference(s);
        out.insert(out.end(), st.begin(), st.end());
        const auto dy = dynamic_features_reference(s);
        out.insert(out.end(), dy.begin(), dy.end());
    }
    // Pearson correlation of pitch (index 7) and roll (index 8).
    const auto& p = slices[7];
    const auto& r = slices[8];
    const auto n = static_cast<double>(p.size());
    double mp = 0.0, mr = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) { mp += p[i]; mr += r[i]; }
    mp /= n; mr /= n;
    double cov = 0.0, vp = 0.0, vr = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        cov += (p[i] - mp) * (r[i] - mr);
        vp += (p[i] - mp) * (p[i] - mp);
        vr += (r[i] - mr) * (r[i] - mr);
    }
    const double corr = (vp > 0.0 && vr > 0.0) ? cov / std::sqrt(vp * vr) : 0.0;
    out.push_back(corr);
    out.push_back(corr);
    return out;
}

std::array<std::array<double, 3>, 3> rotation_matrix(double axis_x, double axis_y, double axis_z,
                                                     double angle) {
    const double norm = std::sqrt(axis_x * axis_x + axis_y * axis_y + axis_z * axis_z);
    const double ux = axis_x / norm, uy = axis_y / norm, uz = axis_z / norm;
    const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
    return {{{t * ux * ux + c, t * ux * uy - s * uz, t * ux * uz + s * uy},
             {t * ux * uy + s * uz, t * uy * uy + c, t * uy * uz - s * ux},
             {t * ux * uz - s * uy, t * uy * uz + s * ux, t * uz * uz + c}}};
}

} // namespace oracle
