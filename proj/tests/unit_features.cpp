#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "rehabkit/features.hpp"
#include "rehabkit/rng.hpp"

using namespace rehabkit;

namespace {

std::array<std::span<const double>, kChannelCount>
spans_of(const std::array<std::vector<double>, kChannelCount>& slices) {
    std::array<std::span<const double>, kChannelCount> out;
    for (int i = 0; i < kChannelCount; ++i)
        out[static_cast<std::size_t>(i)] = slices[static_cast<std::size_t>(i)];
    return out;
}

std::array<std::vector<double>, kChannelCount> random_repetition(Rng& rng, std::size_t len) {
    std::array<std::vector<double>, kChannelCount> slices;
    for (auto& s : slices) {
        s.resize(len);
        for (auto& v : s) v = rng.next_double();
    }
    return slices;
}

} // namespace

TEST_CASE("static features on 1..5 match hand arithmetic") {
    const std::vector<double> x = {1, 2, 3, 4, 5};
    const auto f = static_features(x);
    CHECK(f[0] == doctest::Approx(3.0));   // mean
    CHECK(f[1] == doctest::Approx(3.0));   // median
    CHECK(f[4] == doctest::Approx(4.0));   // range
    CHECK(f[11] == doctest::Approx(4.0));  // sum abs diff
    CHECK(f[12] == doctest::Approx(2.0));  // q1
    CHECK(f[13] == doctest::Approx(4.0));  // q3
}

TEST_CASE("static features on constant input use the degenerate decisions") {
    const std::vector<double> x(17, 4.2);
    const auto f = static_features(x);
    CHECK(f[3] == 0.0);  // variance
    CHECK(f[5] == 0.0);  // kurtosis
    CHECK(f[6] == 0.0);  // skewness
    CHECK(f[9] == 0.0);  // positive mean
    CHECK(f[10] == 0.0); // negative mean
    CHECK_THROWS_WITH_AS(static_cast<void>(static_features(std::vector<double>{})),
                         doctest::Contains("empty input"), std::invalid_argument);
}

TEST_CASE("static features match the brute-force reference on random vectors") {
    Rng rng(101);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t len = 2 + rng.next_below(500);
        std::vector<double> x(len);
        for (auto& v : x) v = rng.uniform(-3.0, 7.0);
        const auto got = static_features(x);
        const auto ref = oracle::static_features_reference(x);
        for (int i = 0; i < kStaticFeatureCount; ++i)
            CHECK(got[static_cast<std::size_t>(i)] ==
                  doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
}

TEST_CASE("dynamic features of the all-zero signal are all zero") {
    const std::vector<double> x(64, 0.0);
    const auto f = dynamic_features(x);
    for (const double v : f) CHECK(v == 0.0);
}

TEST_CASE("dynamic features of a unit impulse") {
    std::vector<double> x(50, 0.0);
    x[0] = 1.0;
    const auto f = dynamic_features(x);
    CHECK(f[0] == doctest::Approx(1.0));        // energy
    CHECK(f[2] == doctest::Approx(1.0 / 50.0)); // energy average
}

TEST_CASE("harmonic ratio is high for a sinusoid on bin 4") {
    std::vector<double> x(256);
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = std::sin(2.0 * 3.14159265358979323846 * 4.0 * static_cast<double>(i) / 256.0);
    const auto f = dynamic_features(x);
    CHECK(f[3] >= 0.9);
}

TEST_CASE("dynamic features match the brute-force reference on random vectors") {
    Rng rng(202);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t len = 2 + rng.next_below(400);
        std::vector<double> x(len);
        for (auto& v : x) v = rng.uniform(0.0, 1.0);
        const auto got = dynamic_features(x);
        const auto ref = oracle::dynamic_features_reference(x);
        for (int i = 0; i < kDynamicFeatureCount; ++i)
            CHECK(got[static_cast<std::size_t>(i)] ==
                  doctest::Approx(ref[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
}

TEST_CASE("dynamic feature ranges hold on random input") {
    Rng rng(303);
    const double max_entropy = std::log2(10.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(16 + rng.next_below(300));
        for (auto& v : x) v = rng.next_double();
        const auto f = dynamic_features(x);
        CHECK(f[1] >= 0.0);
        CHECK(f[1] <= 1.0 + 1e-12); // energy ratio
        CHECK(f[3] >= 0.0);
        CHECK(f[3] <= 1.0 + 1e-12); // harmonic ratio
        CHECK(f[4] >= 0.0);
        CHECK(f[4] <= max_entropy + 1e-12); // energy entropy
    }
}

TEST_CASE("static feature internal consistency") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(2 + rng.next_below(200));
        for (auto& v : x) v = rng.uniform(-5.0, 5.0);
        const auto f = static_features(x);
        CHECK(f[0] >= f[8]);               // mean >= min
        CHECK(f[0] <= f[7]);               // mean <= max
        CHECK(f[12] <= f[1]);              // q1 <= median
        CHECK(f[1] <= f[13]);              // median <= q3
        CHECK(f[3] == doctest::Approx(f[2] * f[2]).epsilon(1e-12)); // var = std^2
        CHECK(f[4] == doctest::Approx(f[7] - f[8]).epsilon(1e-12)); // range = max - min
    }
}

TEST_CASE("time reversal preserves the even static and energy features") {
    Rng rng(505);
    std::vector<double> x(257);
    for (auto& v : x) v = rng.uniform(0.0, 1.0);
    auto r = x;
    std::reverse(r.begin(), r.end());

    const auto sf = static_features(x);
    const auto sr = static_features(r);
    for (const int i : {2, 3, 4, 7, 8}) // std, var, range, max, min
        CHECK(sf[static_cast<std::size_t>(i)] ==
              doctest::Approx(sr[static_cast<std::size_t>(i)]).epsilon(1e-9));

    const auto df = dynamic_features(x);
    const auto dr = dynamic_features(r);
    CHECK(df[0] == doctest::Approx(dr[0]).epsilon(1e-9)); // energy
    CHECK(df[2] == doctest::Approx(dr[2]).epsilon(1e-9)); // energy average

    // Moments are order-blind, so reversal cannot change skewness; the
    // sign flip belongs to amplitude mirroring.
    CHECK(sf[6] == doctest::Approx(sr[6]).epsilon(1e-9));
    std::vector<double> neg(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -x[i];
    const auto sn = static_features(neg);
    CHECK(std::abs(sf[6]) > 1e-3); // asymmetric input
    CHECK(sn[6] == doctest::Approx(-sf[6]).epsilon(1e-9));
}

TEST_CASE("repetition vector has 353 schema-stable entries") {
    Rng rng(606);
    const auto slices = random_repetition(rng, 200);
    const FeatureVector fv = repetition_feature_vector(spans_of(slices));
    CHECK(fv.values.size() == 353);
    CHECK(FeatureSchema::standard().size() == 353);

    const FeatureVector again = repetition_feature_vector(spans_of(slices));
    CHECK(fv.values == again.values); // bit-identical
}

TEST_CASE("pitch-roll correlation entries equal +-1 for aligned slices") {
    Rng rng(707);
    auto slices = random_repetition(rng, 100);
    slices[index_of(Channel::ROLL)] = slices[index_of(Channel::PITCH)];
    FeatureVector fv = repetition_feature_vector(spans_of(slices));
    CHECK(fv.values[351] == doctest::Approx(1.0));
    CHECK(fv.values[352] == doctest::Approx(1.0));

    for (std::size_t i = 0; i < 100; ++i)
        slices[index_of(Channel::ROLL)][i] = -slices[index_of(Channel::PITCH)][i];
    fv = repetition_feature_vector(spans_of(slices));
    CHECK(fv.values[351] == doctest::Approx(-1.0));
    CHECK(fv.values[352] == doctest::Approx(-1.0));
}

TEST_CASE("pearson correlation is 0 for a constant slice") {
    const std::vector<double> c(32, 1.0);
    std::vector<double> v(32);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    CHECK(pearson_correlation(c, v) == 0.0);
}

TEST_CASE("repetition vector rejects mismatched channel lengths") {
    Rng rng(808);
    auto slices = random_repetition(rng, 64);
    slices[3].pop_back();
    CHECK_THROWS_WITH_AS(static_cast<void>(repetition_feature_vector(spans_of(slices))),
                         doctest::Contains("length mismatch"), std::invalid_argument);
}

TEST_CASE("full repetition vector matches the brute-force reference") {
    Rng rng(909);
    for (int trial = 0; trial < 20; ++trial) {
        const auto slices = random_repetition(rng, 50 + rng.next_below(400));
        const FeatureVector got = repetition_feature_vector(spans_of(slices));
        const std::vector<double> ref = oracle::repetition_features_reference(slices);
        REQUIRE(got.values.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i)
            CHECK(got.values[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    }
}

TEST_CASE("schema hashes separate the repetition and chunk schemas") {
    CHECK(FeatureSchema::standard().hash() != FeatureSchema::chunk_schema().hash());
    CHECK(FeatureSchema::standard().hash() == FeatureSchema::standard().hash());
    CHECK(FeatureSchema::standard().version() == "rehabkit-features-v1");
}
