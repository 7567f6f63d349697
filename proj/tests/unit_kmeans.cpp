#include <doctest.h>

#include <algorithm>

#include "rehabkit/kmeans.hpp"

using namespace rehabkit;

TEST_CASE("two well-separated groups cluster to their means") {
    std::vector<double> values;
    for (int i = 10; i <= 20; ++i) values.push_back(i);
    for (int i = 500; i <= 510; ++i) values.push_back(i);
    Rng rng(4);
    const auto result = kmeans_1d(values, 2, rng);
    REQUIRE(result.centroids.size() == 2);
    CHECK(result.centroids[0] == doctest::Approx(15.0));
    CHECK(result.centroids[1] == doctest::Approx(505.0));
}

TEST_CASE("k = 1 yields the arithmetic mean") {
    const std::vector<double> values = {3.0, 5.0, 7.0, 9.0};
    Rng rng(1);
    const auto result = kmeans_1d(values, 1, rng);
    REQUIRE(result.centroids.size() == 1);
    CHECK(result.centroids[0] == doctest::Approx(6.0));
}

TEST_CASE("k larger than the point count is rejected") {
    const std::vector<double> values = {1.0, 2.0};
    Rng rng(1);
    CHECK_THROWS_WITH_AS(static_cast<void>(kmeans_1d(values, 3, rng)),
                         doctest::Contains("insufficient candidates"), std::invalid_argument);
}

TEST_CASE("objective is non-increasing across iterations") {
    Rng data_rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> values(200);
        for (auto& v : values) v = data_rng.uniform(0.0, 5000.0);
        Rng rng(trial);
        const auto result = kmeans_1d(values, 2 + static_cast<int>(data_rng.next_below(12)), rng);
        for (std::size_t i = 1; i < result.wcss_trace.size(); ++i)
            CHECK(result.wcss_trace[i] <= result.wcss_trace[i - 1] * (1.0 + 1e-9) + 1e-9);
    }
}

TEST_CASE("clustering is deterministic and input-order invariant") {
    Rng data_rng(13);
    std::vector<double> values(300);
    for (auto& v : values) v = data_rng.uniform(0.0, 10000.0);

    Rng r1(42), r2(42), r3(42);
    const auto a = kmeans_1d(values, 7, r1);
    const auto b = kmeans_1d(values, 7, r2);
    CHECK(a.centroids == b.centroids); // bit-deterministic

    auto shuffled = values;
    data_rng.shuffle(shuffled);
    const auto c = kmeans_1d(shuffled, 7, r3);
    CHECK(a.centroids == c.centroids);
}

TEST_CASE("elbow selection recovers the true cluster count") {
    Rng data_rng(5);
    std::vector<double> values;
    const int true_k = 9;
    for (int c = 0; c < true_k; ++c) {
        const double center = 1000.0 * c;
        for (int i = 0; i < 40; ++i) values.push_back(center + data_rng.uniform(-60.0, 60.0));
    }
    const int k = select_k_elbow(values, 2, 40, 11);
    CHECK(k == true_k);
}
