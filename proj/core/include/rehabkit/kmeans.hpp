#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rehabkit/rng.hpp"

namespace rehabkit {

struct KMeans1DResult {
    std::vector<double> centroids; // sorted ascending
    double wcss = 0.0;
    /// Objective after each Lloyd iteration; non-increasing by
    /// construction and asserted so in the tests.
    std::vector<double> wcss_trace;
};

/// Lloyd's algorithm on scalar values with k-means++ seeding. Values are
/// sorted internally, so the result is invariant under input order.
KMeans1DResult kmeans_1d(std::span<const double> values, int k, Rng& rng, int max_iters = 100);

/// Elbow selection: the k in [k_min, k_max] with the largest relative
/// drop of the within-cluster sum of squares versus k-1.
int select_k_elbow(std::span<const double> values, int k_min, int k_max, std::uint64_t seed,
                   int max_iters = 100);

} // namespace rehabkit
