#include "rehabkit/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rehabkit {

namespace {

// k-means++ on sorted scalar data: first centroid uniform, later ones
// D^2-sampled.
std::vector<double> plus_plus_init(const std::vector<double>& sorted, int k, Rng& rng) {
    const std::size_t n = sorted.size();
    std::vector<double> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(sorted[static_cast<std::size_t>(rng.next_below(n))]);

    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (const double m : centroids) {
                const double d = sorted[i] - m;
                best = std::min(best, d * d);
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all points already coincide with some centroid
            centroids.push_back(sorted[0]);
            continue;
        }
        double target = rng.next_double() * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= d2[i];
            if (target <= 0.0) { pick = i; break; }
        }
        centroids.push_back(sorted[pick]);
    }
    std::sort(centroids.begin(), centroids.end());
    return centroids;
}

// Deterministic candidate start: segment boundaries at the k-1 largest
// gaps between consecutive sorted values, one centroid per segment. On
// runs-and-gaps data (zero-velocity indices) this is usually the global
// optimum already.
std::vector<double> largest_gap_init(const std::vector<double>& sorted, int k) {
    const std::size_t n = sorted.size();
    std::vector<std::size_t> splits; // boundary after index i
    if (k > 1) {
        std::vector<std::pair<double, std::size_t>> gaps;
        gaps.reserve(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) gaps.emplace_back(sorted[i + 1] - sorted[i], i);
        std::sort(gaps.begin(), gaps.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (int g = 0; g < k - 1; ++g) splits.push_back(gaps[static_cast<std::size_t>(g)].second);
        std::sort(splits.begin(), splits.end());
    }
    std::vector<double> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    std::size_t lo = 0;
    for (std::size_t s = 0; s <= splits.size(); ++s) {
        const std::size_t hi = s < splits.size() ? splits[s] + 1 : n;
        const double sum = std::accumulate(sorted.begin() + static_cast<long>(lo),
                                           sorted.begin() + static_cast<long>(hi), 0.0);
        centroids.push_back(sum / static_cast<double>(hi - lo));
        lo = hi;
    }
    std::sort(centroids.begin(), centroids.end());
    return centroids;
}

// With sorted data and sorted centroids each cluster is a contiguous run;
// the boundary between runs is the midpoint of adjacent centroids.
void assignment_cuts(const std::vector<double>& sorted, const std::vector<double>& centroids,
                     std::vector<std::size_t>& cut) {
    const int k = static_cast<int>(centroids.size());
    cut[0] = 0;
    cut[static_cast<std::size_t>(k)] = sorted.size();
    for (int c = 1; c < k; ++c) {
        const double mid = 0.5 * (centroids[static_cast<std::size_t>(c - 1)] +
                                  centroids[static_cast<std::size_t>(c)]);
        cut[static_cast<std::size_t>(c)] = static_cast<std::size_t>(
            std::upper_bound(sorted.begin(), sorted.end(), mid) - sorted.begin());
    }
}

// Moves each empty cluster's centroid onto the point currently farthest
// from its own centroid. No-op when every remaining point sits exactly on
// a centroid (duplicate-heavy input).
void repair_empty_clusters(const std::vector<double>& sorted, std::vector<double>& centroids,
                           std::vector<std::size_t>& cut) {
    const int k = static_cast<int>(centroids.size());
    for (int attempt = 0; attempt < k; ++attempt) {
        int empty = -1;
        for (int c = 0; c < k; ++c)
            if (cut[static_cast<std::size_t>(c)] >= cut[static_cast<std::size_t>(c) + 1]) {
                empty = c;
                break;
            }
        if (empty < 0) return;

        std::size_t worst_i = 0;
        double worst_d = 0.0;
        for (int cc = 0; cc < k; ++cc) {
            if (cut[static_cast<std::size_t>(cc) + 1] - cut[static_cast<std::size_t>(cc)] < 2)
                continue;
            for (std::size_t i = cut[static_cast<std::size_t>(cc)];
                 i < cut[static_cast<std::size_t>(cc) + 1]; ++i) {
                const double d = std::abs(sorted[i] - centroids[static_cast<std::size_t>(cc)]);
                if (d > worst_d) { worst_d = d; worst_i = i; }
            }
        }
        if (worst_d <= 0.0) return;
        centroids[static_cast<std::size_t>(empty)] = sorted[worst_i];
        std::sort(centroids.begin(), centroids.end());
        assignment_cuts(sorted, centroids, cut);
    }
}

KMeans1DResult lloyd(const std::vector<double>& sorted, std::vector<double> centroids,
                     int max_iters) {
    const int k = static_cast<int>(centroids.size());
    KMeans1DResult result;
    result.centroids = std::move(centroids);

    std::vector<std::size_t> cut(static_cast<std::size_t>(k) + 1, 0);
    std::vector<std::size_t> prev_cut;
    for (int iter = 0; iter < max_iters; ++iter) {
        assignment_cuts(sorted, result.centroids, cut);
        repair_empty_clusters(sorted, result.centroids, cut);

        double wcss = 0.0;
        for (int c = 0; c < k; ++c) {
            const std::size_t lo = cut[static_cast<std::size_t>(c)];
            const std::size_t hi = cut[static_cast<std::size_t>(c) + 1];
            if (hi <= lo) continue;
            double sum = 0.0;
            for (std::size_t i = lo; i < hi; ++i) sum += sorted[i];
            const double mean = sum / static_cast<double>(hi - lo);
            result.centroids[static_cast<std::size_t>(c)] = mean;
            for (std::size_t i = lo; i < hi; ++i) {
                const double d = sorted[i] - mean;
                wcss += d * d;
            }
        }
        result.wcss = wcss;
        result.wcss_trace.push_back(wcss);
        if (cut == prev_cut) break;
        prev_cut = cut;
    }
    std::sort(result.centroids.begin(), result.centroids.end());
    return result;
}

constexpr int kPlusPlusRestarts = 4;

} // namespace

KMeans1DResult kmeans_1d(std::span<const double> values, int k, Rng& rng, int max_iters) {
    if (k < 1) throw std::invalid_argument("kmeans_1d: k must be positive");
    if (values.empty() || static_cast<std::size_t>(k) > values.size())
        throw std::invalid_argument("insufficient candidates for k clusters");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    // Multi-start: the deterministic largest-gap candidate plus seeded
    // k-means++ restarts; the best converged objective wins.
    KMeans1DResult best = lloyd(sorted, largest_gap_init(sorted, k), max_iters);
    for (int restart = 0; restart < kPlusPlusRestarts; ++restart) {
        KMeans1DResult r = lloyd(sorted, plus_plus_init(sorted, k, rng), max_iters);
        if (r.wcss < best.wcss) best = std::move(r);
    }
    return best;
}

int select_k_elbow(std::span<const double> values, int k_min, int k_max, std::uint64_t seed,
                   int max_iters) {
    const int hi = std::min<int>(k_max, static_cast<int>(values.size()));
    const int lo = std::max(1, k_min);
    if (hi < lo) throw std::invalid_argument("select_k_elbow: empty k range");
    if (hi == lo) return lo;

    const int base = std::max(1, lo - 1);
    std::vector<double> wcss;
    wcss.reserve(static_cast<std::size_t>(hi - base + 1));
    for (int k = base; k <= hi; ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        wcss.push_back(kmeans_1d(values, k, rng, max_iters).wcss);
    }

    // Splitting near-uniform data k-ways scales the objective like 1/k^2,
    // so the raw relative drop is maximal at k = 2 regardless of
    // structure. Score each k by its drop in excess of that baseline: the
    // true cluster count is where the objective collapses beyond the
    // smooth 1/k^2 trend.
    int best_k = lo;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = std::max(lo, base + 1); k <= hi; ++k) {
        const double prev = wcss[static_cast<std::size_t>(k - 1 - base)];
        const double cur = wcss[static_cast<std::size_t>(k - base)];
        if (prev <= 0.0) break; // already perfect at k-1 clusters
        const double trend = static_cast<double>((k - 1) * (k - 1)) / static_cast<double>(k * k);
        const double score = (prev / std::max(cur, prev * 1e-15)) * trend;
        if (score > best_score + 1e-12) {
            best_score = score;
            best_k = k;
        }
    }
    return best_k;
}

} // namespace rehabkit
