#pragma once

#include <array>
#include <iosfwd>
#include <limits>
#include <vector>

#include "rehabkit/learners.hpp"

namespace rehabkit {

/// Running Gaussian summary of one numeric attribute within one class
/// (Welford update), plus the observed value range.
struct GaussianStat {
    double weight = 0.0;
    double mean = 0.0;
    double m2 = 0.0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    void add(double v);
    double stddev() const;
    /// Estimated fraction of the class mass at or below t.
    double fraction_below(double t) const;
};

struct HoeffdingNode {
    int feature = -1; // -1 = leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double class_counts[2] = {0.0, 0.0};
    double weight_at_last_attempt = 0.0;
    std::vector<std::array<GaussianStat, 2>> attr_stats; // per attribute, per class; leaves only

    bool is_leaf() const { return feature < 0; }
};

/// Incremental decision tree. A leaf splits only when the Hoeffding
/// bound guarantees the best attribute beats the runner-up with
/// confidence 1 - delta, or the race is within the tie threshold tau;
/// split attempts happen every grace-period instances.
class HoeffdingTree : public Model {
public:
    HoeffdingTree(const HoeffdingParams& params, std::uint64_t schema_hash, std::uint64_t seed,
                  int dimension);

    /// Streaming update with one labeled instance (class 0 or 1).
    void update(std::span<const double> x, int cls);

    /// Single deterministic pass over the dataset rows.
    static std::unique_ptr<HoeffdingTree> fit(const Dataset& dataset,
                                              const HoeffdingParams& params, std::uint64_t seed);

    const std::vector<HoeffdingNode>& nodes() const { return nodes_; }
    std::size_t leaf_count() const;
    const HoeffdingParams& params() const { return params_; }

    void write_params(std::ostream& os) const override;
    static std::unique_ptr<HoeffdingTree> read_params(std::istream& is, std::uint64_t schema_hash,
                                                      std::uint64_t seed, int dimension);

protected:
    Prediction do_predict(std::span<const double> x) const override;

private:
    int route(std::span<const double> x) const;
    void try_split(int leaf);

    HoeffdingParams params_;
    std::vector<HoeffdingNode> nodes_;
};

} // namespace rehabkit
