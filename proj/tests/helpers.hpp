// Shared builders for the unit and acceptance suites.
#pragma once

#include <string>
#include <vector>

#include "rehabkit/learners.hpp"
#include "rehabkit/rng.hpp"
#include "rehabkit/synthgen.hpp"

namespace helpers {

/// Two Gaussian blobs in `dim` dimensions, class 0 centered at -sep/2 and
/// class 1 at +sep/2 on every axis (unit sigma).
inline rehabkit::Dataset gaussian_blobs(int per_class, int dim, double sep, std::uint64_t seed,
                                        const std::string& subject_prefix = "s") {
    using namespace rehabkit;
    Dataset ds;
    std::vector<std::string> columns;
    for (int j = 0; j < dim; ++j) columns.push_back("x" + std::to_string(j));
    ds.schema = FeatureSchema::custom("test-blobs-v1", columns);
    Rng rng(seed);
    for (int cls = 0; cls < 2; ++cls) {
        for (int i = 0; i < per_class; ++i) {
            FeatureVector fv;
            fv.values.reserve(static_cast<std::size_t>(dim));
            for (int j = 0; j < dim; ++j)
                fv.values.push_back((cls ? sep / 2.0 : -sep / 2.0) + rng.next_gaussian());
            fv.label = cls ? Label::deviant : Label::correct;
            fv.subject_id = subject_prefix + std::to_string(i % 10);
            ds.rows.push_back(std::move(fv));
        }
    }
    // interleave classes so streaming learners see both early
    std::vector<FeatureVector> interleaved;
    interleaved.reserve(ds.rows.size());
    for (int i = 0; i < per_class; ++i) {
        interleaved.push_back(ds.rows[static_cast<std::size_t>(i)]);
        interleaved.push_back(ds.rows[static_cast<std::size_t>(per_class + i)]);
    }
    ds.rows = std::move(interleaved);
    return ds;
}

/// A clean default session: `reps` repetitions, alternating labels when
/// `mixed`, tiny noise.
inline rehabkit::SessionSpec quick_spec(rehabkit::Exercise e, int reps, bool mixed,
                                        std::uint64_t seed) {
    rehabkit::SessionSpec spec = rehabkit::make_session_spec(e, reps, mixed ? 2 : 0, seed);
    spec.noise_sigma = 0.01;
    return spec;
}

} // namespace helpers
