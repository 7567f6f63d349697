#include "rehabkit/io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rehabkit/errors.hpp"
#include "rehabkit/learners/adaboost.hpp"
#include "rehabkit/learners/hoeffding.hpp"
#include "rehabkit/learners/logistic.hpp"
#include "rehabkit/learners/smo.hpp"
#include "rehabkit/learners/tree.hpp"
#include "rehabkit/signal_ops.hpp"
#include "rehabkit/textio.hpp"

namespace rehabkit::io {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kRecordingHeader = "t,ax,ay,az,gx,gy,gz";

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::uint64_t hash_from_hex(const std::string& s) {
    if (s.size() != 16) throw ModelError("malformed schema hash");
    std::uint64_t h = 0;
    for (const char c : s) {
        h <<= 4;
        if (c >= '0' && c <= '9') h |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') h |= static_cast<std::uint64_t>(c - 'a' + 10);
        else throw ModelError("malformed schema hash");
    }
    return h;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    return is;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

} // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension();
    p += ".meta.json";
    return p;
}

void save_recording(const RawRecording& rec, const std::filesystem::path& csv_path) {
    std::ofstream os = open_out(csv_path);
    os << kRecordingHeader << '\n';
    for (const RawSample& s : rec.samples) {
        const double vals[7] = {s.t, s.ax, s.ay, s.az, s.gx, s.gy, s.gz};
        for (int i = 0; i < 7; ++i) {
            if (i) os << ',';
            textio::write_double(os, vals[i]);
        }
        os << '\n';
    }

    ordered_json meta;
    meta["subject_id"] = rec.subject_id;
    meta["exercise"] = to_string(rec.exercise);
    meta["sampling_rate_hz"] = rec.device.sampling_rate_hz;
    meta["accel_range_g"] = rec.device.accel_range_g;
    meta["gyro_range_dps"] = rec.device.gyro_range_dps;
    ordered_json baselines;
    for (int ch = 0; ch < kSampledChannelCount; ++ch)
        baselines[channel_name(static_cast<Channel>(ch))] =
            rec.device.baselines[static_cast<std::size_t>(ch)];
    meta["baselines"] = std::move(baselines);
    if (rec.rep_labels) {
        ordered_json labels = ordered_json::array();
        for (const Label l : *rec.rep_labels) labels.push_back(to_string(l));
        meta["rep_labels"] = std::move(labels);
    }
    if (rec.ground_truth_bounds) {
        ordered_json bounds = ordered_json::array();
        for (const auto& [s, e] : *rec.ground_truth_bounds)
            bounds.push_back(ordered_json::array({s, e}));
        meta["ground_truth_bounds"] = std::move(bounds);
    }
    std::ofstream ms = open_out(sidecar_path(csv_path));
    ms << meta.dump(2) << '\n';
}

RawRecording load_recording(const std::filesystem::path& csv_path) {
    const std::filesystem::path meta_path = sidecar_path(csv_path);
    if (!std::filesystem::exists(meta_path))
        throw DataError("missing sidecar: " + meta_path.string());

    RawRecording rec;
    {
        std::ifstream ms = open_in(meta_path);
        ordered_json meta;
        try {
            ms >> meta;
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed sidecar " + meta_path.string() + ": " + e.what());
        }
        try {
            rec.subject_id = meta.at("subject_id").get<std::string>();
            rec.exercise = exercise_from_string(meta.at("exercise").get<std::string>());
            rec.device.sampling_rate_hz = meta.at("sampling_rate_hz").get<double>();
            rec.device.accel_range_g = meta.value("accel_range_g", 2.0);
            rec.device.gyro_range_dps = meta.value("gyro_range_dps", 500.0);
            const auto& baselines = meta.at("baselines");
            for (int ch = 0; ch < kSampledChannelCount; ++ch)
                rec.device.baselines[static_cast<std::size_t>(ch)] =
                    baselines.at(channel_name(static_cast<Channel>(ch))).get<double>();
            if (meta.contains("rep_labels")) {
                std::vector<Label> labels;
                for (const auto& l : meta.at("rep_labels"))
                    labels.push_back(label_from_string(l.get<std::string>()));
                rec.rep_labels = std::move(labels);
            }
            if (meta.contains("ground_truth_bounds")) {
                std::vector<std::pair<int, int>> bounds;
                for (const auto& b : meta.at("ground_truth_bounds"))
                    bounds.emplace_back(b.at(0).get<int>(), b.at(1).get<int>());
                rec.ground_truth_bounds = std::move(bounds);
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError("invalid sidecar " + meta_path.string() + ": " + e.what());
        }
    }

    std::ifstream is = open_in(csv_path);
    std::string line;
    if (!std::getline(is, line)) throw DataError(csv_path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordingHeader)
        throw DataError(csv_path.string() + ":1: expected header '" + kRecordingHeader + "'");

    std::size_t line_no = 1;
    double prev_t = -std::numeric_limits<double>::infinity();
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tok = textio::split(line, ',');
        if (tok.size() != 7)
            throw DataError(csv_path.string() + ":" + std::to_string(line_no) +
                            ": expected 7 columns, got " + std::to_string(tok.size()));
        RawSample s{};
        try {
            s.t = textio::parse_double(tok[0]);
            s.ax = textio::parse_double(tok[1]);
            s.ay = textio::parse_double(tok[2]);
            s.az = textio::parse_double(tok[3]);
            s.gx = textio::parse_double(tok[4]);
            s.gy = textio::parse_double(tok[5]);
            s.gz = textio::parse_double(tok[6]);
        } catch (const DataError& e) {
            throw DataError(csv_path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (s.t <= prev_t)
            throw DataError(csv_path.string() + ":" + std::to_string(line_no) +
                            ": non-monotonic timestamps");
        prev_t = s.t;
        rec.samples.push_back(s);
    }
    rec.validate();
    return rec;
}

void save_processed(const ProcessedRecording& rec, const std::filesystem::path& csv_path) {
    std::ofstream os = open_out(csv_path);
    for (int ch = 0; ch < kChannelCount; ++ch)
        os << (ch ? "," : "") << channel_name(static_cast<Channel>(ch));
    os << '\n';
    for (std::size_t i = 0; i < rec.length(); ++i) {
        for (int ch = 0; ch < kChannelCount; ++ch) {
            if (ch) os << ',';
            textio::write_double(os, rec.vectors[static_cast<std::size_t>(ch)][i]);
        }
        os << '\n';
    }

    ordered_json meta;
    meta["subject_id"] = rec.subject_id;
    meta["exercise"] = to_string(rec.exercise);
    meta["sampling_rate_hz"] = rec.device.sampling_rate_hz;
    meta["cutoff_hz"] = rec.cutoff_hz;
    meta["filter_order"] = rec.filter_order;
    meta["magnitude_source"] = rec.mag_source == MagnitudeSource::gyro ? "gyro" : "accel";
    ordered_json bounds;
    for (int ch = 0; ch < kChannelCount; ++ch) {
        const ChannelBounds& b = rec.bounds[static_cast<std::size_t>(ch)];
        bounds[channel_name(static_cast<Channel>(ch))] = ordered_json::array({b.min, b.max});
    }
    meta["normalization_bounds"] = std::move(bounds);
    std::ofstream ms = open_out(sidecar_path(csv_path));
    ms << meta.dump(2) << '\n';
}

void save_feature_csv(const Dataset& dataset, const std::filesystem::path& path) {
    dataset.validate();
    std::ofstream os = open_out(path);
    for (const auto& e : dataset.schema.entries()) os << e.column << ',';
    os << "subject_id,exercise,label\n";
    for (const FeatureVector& fv : dataset.rows) {
        for (const double v : fv.values) {
            textio::write_double(os, v);
            os << ',';
        }
        os << fv.subject_id << ',' << to_string(fv.exercise) << ','
           << (fv.label ? to_string(*fv.label) : "") << '\n';
    }
}

Dataset load_feature_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    std::ifstream is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw DataError(path.string() + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::string expected_header;
    for (const auto& e : schema.entries()) expected_header += e.column + ",";
    expected_header += "subject_id,exercise,label";
    if (line != expected_header)
        throw DataError(path.string() + ": header does not match feature schema '" +
                        schema.version() + "'");

    Dataset dataset;
    dataset.schema = schema;
    const std::size_t dim = schema.size();
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tok = textio::split(line, ',');
        if (tok.size() != dim + 3)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": wrong column count");
        FeatureVector fv;
        fv.values.reserve(dim);
        try {
            for (std::size_t i = 0; i < dim; ++i)
                fv.values.push_back(textio::parse_double(tok[i]));
            fv.subject_id = std::string(tok[dim]);
            fv.exercise = exercise_from_string(std::string(tok[dim + 1]));
            if (!tok[dim + 2].empty()) fv.label = label_from_string(std::string(tok[dim + 2]));
        } catch (const std::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        dataset.rows.push_back(std::move(fv));
    }
    return dataset;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream os = open_out(path);
    os << kModelMagic << '\n';
    os << "algorithm " << algorithm_id(model.algorithm()) << '\n';
    os << "schema " << hash_hex(model.schema_hash()) << '\n';
    os << "seed " << model.seed() << '\n';
    os << "dim " << model.dimension() << '\n';
    model.write_params(os);
    os << "end\n";
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw ModelError("model file not found: " + path.string());
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ModelError("cannot open model file: " + path.string());

    const std::string magic = textio::expect_line(is, "magic line");
    if (magic != kModelMagic) {
        if (magic.rfind("REHABKIT-MODEL", 0) == 0)
            throw ModelError("unsupported model version: '" + magic + "'");
        throw ModelError("not a model file: " + path.string());
    }

    auto field = [&](const char* key) {
        const auto tok = textio::split(textio::expect_line(is, key));
        if (tok.size() != 2 || tok[0] != key)
            throw ModelError(std::string("expected '") + key + "' line");
        return std::string(tok[1]);
    };
    const Algorithm algorithm = algorithm_from_id(field("algorithm"));
    const std::uint64_t schema_hash = hash_from_hex(field("schema"));
    const std::uint64_t seed = textio::parse_u64(field("seed"));
    const int dim = static_cast<int>(textio::parse_int(field("dim")));
    if (dim <= 0) throw ModelError("bad model dimension");

    std::unique_ptr<Model> model;
    try {
        switch (algorithm) {
        case Algorithm::logistic:
            model = LogisticModel::read_params(is, schema_hash, seed, dim);
            break;
        case Algorithm::smo:
            model = SmoModel::read_params(is, schema_hash, seed, dim);
            break;
        case Algorithm::adaboost:
            model = AdaBoostModel::read_params(is, schema_hash, seed, dim);
            break;
        case Algorithm::random_forest:
            model = ForestModel::read_params(is, schema_hash, seed, dim);
            break;
        case Algorithm::c45:
            model = C45Model::read_params(is, schema_hash, seed, dim);
            break;
        case Algorithm::hoeffding:
            model = HoeffdingTree::read_params(is, schema_hash, seed, dim);
            break;
        }
    } catch (const DataError& e) {
        throw ModelError(path.string() + ": " + e.what());
    }
    if (textio::expect_line(is, "end marker") != "end")
        throw ModelError(path.string() + ": missing end marker");
    return model;
}

std::string segmentation_to_json(const SegmentationResult& result) {
    ordered_json j;
    j["cut_points"] = result.cut_points;
    ordered_json reps = ordered_json::array();
    for (const auto& [s, e] : result.repetitions) reps.push_back(ordered_json::array({s, e}));
    j["repetitions"] = std::move(reps);
    j["rejected"] = result.rejected_chunks;
    if (!result.warning.empty()) j["warning"] = result.warning;
    return j.dump(2) + "\n";
}

std::string cv_report_to_json(const CVReport& report) {
    ordered_json j;
    j["algorithm"] = algorithm_id(report.algorithm);
    j["seed"] = report.seed;
    ordered_json dataset;
    dataset["rows"] = report.rows;
    dataset["subjects"] = report.subjects;
    dataset["schema"] = hash_hex(report.schema_hash);
    j["dataset"] = std::move(dataset);

    ordered_json folds = ordered_json::array();
    for (const CVReport::Fold& f : report.folds) {
        ordered_json fj;
        fj["fold"] = f.index;
        if (f.skipped) {
            fj["skipped"] = true;
            fj["warning"] = f.warning;
        } else {
            fj["tp"] = f.metrics.tp;
            fj["fp"] = f.metrics.fp;
            fj["tn"] = f.metrics.tn;
            fj["fn"] = f.metrics.fn;
            fj["accuracy"] = round4(f.metrics.accuracy());
            fj["precision"] = round4(f.metrics.precision());
            fj["recall"] = round4(f.metrics.recall());
        }
        folds.push_back(std::move(fj));
    }
    j["folds"] = std::move(folds);

    ordered_json pooled;
    pooled["tp"] = report.pooled.tp;
    pooled["fp"] = report.pooled.fp;
    pooled["tn"] = report.pooled.tn;
    pooled["fn"] = report.pooled.fn;
    pooled["accuracy"] = round4(report.pooled.accuracy());
    pooled["precision"] = round4(report.pooled.precision());
    pooled["recall"] = round4(report.pooled.recall());
    j["pooled"] = std::move(pooled);
    return j.dump(2) + "\n";
}

Dataset features_for_recording(const ProcessedRecording& processed,
                               std::span<const std::pair<int, int>> repetitions,
                               std::span<const Label> labels) {
    Dataset dataset;
    dataset.schema = FeatureSchema::standard();
    const int n = static_cast<int>(processed.length());
    for (std::size_t r = 0; r < repetitions.size(); ++r) {
        const auto [s, e] = repetitions[r];
        if (s < 0 || e <= s || e > n)
            throw DataError("repetition bounds out of range: [" + std::to_string(s) + ", " +
                            std::to_string(e) + ")");
        std::array<std::span<const double>, kChannelCount> slices;
        for (int ch = 0; ch < kChannelCount; ++ch)
            slices[static_cast<std::size_t>(ch)] =
                std::span<const double>(processed.vectors[static_cast<std::size_t>(ch)])
                    .subspan(static_cast<std::size_t>(s), static_cast<std::size_t>(e - s));
        FeatureVector fv = repetition_feature_vector(slices);
        fv.subject_id = processed.subject_id;
        fv.exercise = processed.exercise;
        if (r < labels.size()) fv.label = labels[r];
        dataset.rows.push_back(std::move(fv));
    }
    return dataset;
}

namespace {

[[noreturn]] void stage_fail(const char* stage, const std::exception& e, bool model_stage) {
    const std::string msg = std::string(stage) + ": " + e.what();
    if (model_stage) throw ModelError(msg);
    throw DataError(msg);
}

} // namespace

PipelineResult run_pipeline(const std::filesystem::path& recording_path,
                            const std::filesystem::path& segmenter_model_path,
                            const std::filesystem::path& classifier_model_path,
                            const PipelineOptions& options) {
    RawRecording raw;
    try {
        raw = load_recording(recording_path);
    } catch (const std::exception& e) {
        stage_fail("load_recording", e, false);
    }

    std::unique_ptr<Model> segmenter_model, classifier_model;
    const HoeffdingTree* segmenter = nullptr;
    try {
        segmenter_model = load_model(segmenter_model_path);
        segmenter = dynamic_cast<const HoeffdingTree*>(segmenter_model.get());
        if (!segmenter) throw ModelError("segmenter model must be a hoeffding chunk classifier");
        if (segmenter_model->schema_hash() != FeatureSchema::chunk_schema().hash())
            throw ModelError("segmenter schema hash mismatch");
        classifier_model = load_model(classifier_model_path);
        if (classifier_model->schema_hash() != FeatureSchema::standard().hash())
            throw ModelError("classifier schema hash mismatch");
    } catch (const std::exception& e) {
        stage_fail("load_model", e, true);
    }

    ProcessedRecording processed;
    try {
        processed = preprocess(raw, options.cutoff_hz, options.mag_source);
    } catch (const std::exception& e) {
        stage_fail("preprocess", e, false);
    }

    SegmentationResult seg;
    try {
        seg = select_cut_points(processed, *segmenter, options.segmentation, options.seed);
    } catch (const std::exception& e) {
        stage_fail("segment", e, false);
    }

    PipelineResult result;
    result.warning = seg.warning;
    try {
        const Dataset features = features_for_recording(processed, seg.repetitions, {});
        for (std::size_t r = 0; r < features.rows.size(); ++r) {
            const Prediction pred =
                predict(*classifier_model, features.rows[r], features.schema);
            RepetitionVerdict v;
            v.start = seg.repetitions[r].first;
            v.end = seg.repetitions[r].second;
            v.label = pred.as_label();
            v.score = pred.score;
            (v.label == Label::deviant ? result.deviant_count : result.correct_count) += 1;
            result.verdicts.push_back(v);
        }
    } catch (const ModelError& e) {
        stage_fail("classify", e, true);
    } catch (const std::exception& e) {
        stage_fail("classify", e, false);
    }
    if (result.verdicts.empty() && result.warning.empty())
        result.warning = "no repetitions detected";
    return result;
}

std::string pipeline_to_json(const PipelineResult& result) {
    ordered_json j;
    ordered_json reps = ordered_json::array();
    for (const RepetitionVerdict& v : result.verdicts) {
        ordered_json r;
        r["start"] = v.start;
        r["end"] = v.end;
        r["label"] = to_string(v.label);
        r["score"] = round4(v.score);
        reps.push_back(std::move(r));
    }
    j["repetitions"] = std::move(reps);
    ordered_json summary;
    summary["detected"] = result.verdicts.size();
    summary["correct_count"] = result.correct_count;
    summary["deviant_count"] = result.deviant_count;
    j["summary"] = std::move(summary);
    if (!result.warning.empty()) j["warning"] = result.warning;
    return j.dump(2) + "\n";
}

std::string svg_plot(std::span<const double> signal, std::span<const int> cut_points) {
    constexpr int kWidth = 1000, kHeight = 320, kPad = 10;
    const std::size_t n = signal.size();
    std::ostringstream os;
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
       << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    os << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";

    if (n >= 2) {
        const std::size_t stride = std::max<std::size_t>(1, n / 4000);
        os << "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < n; i += stride) {
            const double x = kPad + (kWidth - 2.0 * kPad) * static_cast<double>(i) /
                                        static_cast<double>(n - 1);
            const double y = kHeight - kPad - (kHeight - 2.0 * kPad) * signal[i];
            if (i) os << ' ';
            os << fmt(x) << ',' << fmt(y);
        }
        os << "\"/>\n";
        for (const int c : cut_points) {
            const double x = kPad + (kWidth - 2.0 * kPad) * static_cast<double>(c) /
                                        static_cast<double>(n - 1);
            os << "  <line x1=\"" << fmt(x) << "\" y1=\"" << kPad << "\" x2=\"" << fmt(x)
               << "\" y2=\"" << kHeight - kPad << "\" stroke=\"#d62728\" stroke-width=\"1\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace rehabkit::io
