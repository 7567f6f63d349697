#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "rehabkit/errors.hpp"
#include "rehabkit/io.hpp"
#include "rehabkit/signal_ops.hpp"
#include "rehabkit/synthgen.hpp"

using namespace rehabkit;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("rehabkit-test-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

void patch_file(const fs::path& p, const std::string& from, const std::string& to) {
    std::string body = slurp(p);
    const auto pos = body.find(from);
    REQUIRE(pos != std::string::npos);
    body.replace(pos, from.size(), to);
    std::ofstream os(p, std::ios::binary);
    os << body;
}

} // namespace

TEST_CASE("recording save/load round-trips bit-exact values") {
    TempDir dir;
    SessionSpec spec = helpers::quick_spec(Exercise::SKE, 4, true, 12);
    const auto [rec, gt] = synth_session(spec);
    const fs::path csv = dir.path / "session.csv";
    io::save_recording(rec, csv);
    const RawRecording loaded = io::load_recording(csv);

    REQUIRE(loaded.samples.size() == rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        CHECK(loaded.samples[i].t == rec.samples[i].t);
        CHECK(loaded.samples[i].ax == rec.samples[i].ax);
        CHECK(loaded.samples[i].gz == rec.samples[i].gz);
    }
    CHECK(loaded.subject_id == rec.subject_id);
    CHECK(loaded.exercise == rec.exercise);
    CHECK(loaded.rep_labels == rec.rep_labels);
    CHECK(loaded.ground_truth_bounds == rec.ground_truth_bounds);
    CHECK(loaded.device.sampling_rate_hz == rec.device.sampling_rate_hz);
}

TEST_CASE("recording parse errors carry line numbers") {
    TempDir dir;
    SessionSpec spec = helpers::quick_spec(Exercise::HS, 2, false, 3);
    const auto [rec, gt] = synth_session(spec);
    const fs::path csv = dir.path / "bad.csv";

    SUBCASE("six columns") {
        io::save_recording(rec, csv);
        std::ofstream os(csv, std::ios::binary | std::ios::app);
        os << "1.0,2.0,3.0,4.0,5.0,6.0\n";
        os.close();
        CHECK_THROWS_WITH_AS(static_cast<void>(io::load_recording(csv)),
                             doctest::Contains("expected 7 columns"), DataError);
    }
    SUBCASE("duplicate timestamp") {
        io::save_recording(rec, csv);
        std::string body = slurp(csv);
        // duplicate the second data row
        const auto first_nl = body.find('\n');
        const auto second_nl = body.find('\n', first_nl + 1);
        const auto third_nl = body.find('\n', second_nl + 1);
        const std::string row = body.substr(second_nl + 1, third_nl - second_nl);
        body.insert(third_nl + 1, row);
        std::ofstream(csv, std::ios::binary) << body;
        CHECK_THROWS_WITH_AS(static_cast<void>(io::load_recording(csv)),
                             doctest::Contains("non-monotonic"), DataError);
    }
    SUBCASE("missing sidecar") {
        io::save_recording(rec, csv);
        fs::remove(io::sidecar_path(csv));
        CHECK_THROWS_WITH_AS(static_cast<void>(io::load_recording(csv)),
                             doctest::Contains("missing sidecar"), DataError);
    }
}

TEST_CASE("feature csv round-trips the dataset") {
    TempDir dir;
    SessionSpec spec = helpers::quick_spec(Exercise::IRQ, 5, true, 77);
    const auto [raw, gt] = synth_session(spec);
    const ProcessedRecording processed = preprocess(raw);
    const Dataset ds = io::features_for_recording(processed, gt.boundaries, gt.labels);

    const fs::path path = dir.path / "features.csv";
    io::save_feature_csv(ds, path);
    const Dataset loaded = io::load_feature_csv(path);
    REQUIRE(loaded.rows.size() == ds.rows.size());
    for (std::size_t r = 0; r < ds.rows.size(); ++r) {
        CHECK(loaded.rows[r].values == ds.rows[r].values); // bit-exact via shortest round-trip
        CHECK(loaded.rows[r].label == ds.rows[r].label);
        CHECK(loaded.rows[r].subject_id == ds.rows[r].subject_id);
        CHECK(loaded.rows[r].exercise == ds.rows[r].exercise);
    }

    // header mismatch is rejected
    patch_file(path, "ax_mean", "ax_avg");
    CHECK_THROWS_WITH_AS(static_cast<void>(io::load_feature_csv(path)),
                         doctest::Contains("schema"), DataError);
}

TEST_CASE("every model family round-trips with identical predictions") {
    TempDir dir;
    const Dataset ds = helpers::gaussian_blobs(60, 4, 5.0, 2024);
    Rng probe_rng(99);
    std::vector<std::vector<double>> probes(1000);
    for (auto& p : probes) {
        p.resize(4);
        for (auto& v : p) v = probe_rng.uniform(-6.0, 6.0);
    }

    const Algorithm all[] = {Algorithm::logistic,      Algorithm::smo, Algorithm::adaboost,
                             Algorithm::random_forest, Algorithm::c45, Algorithm::hoeffding};
    for (const Algorithm algo : all) {
        CAPTURE(algorithm_id(algo));
        TrainConfig config;
        config.algorithm = algo;
        config.seed = 7;
        const auto model = train(ds, config);
        const fs::path path = dir.path / (std::string("model-") + algorithm_id(algo) + ".model");
        io::save_model(*model, path);
        const auto loaded = io::load_model(path);
        CHECK(loaded->algorithm() == algo);
        CHECK(loaded->schema_hash() == model->schema_hash());
        CHECK(loaded->seed() == model->seed());
        for (const auto& p : probes) {
            const Prediction a = model->predict(p);
            const Prediction b = loaded->predict(p);
            CHECK(a.label == b.label);
            CHECK(a.score == b.score);
        }
        // saving the loaded model reproduces the file byte-for-byte
        const fs::path again = dir.path / "again.model";
        io::save_model(*loaded, again);
        CHECK(slurp(path) == slurp(again));
    }
}

TEST_CASE("model loading rejects bad headers") {
    TempDir dir;
    const Dataset ds = helpers::gaussian_blobs(30, 2, 6.0, 1);
    TrainConfig config;
    config.algorithm = Algorithm::c45;
    const auto model = train(ds, config);
    const fs::path path = dir.path / "model.model";

    SUBCASE("wrong version") {
        io::save_model(*model, path);
        patch_file(path, "REHABKIT-MODEL v1", "REHABKIT-MODEL v0");
        CHECK_THROWS_WITH_AS(static_cast<void>(io::load_model(path)),
                             doctest::Contains("version"), ModelError);
    }
    SUBCASE("truncated file") {
        io::save_model(*model, path);
        std::string body = slurp(path);
        body.resize(body.size() / 2);
        std::ofstream(path, std::ios::binary) << body;
        CHECK_THROWS_AS(static_cast<void>(io::load_model(path)), ModelError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(static_cast<void>(io::load_model(dir.path / "nope.model")),
                             doctest::Contains("not found"), ModelError);
    }
    SUBCASE("schema mismatch at predict") {
        io::save_model(*model, path);
        const auto loaded = io::load_model(path);
        FeatureVector fv;
        fv.values = {0.0, 0.0};
        CHECK_THROWS_WITH_AS(
            static_cast<void>(predict(*loaded, fv, FeatureSchema::chunk_schema())),
            doctest::Contains("schema"), ModelError);
    }
}

TEST_CASE("segmentation result serializes with stable keys") {
    SegmentationResult result;
    result.cut_points = {10, 120, 130, 240};
    result.repetitions = {{10, 120}, {130, 240}};
    result.rejected_chunks = 3;
    const std::string j = io::segmentation_to_json(result);
    CHECK(j.find("\"cut_points\"") != std::string::npos);
    CHECK(j.find("\"repetitions\"") != std::string::npos);
    CHECK(j.find("\"rejected\": 3") != std::string::npos);
    CHECK(j.find("\"warning\"") == std::string::npos);

    result.warning = "no candidates";
    CHECK(io::segmentation_to_json(result).find("\"warning\": \"no candidates\"") !=
          std::string::npos);
}

TEST_CASE("cv report serializes pooled counts and 4-decimal metrics") {
    CVReport report;
    report.algorithm = Algorithm::smo;
    report.seed = 9;
    report.rows = 100;
    report.subjects = 10;
    CVReport::Fold fold;
    fold.index = 0;
    fold.metrics = {33, 3, 60, 4};
    report.folds.push_back(fold);
    report.pooled = fold.metrics;
    const std::string j = io::cv_report_to_json(report);
    CHECK(j.find("\"algorithm\": \"smo\"") != std::string::npos);
    CHECK(j.find("\"tp\": 33") != std::string::npos);
    CHECK(j.find("\"accuracy\": 0.93") != std::string::npos);
    CHECK(j.find("\"precision\": 0.9167") != std::string::npos); // 33/36 rounded
    CHECK(j.find("\"recall\": 0.8919") != std::string::npos);    // 33/37 rounded
}

TEST_CASE("svg plot emits a polyline and one marker per cut point") {
    std::vector<double> signal(500, 0.2);
    for (int i = 100; i < 150; ++i) signal[static_cast<std::size_t>(i)] = 0.9;
    const std::vector<int> cuts = {100, 150};
    const std::string svg = io::svg_plot(signal, cuts);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    std::size_t markers = 0, pos = 0;
    while ((pos = svg.find("<line", pos)) != std::string::npos) {
        ++markers;
        pos += 5;
    }
    CHECK(markers == 2);
}

TEST_CASE("the full pipeline classifies a clean synthetic session") {
    TempDir dir;

    // segmenter
    const auto templates = build_template_chunks(11);
    const auto segmenter = train_chunk_classifier(templates);
    const fs::path seg_path = dir.path / "segmenter.model";
    io::save_model(*segmenter, seg_path);

    // classifier trained on ground-truth features from several subjects
    Dataset train_ds;
    train_ds.schema = FeatureSchema::standard();
    for (int subject = 0; subject < 6; ++subject) {
        SessionSpec spec = helpers::quick_spec(Exercise::HS, 10, true, 500 + subject);
        spec.subject_id = "train-" + std::to_string(subject);
        spec.noise_sigma = 0.005 + 0.004 * subject;
        const auto [raw, gt] = synth_session(spec);
        const ProcessedRecording processed = preprocess(raw);
        Dataset d = io::features_for_recording(processed, gt.boundaries, gt.labels);
        for (auto& row : d.rows) train_ds.rows.push_back(std::move(row));
    }
    TrainConfig config;
    config.algorithm = Algorithm::random_forest;
    config.seed = 3;
    const auto classifier = train(train_ds, config);
    const fs::path cls_path = dir.path / "classifier.model";
    io::save_model(*classifier, cls_path);

    // fresh session through the pipeline
    SessionSpec spec = helpers::quick_spec(Exercise::HS, 10, true, 9000);
    const auto [rec, gt] = synth_session(spec);
    const fs::path csv = dir.path / "session.csv";
    io::save_recording(rec, csv);

    io::PipelineOptions options;
    const io::PipelineResult result = io::run_pipeline(csv, seg_path, cls_path, options);
    REQUIRE(result.verdicts.size() == 10);
    int matches = 0;
    for (std::size_t r = 0; r < 10; ++r)
        matches += result.verdicts[r].label == gt.labels[r] ? 1 : 0;
    CHECK(matches >= 9);
    CHECK(result.correct_count + result.deviant_count == 10);

    const std::string j = io::pipeline_to_json(result);
    CHECK(j.find("\"summary\"") != std::string::npos);
    CHECK(j.find("\"detected\": 10") != std::string::npos);

    SUBCASE("missing model surfaces the load_model stage") {
        CHECK_THROWS_WITH_AS(static_cast<void>(io::run_pipeline(csv, dir.path / "missing.model",
                                                                cls_path, options)),
                             doctest::Contains("load_model"), ModelError);
    }
    SUBCASE("swapped models fail the schema check") {
        CHECK_THROWS_WITH_AS(static_cast<void>(io::run_pipeline(csv, cls_path, seg_path, options)),
                             doctest::Contains("load_model"), ModelError);
    }
}
