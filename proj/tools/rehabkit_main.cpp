// rehabkit: offline IMU rehabilitation-exercise analysis toolkit.
//
// Subcommands: synth, preprocess, segment, features, train, evaluate,
// pipeline. Every command is deterministic given its flags and --seed.
// Exit codes: 0 success, 1 usage error, 2 data/parse error, 3 model error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rehabkit/errors.hpp"
#include "rehabkit/evaluation.hpp"
#include "rehabkit/io.hpp"
#include "rehabkit/segmentation.hpp"
#include "rehabkit/signal_ops.hpp"
#include "rehabkit/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rehabkit;

namespace {

struct ToolkitConfig {
    double cutoff_hz = 5.0;
    MagnitudeSource mag_source = MagnitudeSource::gyro;
    SegmentationConfig segmentation;
};

ToolkitConfig load_config(const std::string& path) {
    ToolkitConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream is(path);
    if (!is) throw DataError("cannot open config: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed config " + path + ": " + e.what());
    }
    cfg.cutoff_hz = j.value("cutoff_hz", cfg.cutoff_hz);
    if (j.contains("magnitude_source")) {
        const std::string src = j["magnitude_source"].get<std::string>();
        if (src == "gyro") cfg.mag_source = MagnitudeSource::gyro;
        else if (src == "accel") cfg.mag_source = MagnitudeSource::accel;
        else throw DataError("config: magnitude_source must be 'gyro' or 'accel'");
    }
    if (j.contains("segmentation")) {
        const json& s = j["segmentation"];
        SegmentationConfig& sc = cfg.segmentation;
        if (s.contains("channel")) sc.channel = channel_from_name(s["channel"].get<std::string>());
        if (s.contains("feature_channel"))
            sc.feature_channel = channel_from_name(s["feature_channel"].get<std::string>());
        sc.zero_vel_threshold = s.value("zero_vel_threshold", sc.zero_vel_threshold);
        sc.dwell_samples = s.value("dwell_samples", sc.dwell_samples);
        sc.variance_threshold = s.value("variance_threshold", sc.variance_threshold);
        sc.k_min = s.value("k_min", sc.k_min);
        sc.k_max = s.value("k_max", sc.k_max);
        sc.min_chunk_samples = s.value("min_chunk_samples", sc.min_chunk_samples);
        sc.max_chunk_samples = s.value("max_chunk_samples", sc.max_chunk_samples);
        if (s.contains("expected_reps") && !s["expected_reps"].is_null())
            sc.expected_reps = s["expected_reps"].get<int>();
        sc.validate();
    }
    return cfg;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os << content;
}

std::vector<Label> parse_pattern(const std::string& pattern) {
    std::vector<Label> labels;
    labels.reserve(pattern.size());
    for (const char c : pattern) {
        if (c == 'c') labels.push_back(Label::correct);
        else if (c == 'd') labels.push_back(Label::deviant);
        else throw CLI::ValidationError("--pattern", "pattern may contain only 'c' and 'd'");
    }
    return labels;
}

std::vector<std::pair<int, int>> load_segments_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open segments file: " + path);
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        throw DataError("malformed segments " + path + ": " + e.what());
    }
    std::vector<std::pair<int, int>> reps;
    for (const auto& r : j.at("repetitions"))
        reps.emplace_back(r.at(0).get<int>(), r.at(1).get<int>());
    return reps;
}

int run(int argc, char** argv) {
    CLI::App app{"Offline IMU exercise analysis: segmentation, feature "
                 "extraction and repetition classification"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for all subcommands");

    // synth ------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled session");
    std::string synth_exercise = "HS";
    int synth_reps = 10;
    int synth_deviant_every = 0;
    std::string synth_pattern;
    bool synth_fatigue = false;
    double synth_noise = 0.01;
    double synth_vib_hz = 0.0, synth_vib_amp = 0.0;
    std::string synth_subject = "synth-01";
    std::uint64_t synth_seed = 0;
    std::string synth_out;
    synth->add_option("--exercise", synth_exercise, "Exercise tag (HS, SKE, IRQ, SLR)")
        ->capture_default_str();
    synth->add_option("--reps", synth_reps, "Repetition count")->capture_default_str();
    synth->add_option("--deviant-every", synth_deviant_every,
                      "Make every n-th repetition deviant (0 = all correct)")
        ->capture_default_str();
    synth->add_option("--pattern", synth_pattern,
                      "Explicit per-repetition labels, e.g. ccdcd (overrides --reps/--deviant-every)");
    synth->add_flag("--fatigue", synth_fatigue, "Fatigue protocol: pauses 0.5-5 s, holds 1-3 s");
    synth->add_option("--noise", synth_noise, "White noise sigma (normalized units)")
        ->capture_default_str();
    synth->add_option("--vibration-hz", synth_vib_hz, "Strap vibration frequency (0 = off)")
        ->capture_default_str();
    synth->add_option("--vibration-amp", synth_vib_amp, "Strap vibration amplitude")
        ->capture_default_str();
    synth->add_option("--subject", synth_subject, "Subject id")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
    synth->add_option("--out", synth_out, "Output CSV path (sidecar written next to it)")
        ->required();

    // preprocess ---------------------------------------------------------
    auto* preprocess_cmd = app.add_subcommand(
        "preprocess", "Derive, filter and normalize the nine channel vectors");
    std::string pre_in, pre_out, pre_config;
    double pre_cutoff = 5.0;
    preprocess_cmd->add_option("--in", pre_in, "Recording CSV")->required();
    preprocess_cmd->add_option("--out", pre_out, "Processed CSV output")->required();
    preprocess_cmd->add_option("--cutoff", pre_cutoff, "Lowpass cutoff (Hz)")
        ->capture_default_str();
    preprocess_cmd->add_option("--config", pre_config, "Config file (JSON)");

    // segment ------------------------------------------------------------
    auto* segment_cmd = app.add_subcommand("segment", "Detect repetition cut points");
    std::string seg_in, seg_model, seg_out, seg_plot, seg_config;
    std::uint64_t seg_seed = 0;
    int seg_expected = 0;
    segment_cmd->add_option("--in", seg_in, "Recording CSV")->required();
    segment_cmd->add_option("--model", seg_model, "Segmenter (chunk classifier) model file")
        ->required();
    segment_cmd->add_option("--out", seg_out, "Cut-point JSON output")->required();
    segment_cmd->add_option("--plot", seg_plot, "Optional SVG plot of the detection channel");
    segment_cmd->add_option("--expected-reps", seg_expected,
                            "Prescribed repetition count (0 = choose k by elbow)")
        ->capture_default_str();
    segment_cmd->add_option("--seed", seg_seed, "Clustering seed")->capture_default_str();
    segment_cmd->add_option("--config", seg_config, "Config file (JSON)");

    // features -----------------------------------------------------------
    auto* features_cmd =
        app.add_subcommand("features", "Extract per-repetition feature vectors");
    std::string feat_in, feat_segments, feat_out, feat_config;
    bool feat_ground_truth = false;
    features_cmd->add_option("--in", feat_in, "Recording CSV")->required();
    features_cmd->add_option("--segments", feat_segments,
                             "Segmentation JSON (from the segment command)");
    features_cmd->add_flag("--ground-truth", feat_ground_truth,
                           "Use the sidecar's ground-truth bounds instead of --segments");
    features_cmd->add_option("--out", feat_out, "Feature CSV output")->required();
    features_cmd->add_option("--config", feat_config, "Config file (JSON)");

    // train ----------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "Train a classifier or the segmenter");
    std::string train_in, train_algo = "rf", train_out;
    std::uint64_t train_seed = 0;
    bool train_segmenter = false;
    train_cmd->add_option("--in", train_in, "Feature CSV (ignored with --segmenter)");
    train_cmd
        ->add_option("--algo", train_algo,
                     "Algorithm: logistic | smo | adaboost | rf | c45 | hoeffding")
        ->capture_default_str();
    train_cmd->add_flag("--segmenter", train_segmenter,
                        "Train the Hoeffding chunk classifier from built-in synthetic templates");
    train_cmd->add_option("--seed", train_seed, "Training seed")->capture_default_str();
    train_cmd->add_option("--out", train_out, "Model file output")->required();

    // evaluate ---------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("evaluate", "Subject-wise k-fold cross-validation");
    std::string eval_in, eval_algo, eval_group = "subject", eval_out;
    int eval_folds = 5;
    std::uint64_t eval_seed = 0;
    eval_cmd->add_option("--in", eval_in, "Feature CSV")->required();
    eval_cmd->add_option("--algo", eval_algo, "Algorithm: logistic | smo | adaboost | rf | c45")
        ->required();
    eval_cmd->add_option("--folds", eval_folds, "Fold count")->capture_default_str();
    eval_cmd->add_option("--group-by", eval_group, "Fold grouping key (only: subject)")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval_seed, "Fold-assignment and training seed")
        ->capture_default_str();
    eval_cmd->add_option("--out", eval_out, "Report JSON output (default: stdout)");

    // pipeline ------------------------------------------------------------
    auto* pipe_cmd = app.add_subcommand(
        "pipeline", "Segment, extract features and classify one recording");
    std::string pipe_in, pipe_segmenter, pipe_classifier, pipe_out, pipe_plot, pipe_config;
    std::uint64_t pipe_seed = 0;
    pipe_cmd->add_option("--in", pipe_in, "Recording CSV")->required();
    pipe_cmd->add_option("--segmenter", pipe_segmenter, "Segmenter model file")->required();
    pipe_cmd->add_option("--classifier", pipe_classifier, "Repetition classifier model file")
        ->required();
    pipe_cmd->add_option("--out", pipe_out, "Verdict JSON output")->required();
    pipe_cmd->add_option("--plot", pipe_plot, "Optional SVG plot with cut-point markers");
    pipe_cmd->add_option("--seed", pipe_seed, "Clustering seed")->capture_default_str();
    pipe_cmd->add_option("--config", pipe_config, "Config file (JSON)");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        SessionSpec spec = make_session_spec(exercise_from_string(synth_exercise), synth_reps,
                                             synth_deviant_every, synth_seed);
        if (!synth_pattern.empty()) spec.label_pattern = parse_pattern(synth_pattern);
        if (synth_fatigue) spec.with_fatigue();
        spec.noise_sigma = synth_noise;
        if (synth_vib_hz > 0.0 && synth_vib_amp > 0.0)
            spec.vibration = {synth_vib_hz, synth_vib_amp};
        spec.subject_id = synth_subject;
        const auto [rec, gt] = synth_session(spec);
        io::save_recording(rec, synth_out);
        std::cout << "wrote " << synth_out << " (" << rec.samples.size() << " samples, "
                  << gt.boundaries.size() << " repetitions)\n";
        return 0;
    }

    if (preprocess_cmd->parsed()) {
        ToolkitConfig cfg = load_config(pre_config);
        if (preprocess_cmd->count("--cutoff")) cfg.cutoff_hz = pre_cutoff;
        const RawRecording raw = io::load_recording(pre_in);
        const ProcessedRecording processed = preprocess(raw, cfg.cutoff_hz, cfg.mag_source);
        io::save_processed(processed, pre_out);
        std::cout << "wrote " << pre_out << '\n';
        return 0;
    }

    if (segment_cmd->parsed()) {
        ToolkitConfig cfg = load_config(seg_config);
        if (seg_expected > 0) cfg.segmentation.expected_reps = seg_expected;
        const RawRecording raw = io::load_recording(seg_in);
        const std::unique_ptr<Model> model = io::load_model(seg_model);
        const auto* segmenter = dynamic_cast<const HoeffdingTree*>(model.get());
        if (!segmenter) throw ModelError("segmenter model must be a hoeffding chunk classifier");
        const ProcessedRecording processed = preprocess(raw, cfg.cutoff_hz, cfg.mag_source);
        const SegmentationResult result =
            select_cut_points(processed, *segmenter, cfg.segmentation, seg_seed);
        write_text(seg_out, io::segmentation_to_json(result));
        if (!seg_plot.empty())
            write_text(seg_plot, io::svg_plot(processed.channel(cfg.segmentation.channel),
                                              result.cut_points));
        std::cout << "wrote " << seg_out << " (" << result.repetitions.size()
                  << " repetitions)\n";
        return 0;
    }

    if (features_cmd->parsed()) {
        if (feat_ground_truth == !feat_segments.empty())
            throw CLI::ValidationError("features",
                                       "use exactly one of --segments and --ground-truth");
        const ToolkitConfig cfg = load_config(feat_config);
        const RawRecording raw = io::load_recording(feat_in);
        std::vector<std::pair<int, int>> reps;
        if (feat_ground_truth) {
            if (!raw.ground_truth_bounds)
                throw DataError("recording sidecar has no ground_truth_bounds");
            reps = *raw.ground_truth_bounds;
        } else {
            reps = load_segments_json(feat_segments);
        }
        std::vector<Label> labels;
        if (raw.rep_labels && raw.rep_labels->size() == reps.size()) labels = *raw.rep_labels;
        const ProcessedRecording processed = preprocess(raw, cfg.cutoff_hz, cfg.mag_source);
        const Dataset dataset = io::features_for_recording(processed, reps, labels);
        io::save_feature_csv(dataset, feat_out);
        std::cout << "wrote " << feat_out << " (" << dataset.rows.size() << " rows)\n";
        return 0;
    }

    if (train_cmd->parsed()) {
        if (train_segmenter) {
            const std::vector<ChunkTemplate> templates = build_template_chunks(train_seed);
            const std::unique_ptr<HoeffdingTree> segmenter = train_chunk_classifier(templates);
            io::save_model(*segmenter, train_out);
            std::cout << "wrote " << train_out << " (" << templates.size()
                      << " template chunks)\n";
            return 0;
        }
        if (train_in.empty())
            throw CLI::ValidationError("train", "--in is required without --segmenter");
        const Dataset dataset = io::load_feature_csv(train_in);
        TrainConfig config;
        config.algorithm = algorithm_from_id(train_algo);
        config.seed = train_seed;
        const std::unique_ptr<Model> model = train(dataset, config);
        io::save_model(*model, train_out);
        std::cout << "wrote " << train_out << '\n';
        return 0;
    }

    if (eval_cmd->parsed()) {
        if (eval_group != "subject")
            throw CLI::ValidationError("evaluate", "--group-by supports only 'subject'");
        if (eval_algo == "hoeffding")
            throw CLI::ValidationError("evaluate",
                                       "--algo must be one of the five batch learners");
        const Dataset dataset = io::load_feature_csv(eval_in);
        TrainConfig config;
        config.algorithm = algorithm_from_id(eval_algo);
        config.seed = eval_seed;
        const FoldPlan plan = make_subject_folds(dataset, eval_folds, eval_seed);
        const CVReport report = cross_validate(dataset, config, plan);
        const std::string out_json = io::cv_report_to_json(report);
        if (eval_out.empty()) std::cout << out_json;
        else {
            write_text(eval_out, out_json);
            std::cout << "wrote " << eval_out << '\n';
        }
        return 0;
    }

    if (pipe_cmd->parsed()) {
        const ToolkitConfig cfg = load_config(pipe_config);
        io::PipelineOptions options;
        options.cutoff_hz = cfg.cutoff_hz;
        options.mag_source = cfg.mag_source;
        options.segmentation = cfg.segmentation;
        options.seed = pipe_seed;
        const io::PipelineResult result =
            io::run_pipeline(pipe_in, pipe_segmenter, pipe_classifier, options);
        write_text(pipe_out, io::pipeline_to_json(result));
        if (!pipe_plot.empty()) {
            // Re-derive the detection channel for the overlay.
            const RawRecording raw = io::load_recording(pipe_in);
            const ProcessedRecording processed = preprocess(raw, cfg.cutoff_hz, cfg.mag_source);
            std::vector<int> cuts;
            for (const auto& v : result.verdicts) {
                cuts.push_back(v.start);
                cuts.push_back(v.end);
            }
            write_text(pipe_plot,
                       io::svg_plot(processed.channel(cfg.segmentation.channel), cuts));
        }
        std::cout << "wrote " << pipe_out << " (" << result.verdicts.size() << " verdicts)\n";
        return 0;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
