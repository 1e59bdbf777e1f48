#pragma once

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aeromon/aeromon.hpp"

namespace aeromon::cli {

// Documented exit codes. Anything unexpected maps to 1.
enum ExitCode {
    kOk = 0,
    kError = 1,
    kNoMotion = 2,
    kImbalanced = 3,
    kDimMismatch = 4,
    kLengthMismatch = 5,
    kBadSpec = 6,
};

namespace detail {

inline nlohmann::json load_json(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw SpecError(std::string(what), "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string(what), std::string("invalid JSON: ") + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path);
}

inline std::string resolve_created_at(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    std::time_t t;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env)
        t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
    else
        t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline AgmmConfig agmm_from_config_file(const std::string& path) {
    AgmmConfig cfg;
    if (path.empty()) return cfg;
    const nlohmann::json j = load_json(path, "config");
    if (!j.is_object()) throw SpecError("config", "expected a JSON object");
    auto num = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) throw SpecError(std::string("config.") + key, "expected number");
        return j[key].get<double>();
    };
    cfg.kmax = static_cast<int>(num("kmax", cfg.kmax));
    cfg.history = static_cast<int>(num("history", cfg.history));
    cfg.var_threshold = num("var_threshold", cfg.var_threshold);
    cfg.background_ratio = num("background_ratio", cfg.background_ratio);
    cfg.var_init = num("var_init", cfg.var_init);
    cfg.var_min = num("var_min", cfg.var_min);
    cfg.var_max = num("var_max", cfg.var_max);
    cfg.prune_ct = num("prune_ct", cfg.prune_ct);
    return cfg;
}

// Truth labels from a ground-truth sidecar.
inline std::vector<int> labels_from_sidecar(const nlohmann::json& j, std::size_t frames) {
    if (!j.contains("on_intervals") || !j["on_intervals"].is_array())
        throw SpecError("on_intervals", "missing interval list");
    std::vector<int> truth(frames, 0);
    for (std::size_t i = 0; i < j["on_intervals"].size(); ++i) {
        const auto& iv = j["on_intervals"][i];
        if (!iv.is_array() || iv.size() != 2)
            throw SpecError("on_intervals[" + std::to_string(i) + "]", "expected [start, end]");
        const auto a = iv[0].get<std::uint64_t>();
        const auto b = iv[1].get<std::uint64_t>();
        for (std::uint64_t t = a; t < b && t < frames; ++t) truth[t] = 1;
    }
    return truth;
}

}  // namespace detail

// ---------------------------------- synth -----------------------------------

inline int cmd_synth(const std::string& spec_path, const std::string& out_path,
                     std::string labels_path) {
    const SynthScene scene = scene_from_json(detail::load_json(spec_path, "$"));
    if (labels_path.empty()) labels_path = out_path + ".labels.json";
    synth_scene(scene, out_path, labels_path);
    std::cerr << "wrote " << scene.meta.frame_count << " frames to " << out_path << " (labels "
              << labels_path << ")\n";
    return kOk;
}

// --------------------------------- augment ----------------------------------

inline int cmd_augment(const std::string& spec_path, const std::string& in_path,
                       const std::string& out_path, std::optional<std::uint64_t> seed) {
    AugmentSpec spec = augment_spec_from_json(detail::load_json(spec_path, "$"));
    if (seed) spec.seed = *seed;
    augment_video_file(in_path, spec, out_path);
    return kOk;
}

// ---------------------------------- train -----------------------------------

inline int cmd_train(const std::string& video_path, const std::string& model_path,
                     const std::string& report_path, const TrainOptions& opts) {
    FrameBuffer video = load_video(video_path);
    TrainOutcome outcome = train_detector(video, opts);
    for (const std::string& w : outcome.report.warnings) std::cerr << "warning: " << w << "\n";
    detail::write_text(model_path, model_file_json({outcome.model}).dump(2) + "\n");
    const std::string report = train_report_json(outcome.report).dump(2) + "\n";
    if (!report_path.empty()) detail::write_text(report_path, report);
    std::cout << report;
    return kOk;
}

// ---------------------------------- detect ----------------------------------

inline int cmd_detect(const std::string& model_path, const std::string& video_path,
                      const std::string& out_path, double every_s) {
    const auto models = model_file_from_json(detail::load_json(model_path, "model"));

    std::unique_ptr<VideoReader> reader;
    if (video_path == "-") reader = std::make_unique<VideoReader>(std::cin);
    else reader = std::make_unique<VideoReader>(video_path);

    std::ofstream file_out;
    std::ostream* out = &std::cout;
    if (out_path != "-" && !out_path.empty()) {
        file_out.open(out_path, std::ios::trunc);
        if (!file_out) throw std::runtime_error("cannot write " + out_path);
        out = &file_out;
    }

    std::vector<StreamingDetector> detectors;
    detectors.reserve(models.size());
    for (const auto& m : models) {
        if (m.meta.width != reader->meta().width || m.meta.height != reader->meta().height)
            throw DimensionMismatchError("model expects " + std::to_string(m.meta.width) + "x" +
                                         std::to_string(m.meta.height));
        detectors.emplace_back(m);
    }
    int levels = 0;
    for (const auto& d : detectors) levels = std::max(levels, d.levels());

    const int stride =
        every_s > 0.0
            ? std::max(1, static_cast<int>(std::lround(every_s * reader->meta().fps)))
            : 1;
    std::vector<std::vector<Detection>> pending(detectors.size());
    std::vector<int> last_state(detectors.size(), 0);
    std::vector<bool> drift_warned(detectors.size(), false);

    Frame frame;
    std::uint64_t n = 0;
    while (reader->next(frame)) {
        const Pyramid cur = build_pyramid(gaussian5x5(to_gray(frame)), levels);
        for (std::size_t k = 0; k < detectors.size(); ++k) {
            Detection d = detectors[k].feed(frame, cur);
            if (detectors[k].drift_flagged() && !drift_warned[k]) {
                drift_warned[k] = true;
                std::cerr << "warning: object-region gray drifted >= 80 from the reference; "
                             "consider retraining the classifier\n";
            }
            const int idx = detectors.size() > 1 ? static_cast<int>(k) : -1;
            if (stride == 1) {
                *out << detection_to_json(d, idx).dump() << "\n";
            } else {
                pending[k].push_back(d);
                if (pending[k].size() == static_cast<std::size_t>(stride)) {
                    // Majority vote over the window; ties keep the last state.
                    int on = 0;
                    for (const auto& p : pending[k]) on += p.state;
                    Detection voted = pending[k].back();
                    const int off = stride - on;
                    voted.state = on > off ? 1 : (on < off ? 0 : last_state[k]);
                    last_state[k] = voted.state;
                    *out << detection_to_json(voted, idx).dump() << "\n";
                    pending[k].clear();
                }
            }
        }
        ++n;
    }
    std::cerr << "processed " << n << " frames\n";
    return kOk;
}

// ----------------------------------- eval -----------------------------------

inline int cmd_eval(const std::string& detections_path, const std::string& truth_path,
                    const std::string& csv_path, const std::string& svg_path,
                    std::uint64_t expect_frames) {
    std::ifstream in(detections_path);
    if (!in) throw std::runtime_error("cannot open " + detections_path);
    std::vector<Detection> detections;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw SpecError("detections", e.what());
        }
        Detection d;
        d.frame_index = j.at("frame_index").get<std::uint64_t>();
        d.time_s = j.at("time_s").get<double>();
        d.dist = j.at("dist").get<double>();
        d.ewma = j.at("ewma").get<double>();
        d.state = j.at("state").get<int>();
        d.margin = j.at("margin").get<double>();
        detections.push_back(d);
    }
    for (std::size_t i = 0; i < detections.size(); ++i)
        if (detections[i].frame_index != i)
            throw DimensionMismatchError("detections are not a contiguous frame sequence");
    if (expect_frames && expect_frames != detections.size())
        throw std::length_error("expected " + std::to_string(expect_frames) + " detections, got " +
                                std::to_string(detections.size()));

    const auto truth =
        detail::labels_from_sidecar(detail::load_json(truth_path, "truth"), detections.size());
    std::vector<int> pred;
    pred.reserve(detections.size());
    for (const auto& d : detections) pred.push_back(d.state);
    const EvalReport r = evaluate(pred, truth);

    if (!csv_path.empty()) detail::write_text(csv_path, feature_csv(detections));
    if (!svg_path.empty()) detail::write_text(svg_path, scatter_svg(detections));

    std::cout << nlohmann::ordered_json{{"precision", r.precision}, {"recall", r.recall},
                                        {"f1", r.f1},               {"accuracy", r.accuracy()},
                                        {"tp", r.tp},               {"fp", r.fp},
                                        {"fn", r.fn},               {"tn", r.tn}}
                     .dump(2)
              << "\n";
    return kOk;
}

// ----------------------------------- bench ----------------------------------

inline int cmd_bench(const std::string& model_path, const std::string& video_path,
                     std::size_t max_frames) {
    const auto models = model_file_from_json(detail::load_json(model_path, "model"));
    auto [meta, frames] = read_video(video_path);
    if (max_frames && frames.size() > max_frames) frames.resize(max_frames);
    if (models[0].meta.width != meta.width || models[0].meta.height != meta.height)
        throw DimensionMismatchError("model/video resolution mismatch");
    const BenchReport r = bench_detect(models[0], frames);
    std::cout << nlohmann::ordered_json{{"width", r.width},   {"height", r.height},
                                        {"frames", r.frames}, {"fps", r.fps},
                                        {"p50_ms", r.p50_ms}, {"p90_ms", r.p90_ms},
                                        {"p99_ms", r.p99_ms}}
                     .dump(2)
              << "\n";
    return kOk;
}

// ------------------------------------ app -----------------------------------

inline int run(int argc, const char* const* argv) {
    CLI::App app{"aeromon: fixed-region machine on/off detection from surveillance video"};
    app.require_subcommand(1);

    std::string spec_path, in_path, out_path, labels_path, video_path, model_path;
    std::string report_path, detections_path, truth_path, csv_path, svg_path, config_path;
    std::string created_at;
    std::uint64_t seed = 42;
    std::uint64_t expect_frames = 0;
    std::size_t bench_frames = 0;
    int levels = 4;
    int window = 0;
    double every_s = 0.0;
    std::optional<std::uint64_t> seed_override;

    auto* synth = app.add_subcommand("synth", "render a synthetic scene to an RGV1 file");
    synth->add_option("--spec", spec_path, "scene spec JSON")->required();
    synth->add_option("--out", out_path, "output video path")->required();
    synth->add_option("--labels", labels_path, "ground-truth sidecar path (default <out>.labels.json)");

    auto* augment = app.add_subcommand("augment", "apply the gray-shift / noise protocol");
    augment->add_option("--spec", spec_path, "augment spec JSON")->required();
    augment->add_option("--in", in_path, "input video")->required();
    augment->add_option("--out", out_path, "output video")->required();
    std::uint64_t seed_opt_storage = 0;
    auto* seed_opt = augment->add_option("--seed", seed_opt_storage, "override the spec seed");

    auto* train = app.add_subcommand("train", "train region + state detector from a clip");
    train->add_option("--video", video_path, "training video (starts in the off state)")->required();
    train->add_option("--out", model_path, "model JSON output")->required();
    train->add_option("--report", report_path, "training report JSON output");
    train->add_option("--seed", seed, "RNG seed");
    train->add_option("--levels", levels, "pyramid levels (0-4)")->check(CLI::Range(0, 4));
    train->add_option("--window", window, "EWMA window override in frames (default: fps)");
    train->add_option("--config", config_path, "background-model config JSON");
    train->add_option("--created-at", created_at, "pin the model timestamp (ISO-8601)");

    auto* detect = app.add_subcommand("detect", "stream detections as JSON lines");
    detect->add_option("--model", model_path, "model JSON")->required();
    detect->add_option("--video", video_path, "video path or - for stdin")->required();
    detect->add_option("--out", out_path, "output path or - for stdout (default)");
    detect->add_option("--every", every_s, "emit one majority-voted line per N seconds");

    auto* eval = app.add_subcommand("eval", "score detections against ground truth");
    eval->add_option("--detections", detections_path, "JSON-lines detections")->required();
    eval->add_option("--truth", truth_path, "ground-truth sidecar JSON")->required();
    eval->add_option("--csv", csv_path, "feature CSV output");
    eval->add_option("--svg", svg_path, "feature scatter SVG output");
    eval->add_option("--frames", expect_frames, "expected detection count");

    auto* bench = app.add_subcommand("bench", "measure detect-path throughput");
    bench->add_option("--model", model_path, "model JSON")->required();
    bench->add_option("--video", video_path, "video to replay")->required();
    bench->add_option("--frames", bench_frames, "cap the number of frames");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (synth->parsed()) return cmd_synth(spec_path, out_path, labels_path);
        if (augment->parsed()) {
            if (*seed_opt) seed_override = seed_opt_storage;
            return cmd_augment(spec_path, in_path, out_path, seed_override);
        }
        if (train->parsed()) {
            TrainOptions opts;
            opts.seed = seed;
            opts.levels = levels;
            opts.window_override = window;
            opts.agmm = detail::agmm_from_config_file(config_path);
            opts.created_at = detail::resolve_created_at(created_at);
            return cmd_train(video_path, model_path, report_path, opts);
        }
        if (detect->parsed()) return cmd_detect(model_path, video_path, out_path, every_s);
        if (eval->parsed())
            return cmd_eval(detections_path, truth_path, csv_path, svg_path, expect_frames);
        if (bench->parsed()) return cmd_bench(model_path, video_path, bench_frames);
    } catch (const NoMotionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNoMotion;
    } catch (const UntrackableError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNoMotion;
    } catch (const ImbalanceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kImbalanced;
    } catch (const DimensionMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDimMismatch;
    } catch (const std::length_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kLengthMismatch;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBadSpec;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}

}  // namespace aeromon::cli
