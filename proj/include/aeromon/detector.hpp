#pragma once

#include <chrono>
#include <deque>
#include <string>
#include <vector>

#include <json.hpp>

#include "aeromon/classifier.hpp"
#include "aeromon/regions.hpp"

namespace aeromon {

// ----------------------------- base64 (model blobs) -------------------------

namespace detail {

inline constexpr char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out.push_back(kB64Alphabet[v & 63]);
    }
    const std::size_t rest = data.size() - i;
    if (rest == 1) {
        const std::uint32_t v = data[i] << 16;
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out += "==";
    } else if (rest == 2) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out.push_back(kB64Alphabet[(v >> 18) & 63]);
        out.push_back(kB64Alphabet[(v >> 12) & 63]);
        out.push_back(kB64Alphabet[(v >> 6) & 63]);
        out += "=";
    }
    return out;
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = value_of(c);
        if (v < 0) throw SpecError("reference.pixels_b64", "invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

}  // namespace detail

// ----------------------------------------------------------------------------

// Frozen training artifact: everything detection needs without the video.
struct DetectorModel {
    Region region;
    Frame reference;               // raw gray bytes of the reference frame
    std::vector<Corner> corners;   // in the reference frame, inside region
    EwmaParams ewma;
    LinearModel svm;
    VideoMeta meta;
    int levels = 4;
    std::string created_at;
};

struct TrainOptions {
    std::uint64_t seed = 42;
    int levels = 4;
    int window_override = 0;   // 0: one second of frames
    double c = 1.0;
    AgmmConfig agmm;
    std::string created_at;    // empty: resolved by the CLI
};

struct TrainReport {
    std::vector<Candidate> candidates;
    std::vector<double> cent_feature;
    std::size_t chosen = 0;
    double balance_ratio = 0.0;
    double cr = 0.0;
    EvalReport cross_validation;
    double time1_per_frame_ms = 0.0;  // max-contour step
    double time2_ms = 0.0;            // candidate selection
    double time3_per_region_ms = 0.0; // centroid-gap scoring
    std::vector<std::string> warnings;
};

struct TrainOutcome {
    DetectorModel model;
    TrainReport report;
};

// Full training pass: region proposal, feature series, k-means labeling with
// the balance gate, SVM fit, cross validation.
template <VideoSource V>
TrainOutcome train_detector(V& video, const TrainOptions& opts = {}) {
    const VideoMeta meta = video.meta();
    TrainOutcome out;
    TrainReport& rep = out.report;

    const double duration_s = static_cast<double>(meta.frame_count) / meta.fps;
    if (duration_s < 10.0 || duration_s > 20.0)
        rep.warnings.push_back("training clip is " + std::to_string(duration_s) +
                               " s; 10-20 s recommended");

    auto t0 = std::chrono::steady_clock::now();
    MixtureModel bg(static_cast<int>(meta.width), static_cast<int>(meta.height), opts.agmm);
    const auto contours = max_contours(video, bg);
    rep.time1_per_frame_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count() /
        std::max<std::uint32_t>(1, meta.frame_count);
    if (contours.empty()) throw NoMotionError("no motion found in training video");

    const Frame reference = video.frame(0);
    t0 = std::chrono::steady_clock::now();
    rep.candidates = select_candidates(contours, meta);
    rep.time2_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (rep.candidates.empty()) throw NoMotionError("no candidate regions survived selection");

    PickOptions popts;
    popts.seed = opts.seed;
    popts.levels = opts.levels;
    popts.window_override = opts.window_override;
    const PickResult pick = pick_object_region(rep.candidates, video, reference, popts);
    rep.cent_feature = pick.cent_feature;
    rep.chosen = pick.chosen;
    rep.time3_per_region_ms = pick.elapsed_ms / static_cast<double>(rep.candidates.size());

    const EwmaParams ewma = EwmaParams::from_fps(meta.fps, opts.window_override);
    const auto points = build_dataset(pick.series[pick.chosen], ewma);
    std::vector<FeaturePoint> labeled;
    try {
        const KMeans2Result km = kmeans2(points, mix_seed(opts.seed, 0xF00D));
        // The tracker resolves displacement to 0.01 px; an "on" cluster below
        // ten times that floor is sensor noise, not machine motion.
        const double far_norm = std::max(
            std::hypot(km.centroids[0].first, km.centroids[0].second),
            std::hypot(km.centroids[1].first, km.centroids[1].second));
        if (far_norm < 0.1)
            throw NoMotionError("feature series never leaves the noise floor");
        labeled = label_by_origin(km, points);
    } catch (const DegenerateDataError& e) {
        // A clip whose feature series never leaves one state is, for training
        // purposes, a clip without motion.
        throw NoMotionError(std::string("no separable motion states: ") + e.what());
    }
    rep.balance_ratio = balance_check(labeled);
    if (!balance_acceptable(rep.balance_ratio)) throw ImbalanceError(rep.balance_ratio);

    const Region& chosen = rep.candidates[pick.chosen].region;
    rep.cr = class_coefficient(labeled, chosen.key_frame, meta.frame_count);
    const LinearModel svm = svm_train(labeled, opts.c, opts.seed);
    rep.cross_validation = cross_validate(labeled, 5, opts.seed);

    out.model.region = chosen;
    out.model.reference = reference;
    out.model.corners = pick.corners[pick.chosen];
    out.model.ewma = ewma;
    out.model.svm = svm;
    out.model.meta = meta;
    out.model.levels = opts.levels;
    out.model.created_at = opts.created_at;
    return out;
}

// ------------------------------- detection ---------------------------------

struct Detection {
    std::uint64_t frame_index = 0;
    double time_s = 0.0;
    double dist = 0.0;
    double ewma = 0.0;
    int state = 0;
    double margin = 0.0;
};

// Sequential per-stream detector; the only state between frames is the EWMA
// ring buffer (and the gray-drift latch).
class StreamingDetector {
public:
    explicit StreamingDetector(const DetectorModel& model) : model_(model) {
        const GrayImage base = gaussian5x5(to_gray(model.reference));
        levels_ = std::min(model.levels, allowed_pyramid_levels(base.width, base.height));
        ref_pyr_ = build_pyramid(base, levels_);
        radius_ = 2.0 * std::sqrt(model.region.box.w * model.region.box.w / 4.0 +
                                  model.region.box.h * model.region.box.h / 4.0);
        ref_region_mean_ = region_mean(model.reference);
    }

    const DetectorModel& model() const { return model_; }

    // Mean gray drift of the object region has crossed the retrain threshold
    // at least once (suggestion hook; detection keeps running).
    bool drift_flagged() const { return drift_flagged_; }

    Detection feed(const Frame& frame) {
        if (frame.width != model_.meta.width || frame.height != model_.meta.height)
            throw DimensionMismatchError("stream dimensions do not match model");
        const Pyramid cur = build_pyramid(gaussian5x5(to_gray(frame)), levels_);
        return feed(frame, cur);
    }

    // Shared-pyramid variant for multi-detector streams.
    Detection feed(const Frame& frame, const Pyramid& cur) {
        const FlowResult flow = track_corners(ref_pyr_, cur, model_.corners, model_.region.box,
                                              radius_, levels_, 7);
        const double dist = dist_feature(flow);
        ring_.push_back(dist);
        if (static_cast<int>(ring_.size()) > model_.ewma.window) ring_.pop_front();
        const double q = 1.0 - model_.ewma.alpha;
        double num = 0.0, den = 0.0, wk = 1.0;
        for (auto it = ring_.rbegin(); it != ring_.rend(); ++it) {
            num += wk * *it;
            den += wk;
            wk *= q;
        }
        const double ewma = num / den;

        if (!drift_flagged_ && std::abs(region_mean(frame) - ref_region_mean_) >= 80.0)
            drift_flagged_ = true;

        const FeaturePoint p{dist, ewma, -1};
        const Prediction pred = svm_predict(model_.svm, p);
        Detection d;
        d.frame_index = count_;
        d.time_s = static_cast<double>(count_) / model_.meta.fps;
        d.dist = dist;
        d.ewma = ewma;
        d.state = pred.label;
        d.margin = pred.margin;
        ++count_;
        return d;
    }

    int levels() const { return levels_; }

private:
    double region_mean(const Frame& f) const {
        const Box& b = model_.region.box;
        long long sum = 0;
        for (int y = b.y; y < b.bottom(); ++y)
            for (int x = b.x; x < b.right(); ++x) sum += f.at(x, y);
        return static_cast<double>(sum) / static_cast<double>(b.area());
    }

    DetectorModel model_;
    Pyramid ref_pyr_;
    double radius_ = 0.0;
    int levels_ = 4;
    std::deque<double> ring_;
    std::uint64_t count_ = 0;
    double ref_region_mean_ = 0.0;
    bool drift_flagged_ = false;
};

template <VideoSource V>
std::vector<Detection> detect_all(const DetectorModel& model, V& video) {
    StreamingDetector det(model);
    std::vector<Detection> out;
    out.reserve(video.meta().frame_count);
    for (std::uint64_t i = 0; i < video.meta().frame_count; ++i) out.push_back(det.feed(video.frame(i)));
    return out;
}

// ------------------------------- benchmark ---------------------------------

struct BenchReport {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::size_t frames = 0;
    double fps = 0.0;
    double p50_ms = 0.0;
    double p90_ms = 0.0;
    double p99_ms = 0.0;
};

// Times the detect path only; frames are preloaded so disk I/O stays out of
// the measurement.
inline BenchReport bench_detect(const DetectorModel& model, const std::vector<Frame>& frames) {
    if (frames.empty()) throw std::invalid_argument("no frames to benchmark");
    StreamingDetector det(model);
    std::vector<double> ms;
    ms.reserve(frames.size());
    const auto all0 = std::chrono::steady_clock::now();
    for (const Frame& f : frames) {
        const auto t0 = std::chrono::steady_clock::now();
        det.feed(f);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
    }
    const double total_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - all0).count();
    std::sort(ms.begin(), ms.end());
    auto pct = [&](double p) {
        const std::size_t i = static_cast<std::size_t>(p * (ms.size() - 1));
        return ms[i];
    };
    BenchReport r;
    r.width = model.meta.width;
    r.height = model.meta.height;
    r.frames = frames.size();
    r.fps = static_cast<double>(frames.size()) / total_s;
    r.p50_ms = pct(0.50);
    r.p90_ms = pct(0.90);
    r.p99_ms = pct(0.99);
    return r;
}

// ----------------------------- serialization --------------------------------

inline nlohmann::ordered_json detector_to_json(const DetectorModel& m) {
    nlohmann::ordered_json corners = nlohmann::ordered_json::array();
    for (const Corner& c : m.corners)
        corners.push_back({{"x", c.x}, {"y", c.y}, {"score", c.score}});
    return nlohmann::ordered_json{
        {"meta",
         {{"width", m.meta.width}, {"height", m.meta.height}, {"fps", m.meta.fps},
          {"frame_count", m.meta.frame_count}}},
        {"region",
         {{"x", m.region.box.x}, {"y", m.region.box.y}, {"w", m.region.box.w},
          {"h", m.region.box.h}, {"area", m.region.area}, {"cx", m.region.cx},
          {"cy", m.region.cy}, {"key_frame", m.region.key_frame}}},
        {"reference",
         {{"width", m.reference.width}, {"height", m.reference.height},
          {"pixels_b64", detail::base64_encode(m.reference.pixels)}}},
        {"corners", corners},
        {"levels", m.levels},
        {"ewma", {{"alpha", m.ewma.alpha}, {"window", m.ewma.window}}},
        {"svm", linear_model_to_json(m.svm)},
        {"created_at", m.created_at}};
}

// A model file holds one or more detectors.
inline nlohmann::ordered_json model_file_json(const std::vector<DetectorModel>& models) {
    nlohmann::ordered_json detectors = nlohmann::ordered_json::array();
    for (const auto& m : models) detectors.push_back(detector_to_json(m));
    return nlohmann::ordered_json{{"version", 1}, {"detectors", detectors}};
}

inline DetectorModel detector_from_json(const nlohmann::json& j) {
    DetectorModel m;
    try {
        m.meta.width = j.at("meta").at("width").get<std::uint32_t>();
        m.meta.height = j.at("meta").at("height").get<std::uint32_t>();
        m.meta.fps = j.at("meta").at("fps").get<std::uint16_t>();
        m.meta.frame_count = j.at("meta").at("frame_count").get<std::uint32_t>();
        const auto& r = j.at("region");
        m.region.box = Box{r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(),
                           r.at("h").get<int>()};
        m.region.area = r.at("area").get<long long>();
        m.region.cx = r.at("cx").get<double>();
        m.region.cy = r.at("cy").get<double>();
        m.region.key_frame = r.at("key_frame").get<std::uint64_t>();
        m.reference.width = j.at("reference").at("width").get<std::uint32_t>();
        m.reference.height = j.at("reference").at("height").get<std::uint32_t>();
        m.reference.pixels = detail::base64_decode(j.at("reference").at("pixels_b64").get<std::string>());
        if (!m.reference.valid())
            throw SpecError("reference", "pixel payload does not match dimensions");
        for (const auto& c : j.at("corners"))
            m.corners.push_back(Corner{c.at("x").get<double>(), c.at("y").get<double>(),
                                       c.at("score").get<double>()});
        m.levels = j.at("levels").get<int>();
        m.ewma.alpha = j.at("ewma").at("alpha").get<double>();
        m.ewma.window = j.at("ewma").at("window").get<int>();
        m.svm = linear_model_from_json(j.at("svm"));
        m.created_at = j.value("created_at", "");
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("model", e.what());
    }
    return m;
}

inline std::vector<DetectorModel> model_file_from_json(const nlohmann::json& j) {
    std::vector<DetectorModel> out;
    try {
        if (j.at("version").get<int>() != 1) throw SpecError("version", "unsupported model version");
        for (const auto& d : j.at("detectors")) out.push_back(detector_from_json(d));
    } catch (const nlohmann::json::exception& e) {
        throw SpecError("model", e.what());
    }
    if (out.empty()) throw SpecError("detectors", "model file holds no detectors");
    return out;
}

inline nlohmann::ordered_json detection_to_json(const Detection& d, int detector_index = -1) {
    nlohmann::ordered_json j{{"frame_index", d.frame_index}, {"time_s", d.time_s},
                             {"dist", d.dist},               {"ewma", d.ewma},
                             {"state", d.state},             {"margin", d.margin}};
    if (detector_index >= 0) j["detector"] = detector_index;
    return j;
}

inline nlohmann::ordered_json train_report_json(const TrainReport& rep) {
    nlohmann::ordered_json cands = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rep.candidates.size(); ++i) {
        const Candidate& c = rep.candidates[i];
        cands.push_back({{"box", {c.region.box.x, c.region.box.y, c.region.box.w, c.region.box.h}},
                         {"area", c.region.area},
                         {"key_frame", c.region.key_frame},
                         {"f", c.f},
                         {"cent_feature", rep.cent_feature[i]},
                         {"chosen", i == rep.chosen}});
    }
    return nlohmann::ordered_json{
        {"candidates", cands},
        {"chosen", rep.chosen},
        {"balance_ratio", rep.balance_ratio},
        {"cr", rep.cr},
        {"cross_validation",
         {{"fold_mean", rep.cross_validation.fold_mean},
          {"fold_std", rep.cross_validation.fold_std},
          {"precision", rep.cross_validation.precision},
          {"recall", rep.cross_validation.recall},
          {"f1", rep.cross_validation.f1}}},
        {"timing_ms",
         {{"time1_per_frame", rep.time1_per_frame_ms},
          {"time2_total", rep.time2_ms},
          {"time3_per_region", rep.time3_per_region_ms}}},
        {"warnings", rep.warnings}};
}

}  // namespace aeromon
