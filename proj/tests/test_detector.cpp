#include <catch2/catch_amalgamated.hpp>

#include "aeromon/augment.hpp"
#include "aeromon/detector.hpp"
#include "aeromon/synth.hpp"
#include "helpers.hpp"

using namespace aeromon;

namespace {

SynthScene train_scene(std::uint64_t seed) {
    SynthScene s;
    s.meta = VideoMeta{160, 120, 25, 300};
    s.object_box = Box{100, 24, 36, 36};
    s.on_intervals = {{120, 300}};
    s.background = BackgroundKind::flat;
    s.seed = seed;
    return s;
}

// Frame accuracy vs ground truth, skipping +-window frames around interval
// boundaries.
double masked_accuracy(const std::vector<Detection>& det, const SynthScene& scene, int window) {
    long long correct = 0, counted = 0;
    for (const Detection& d : det) {
        bool near_edge = false;
        for (const auto& [a, b] : scene.on_intervals) {
            for (const std::uint32_t edge : {a, b}) {
                const auto lo = edge >= static_cast<std::uint32_t>(window) ? edge - window : 0u;
                if (d.frame_index >= lo && d.frame_index <= edge + static_cast<std::uint32_t>(window))
                    near_edge = true;
            }
        }
        if (near_edge) continue;
        ++counted;
        correct += d.state == (scene.on_at(static_cast<std::uint32_t>(d.frame_index)) ? 1 : 0);
    }
    return counted ? static_cast<double>(correct) / counted : 0.0;
}

}  // namespace

TEST_CASE("training finds the machine region and a clean classifier") {
    const SynthScene scene = train_scene(301);
    FrameBuffer video = synth_video(scene);
    const TrainOutcome out = train_detector(video, {});

    INFO("chosen box " << out.model.region.box.x << "," << out.model.region.box.y << " "
                       << out.model.region.box.w << "x" << out.model.region.box.h);
    REQUIRE(iou(out.model.region.box, scene.object_box) >= 0.5);
    REQUIRE(balance_acceptable(out.report.balance_ratio));
    REQUIRE(out.report.cr > 0.0);
    REQUIRE(out.report.cr < 0.1);
    REQUIRE(out.report.cross_validation.fold_mean >= 0.95);
    REQUIRE_FALSE(out.model.corners.empty());
    for (const Corner& c : out.model.corners)
        REQUIRE(out.model.region.box.contains(static_cast<int>(c.x), static_cast<int>(c.y)));

    SECTION("detect on the training video is nearly perfect outside transitions") {
        const auto det = detect_all(out.model, video);
        REQUIRE(det.size() == 300);
        REQUIRE(masked_accuracy(det, scene, out.model.ewma.window) >= 0.99);
    }

    SECTION("held-out render of the same scene detects cleanly") {
        SynthScene held = scene;
        held.seed = 999;
        held.on_intervals = {{60, 140}, {200, 260}};
        FrameBuffer other = synth_video(held);
        const auto det = detect_all(out.model, other);
        REQUIRE(masked_accuracy(det, held, out.model.ewma.window) >= 0.99);
    }

    SECTION("streaming in chunks equals the batch run") {
        const auto batch = detect_all(out.model, video);
        StreamingDetector stream(out.model);
        std::vector<Detection> chunked;
        for (std::uint64_t i = 0; i < video.meta().frame_count; ++i)
            chunked.push_back(stream.feed(video.frame(i)));
        REQUIRE(chunked.size() == batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            REQUIRE(chunked[i].dist == batch[i].dist);
            REQUIRE(chunked[i].ewma == batch[i].ewma);
            REQUIRE(chunked[i].state == batch[i].state);
            REQUIRE(chunked[i].margin == batch[i].margin);
        }
    }

    SECTION("model json round trip preserves detections exactly") {
        const auto json_text = model_file_json({out.model}).dump();
        const auto models = model_file_from_json(nlohmann::json::parse(json_text));
        REQUIRE(models.size() == 1);
        const auto a = detect_all(out.model, video);
        const auto b = detect_all(models[0], video);
        for (std::size_t i = 0; i < a.size(); ++i) {
            REQUIRE(a[i].dist == b[i].dist);
            REQUIRE(a[i].ewma == b[i].ewma);
            REQUIRE(a[i].state == b[i].state);
            REQUIRE(a[i].margin == b[i].margin);
        }
    }

    SECTION("same seed trains byte-identical models") {
        const TrainOutcome again = train_detector(video, {});
        REQUIRE(model_file_json({again.model}).dump() == model_file_json({out.model}).dump());
    }

    SECTION("dimension mismatch is rejected") {
        StreamingDetector stream(out.model);
        REQUIRE_THROWS_AS(stream.feed(Frame(80, 60)), DimensionMismatchError);
    }

    SECTION("gray drift sets the retrain flag") {
        StreamingDetector stream(out.model);
        Frame bright = apply_gray_shift(video.frame(10), 90, RowColMask::full(video.frame(10)));
        stream.feed(bright);
        REQUIRE(stream.drift_flagged());
        StreamingDetector calm(out.model);
        calm.feed(video.frame(10));
        REQUIRE_FALSE(calm.drift_flagged());
    }

    SECTION("bench reports positive throughput and ordered percentiles") {
        const BenchReport r = bench_detect(out.model, video.frames);
        REQUIRE(r.fps > 0.0);
        REQUIRE(r.p50_ms <= r.p90_ms);
        REQUIRE(r.p90_ms <= r.p99_ms);
        REQUIRE(r.frames == 300);
    }
}

TEST_CASE("static clip raises no-motion") {
    SynthScene scene = train_scene(307);
    scene.on_intervals.clear();
    FrameBuffer video = synth_video(scene);
    REQUIRE_THROWS_AS(train_detector(video, {}), NoMotionError);
}

TEST_CASE("three-frame blip raises imbalance") {
    SynthScene scene = train_scene(311);
    scene.on_intervals = {{150, 153}};
    FrameBuffer video = synth_video(scene);
    REQUIRE_THROWS_AS(train_detector(video, {}), ImbalanceError);
}

TEST_CASE("train report serializes with candidates and timings") {
    const SynthScene scene = train_scene(313);
    FrameBuffer video = synth_video(scene);
    const TrainOutcome out = train_detector(video, {});
    const auto j = train_report_json(out.report);
    REQUIRE(j["candidates"].size() == out.report.candidates.size());
    REQUIRE(j["candidates"][out.report.chosen]["chosen"].get<bool>());
    REQUIRE(j["timing_ms"]["time1_per_frame"].get<double>() > 0.0);
    REQUIRE(j["timing_ms"]["time3_per_region"].get<double>() > 0.0);
    REQUIRE(j.contains("cr"));
}
