#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "aeromon/augment.hpp"
#include "aeromon/synth.hpp"
#include "aeromon/video_io.hpp"
#include "helpers.hpp"

using namespace aeromon;

TEST_CASE("rgv round trip is bit exact") {
    Rng rng(7);
    for (int trial = 0; trial < 8; ++trial) {
        const std::uint32_t w = 32 + static_cast<std::uint32_t>(rng.uniform_int(48));
        const std::uint32_t h = 32 + static_cast<std::uint32_t>(rng.uniform_int(48));
        const std::uint32_t n = static_cast<std::uint32_t>(rng.uniform_int(6));
        VideoMeta meta{w, h, 25, n};
        std::vector<Frame> frames;
        for (std::uint32_t i = 0; i < n; ++i) frames.push_back(testutil::random_frame(w, h, rng, i));

        const std::string path = testutil::temp_path("roundtrip.rgv");
        write_video(meta, frames, path);
        auto [meta2, frames2] = read_video(path);
        REQUIRE(meta2 == meta);
        REQUIRE(frames2.size() == frames.size());
        for (std::uint32_t i = 0; i < n; ++i) REQUIRE(frames2[i].pixels == frames[i].pixels);
    }
}

TEST_CASE("rgv header example") {
    Rng rng(3);
    VideoMeta meta{64, 48, 25, 10};
    std::vector<Frame> frames;
    for (int i = 0; i < 10; ++i) frames.push_back(testutil::random_frame(64, 48, rng, i));
    const std::string path = testutil::temp_path("header.rgv");
    write_video(meta, frames, path);
    REQUIRE(std::filesystem::file_size(path) == kRgvHeaderSize + 10 * 64 * 48);

    VideoReader r(path);
    REQUIRE(r.meta().width == 64);
    REQUIRE(r.meta().height == 48);
    REQUIRE(r.meta().fps == 25);
    int count = 0;
    Frame f;
    while (r.next(f)) {
        REQUIRE(f.pixels.size() == 64 * 48);
        ++count;
    }
    REQUIRE(count == 10);
}

TEST_CASE("bad magic is a format error") {
    const std::string path = testutil::temp_path("magic.rgv");
    std::ofstream out(path, std::ios::binary);
    out << "XXXX";
    std::string rest(14, '\0');
    out.write(rest.data(), 14);
    out.close();
    REQUIRE_THROWS_AS(VideoReader(path), VideoFormatError);
}

TEST_CASE("truncated payload reports the byte offset") {
    Rng rng(4);
    VideoMeta meta{64, 48, 25, 10};
    std::vector<Frame> frames;
    for (int i = 0; i < 10; ++i) frames.push_back(testutil::random_frame(64, 48, rng, i));
    const std::string path = testutil::temp_path("trunc.rgv");
    write_video(meta, frames, path);
    std::filesystem::resize_file(path, kRgvHeaderSize + 9 * 64 * 48);  // drop the last frame

    VideoReader r(path);
    Frame f;
    for (int i = 0; i < 9; ++i) REQUIRE(r.next(f));
    try {
        r.next(f);
        FAIL("expected corruption error");
    } catch (const VideoCorruptError& e) {
        REQUIRE(e.byte_offset == kRgvHeaderSize + 9 * 64 * 48);
    }
}

TEST_CASE("zero-frame video is valid") {
    VideoMeta meta{64, 48, 25, 0};
    const std::string path = testutil::temp_path("empty.rgv");
    write_video(meta, {}, path);
    VideoReader r(path);
    Frame f;
    REQUIRE_FALSE(r.next(f));
}

TEST_CASE("wrong-size frame is an argument error") {
    VideoMeta meta{64, 48, 25, 1};
    const std::string path = testutil::temp_path("badframe.rgv");
    VideoWriter w(path, meta);
    REQUIRE_THROWS_AS(w.write(Frame(32, 48)), std::invalid_argument);
}

TEST_CASE("gray shift clamps per the formula") {
    Frame f(32, 32);
    f.at(0, 0) = 200;
    f.at(1, 0) = 30;
    f.at(2, 0) = 100;
    const auto full = RowColMask::full(f);
    REQUIRE(apply_gray_shift(f, 80, full).at(0, 0) == 255);
    REQUIRE(apply_gray_shift(f, -80, full).at(1, 0) == 0);
    REQUIRE(apply_gray_shift(f, 40, full).at(2, 0) == 140);

    SECTION("identity and masking") {
        Rng rng(9);
        Frame r = testutil::random_frame(32, 32, rng);
        REQUIRE(apply_gray_shift(r, 0, full).pixels == r.pixels);
        const Frame shifted = apply_gray_shift(r, 50, RowColMask{16, 32});
        for (int y = 16; y < 32; ++y)
            for (int x = 0; x < 32; ++x) REQUIRE(shifted.at(x, y) == r.at(x, y));
    }
}

TEST_CASE("salt and pepper changes an exact pixel count") {
    Rng rng(11);
    Frame f = testutil::random_frame(100, 100, rng);
    const RowColMask mask{100, 100};

    REQUIRE(apply_salt_pepper(f, 0.0, mask, 5).pixels == f.pixels);

    const Frame noisy = apply_salt_pepper(f, 0.04, mask, 5);
    int changed = 0;
    for (std::size_t i = 0; i < f.pixels.size(); ++i) {
        if (noisy.pixels[i] != f.pixels[i]) {
            ++changed;
            REQUIRE((noisy.pixels[i] == 0 || noisy.pixels[i] == 255));
        }
    }
    REQUIRE(changed == 400);

    REQUIRE(apply_salt_pepper(f, 0.04, mask, 5).pixels == noisy.pixels);  // determinism
    REQUIRE_THROWS_AS(apply_salt_pepper(f, 0.6, mask, 5), std::invalid_argument);
}

TEST_CASE("augment identity spec is bit identical") {
    Rng rng(13);
    FrameBuffer src(VideoMeta{64, 48, 25, 0});
    for (int i = 0; i < 5; ++i) src.push(testutil::random_frame(64, 48, rng));

    AugmentSpec spec;  // v = 0, snr = 0, full mask
    std::vector<Frame> out;
    augment_video(src, spec, [&](Frame f) { out.push_back(std::move(f)); });
    REQUIRE(out.size() == 5);
    for (int i = 0; i < 5; ++i) REQUIRE(out[i].pixels == src.frames[i].pixels);
}

TEST_CASE("augment applies shift then noise inside the drawn mask") {
    FrameBuffer src(VideoMeta{64, 48, 25, 0});
    for (int i = 0; i < 3; ++i) src.push(Frame(64, 48, i, 100));

    AugmentSpec spec;  // P3 style: all rows and cols, +40, snr in [0.01, 0.1]
    spec.gray_delta = RandRange::constant(40);
    spec.snr = RandRange{0.01, 0.1, 0.01};
    spec.seed = 21;
    std::vector<Frame> out;
    augment_video(src, spec, [&](Frame f) { out.push_back(std::move(f)); });
    for (const Frame& f : out) {
        for (const auto p : f.pixels) REQUIRE((p == 140 || p == 0 || p == 255));
        std::size_t noised = 0;
        for (const auto p : f.pixels)
            if (p != 140) ++noised;
        const double snr = static_cast<double>(noised) / f.pixels.size();
        REQUIRE(snr >= 0.009);
        REQUIRE(snr <= 0.101);
    }

    SECTION("reference frame opt-out") {
        spec.apply_to_reference = false;
        out.clear();
        augment_video(src, spec, [&](Frame f) { out.push_back(std::move(f)); });
        REQUIRE(out[0].pixels == src.frames[0].pixels);
        REQUIRE(out[1].pixels != src.frames[1].pixels);
    }
}

TEST_CASE("synthetic scene ground truth is exact by construction") {
    SynthScene scene;
    scene.meta = VideoMeta{160, 120, 25, 300};
    scene.object_box = Box{96, 20, 40, 40};
    scene.on_intervals = {{100, 200}};
    scene.background = BackgroundKind::flat;
    scene.seed = 31;

    for (std::uint32_t t : {0u, 99u, 200u, 299u}) REQUIRE_FALSE(scene.on_at(t));
    for (std::uint32_t t : {100u, 150u, 199u}) REQUIRE(scene.on_at(t));

    const auto truth = ground_truth_json(scene);
    REQUIRE(truth["object_box"] == nlohmann::ordered_json({96, 20, 40, 40}));
    REQUIRE(truth["on_intervals"][0] == nlohmann::ordered_json({100, 200}));

    SECTION("spray stays within twice the box area") {
        const Box spray = scene.spray_extent();
        REQUIRE(spray.area() <= 2 * scene.object_box.area());
        REQUIRE(iou(spray, scene.object_box) > 0.5);
    }

    SECTION("on frames differ from off frames inside the box") {
        SceneRenderer r(scene);
        const Frame off = r.render(50);
        const Frame off2 = r.render(60);
        const Frame on = r.render(150);
        int static_same = 0, on_diff = 0;
        for (int y = scene.object_box.y; y < scene.object_box.bottom(); ++y) {
            for (int x = scene.object_box.x; x < scene.object_box.right(); ++x) {
                static_same += std::abs(off.at(x, y) - off2.at(x, y)) <= 4;
                on_diff += std::abs(on.at(x, y) - off.at(x, y)) > 20;
            }
        }
        REQUIRE(static_same > scene.object_box.area() * 95 / 100);
        REQUIRE(on_diff > scene.object_box.area() / 2);
    }
}

TEST_CASE("jitter scene translates at most 2 px per frame") {
    SynthScene scene;
    scene.meta = VideoMeta{160, 120, 25, 40};
    scene.object_box = Box{100, 16, 32, 32};
    scene.background = BackgroundKind::jitter;
    scene.seed = 5;
    SceneRenderer r(scene);

    // Recover the integer shift between consecutive frames by exhaustive
    // search over +-3 px; the interior must match exactly up to noise.
    Frame prev = r.render(0);
    for (std::uint32_t t = 1; t < 6; ++t) {
        const Frame cur = r.render(t);
        int best_dx = 99, best_dy = 99;
        double best_err = 1e18;
        for (int dy = -3; dy <= 3; ++dy) {
            for (int dx = -3; dx <= 3; ++dx) {
                double err = 0.0;
                for (int y = 8; y < 112; y += 3)
                    for (int x = 8; x < 152; x += 3) {
                        const double d = cur.at(x, y) - prev.at(x + dx, y + dy);
                        err += d * d;
                    }
                if (err < best_err) { best_err = err; best_dx = dx; best_dy = dy; }
            }
        }
        REQUIRE(std::abs(best_dx) <= 2);
        REQUIRE(std::abs(best_dy) <= 2);
        prev = cur;
    }
}

TEST_CASE("pedestrian blob never intersects the object box") {
    SynthScene scene;
    scene.meta = VideoMeta{160, 120, 25, 400};
    scene.object_box = Box{96, 20, 40, 40};
    scene.background = BackgroundKind::pedestrian;
    scene.seed = 17;
    SceneRenderer r(scene);
    for (std::uint32_t t = 0; t < scene.meta.frame_count; t += 7) {
        const Box ped = r.pedestrian_at(t);
        REQUIRE(iou(ped, scene.object_box) == 0.0);
    }
}

TEST_CASE("scene spec json rejects malformed fields with a path") {
    nlohmann::json good{{"width", 160}, {"height", 120},          {"fps", 25},
                        {"frames", 50}, {"object_box", {8, 8, 16, 16}}, {"seed", 1}};
    REQUIRE_NOTHROW(scene_from_json(good));

    nlohmann::json missing = good;
    missing.erase("fps");
    try {
        scene_from_json(missing);
        FAIL("expected spec error");
    } catch (const SpecError& e) {
        REQUIRE(e.field_path == "fps");
    }

    nlohmann::json badbox = good;
    badbox["object_box"] = {8, 8, 16};
    REQUIRE_THROWS_AS(scene_from_json(badbox), SpecError);

    nlohmann::json overlap = good;
    overlap["on_intervals"] = {{5, 20}, {10, 30}};
    REQUIRE_THROWS_AS(scene_from_json(overlap), SpecError);
}

TEST_CASE("synth writes the video and sidecar") {
    SynthScene scene;
    scene.meta = VideoMeta{64, 48, 12, 30};
    scene.object_box = Box{40, 8, 16, 16};
    scene.on_intervals = {{10, 20}};
    scene.seed = 2;
    const std::string video = testutil::temp_path("scene.rgv");
    const std::string labels = testutil::temp_path("scene.labels.json");
    synth_scene(scene, video, labels);

    auto [meta, frames] = read_video(video);
    REQUIRE(meta.frame_count == 30);
    std::ifstream in(labels);
    const auto truth = nlohmann::json::parse(in);
    REQUIRE(truth["object_box"].size() == 4);
}
