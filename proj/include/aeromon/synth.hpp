#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "aeromon/video_io.hpp"

namespace aeromon {

enum class BackgroundKind { flat, ripple, jitter, pedestrian };

inline const char* to_string(BackgroundKind k) {
    switch (k) {
        case BackgroundKind::flat: return "flat";
        case BackgroundKind::ripple: return "ripple";
        case BackgroundKind::jitter: return "jitter";
        case BackgroundKind::pedestrian: return "pedestrian";
    }
    return "flat";
}

// Desk-scale stand-in for a fixed surveillance scene: a static textured
// machine body at object_box, a bright animated spray (box plus an annulus
// capped well under twice the box area) while "on", and one of four
// background behaviors. The machine texture is procedural from box geometry
// only, so re-seeded renders of the same scene stay trackable from a
// reference frame captured in another render.
struct SynthScene {
    VideoMeta meta;
    Box object_box;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> on_intervals;  // [start, end)
    BackgroundKind background = BackgroundKind::flat;
    std::uint64_t seed = 1;

    void validate() const {
        if (!meta.valid()) throw SpecError("meta", "width,height >= 32 and fps >= 1 required");
        if (!object_box.inside(static_cast<int>(meta.width), static_cast<int>(meta.height)))
            throw std::invalid_argument("object_box out of frame bounds");
        std::uint32_t prev_end = 0;
        bool first = true;
        for (const auto& [a, b] : on_intervals) {
            if (a >= b) throw std::invalid_argument("empty or reversed on interval");
            if (!first && a < prev_end) throw std::invalid_argument("overlapping on intervals");
            if (b > meta.frame_count) throw std::invalid_argument("on interval past end of video");
            prev_end = b;
            first = false;
        }
    }

    bool on_at(std::uint32_t t) const {
        for (const auto& [a, b] : on_intervals)
            if (t >= a && t < b) return true;
        return false;
    }

    // Spray growth factor in (0,1]; 0 when off.
    double ramp_at(std::uint32_t t) const {
        for (const auto& [a, b] : on_intervals)
            if (t >= a && t < b) return std::min(1.0, (t - a + 1) / 8.0);
        return 0.0;
    }

    // Full-growth spray bounding box (about 1.5x the object area).
    Box spray_extent() const {
        const int mx = std::max(2, static_cast<int>(std::lround(0.12 * object_box.w)));
        const int my = std::max(2, static_cast<int>(std::lround(0.12 * object_box.h)));
        const int x0 = std::max(0, object_box.x - mx);
        const int y0 = std::max(0, object_box.y - my);
        const int x1 = std::min<int>(meta.width, object_box.right() + mx);
        const int y1 = std::min<int>(meta.height, object_box.bottom() + my);
        return Box{x0, y0, x1 - x0, y1 - y0};
    }
};

namespace detail {

inline std::uint32_t pixel_hash(std::uint32_t a, std::uint32_t b, std::uint32_t c,
                                std::uint32_t d) {
    std::uint32_t h = a * 0x9E3779B1u ^ b * 0x85EBCA77u ^ c * 0xC2B2AE3Du ^ d * 0x27D4EB2Fu;
    h ^= h >> 16;
    h *= 0x7FEB352Du;
    h ^= h >> 15;
    h *= 0x846CA68Bu;
    h ^= h >> 16;
    return h;
}

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace detail

class SceneRenderer {
public:
    explicit SceneRenderer(const SynthScene& scene) : scene_(scene) {
        scene_.validate();
        width_ = static_cast<int>(scene_.meta.width);
        height_ = static_cast<int>(scene_.meta.height);
        spray_ = scene_.spray_extent();
        spray_dx_ = std::max(4, static_cast<int>(std::lround(0.45 * scene_.object_box.w)));
        spray_dy_ = std::max(4, static_cast<int>(std::lround(0.40 * scene_.object_box.h)));

        if (scene_.background == BackgroundKind::jitter) {
            // Random walk, one-pixel steps, offsets clamped to +-2.
            jitter_.resize(scene_.meta.frame_count, {0, 0});
            Rng rng(mix_seed(scene_.seed, 0x717));
            int jx = 0, jy = 0;
            for (std::uint32_t t = 1; t < scene_.meta.frame_count; ++t) {
                jx = std::clamp(jx + static_cast<int>(rng.uniform_int(3)) - 1, -2, 2);
                jy = std::clamp(jy + static_cast<int>(rng.uniform_int(3)) - 1, -2, 2);
                jitter_[t] = {jx, jy};
            }
        }
        if (scene_.background == BackgroundKind::pedestrian) {
            const Box clear = dilate_plus(spray_, 10);
            const int bottom_y = height_ - kWalkwayH - 4;
            if (bottom_y > clear.bottom() || bottom_y + kWalkwayH <= clear.y) {
                walkway_y_ = bottom_y;
            } else if (clear.y >= 4 + kWalkwayH) {
                walkway_y_ = 4;
            } else {
                throw std::invalid_argument("pedestrian walkway cannot avoid the object region");
            }
            Rng rng(mix_seed(scene_.seed, 0x9ED));
            ped_start_ = static_cast<int>(rng.uniform_int(scene_.meta.width));
        }
    }

    const SynthScene& scene() const { return scene_; }

    // Pedestrian bounding box at frame t in content coordinates.
    Box pedestrian_at(std::uint32_t t) const {
        const int span = width_ + 2 * kPedW;
        const int px = ((ped_start_ + static_cast<int>(t * 3 / 2)) % span) - kPedW;
        return Box{px, walkway_y_ + 2, kPedW, kPedH};
    }

    Frame render(std::uint32_t t) const {
        Frame f(scene_.meta.width, scene_.meta.height, t);
        const auto [jx, jy] = scene_.background == BackgroundKind::jitter
                                  ? jitter_[t]
                                  : std::pair<int, int>{0, 0};
        const double ramp = scene_.ramp_at(t);
        const double spray_cx = scene_.object_box.x + scene_.object_box.w / 2.0;
        const double spray_cy = scene_.object_box.y + scene_.object_box.h / 2.0;
        const double spray_hw = ramp * (spray_.w / 2.0);
        const double spray_hh = ramp * (spray_.h / 2.0);
        const Box ped = scene_.background == BackgroundKind::pedestrian ? pedestrian_at(t) : Box{};
        const auto seed32 = static_cast<std::uint32_t>(scene_.seed);

        for (int y = 0; y < height_; ++y) {
            for (int x = 0; x < width_; ++x) {
                const int sx = std::clamp(x + jx, 0, width_ - 1);
                const int sy = std::clamp(y + jy, 0, height_ - 1);
                // Faint static water grain; real water is never optically flat.
                int v = kWater +
                        static_cast<int>(detail::pixel_hash(static_cast<std::uint32_t>(sx) / 5u,
                                                            static_cast<std::uint32_t>(sy) / 5u,
                                                            0x7A7Eu, 0) %
                                         11u) -
                        5;

                if (scene_.background == BackgroundKind::ripple) {
                    const double phase = ripple_phase_ + t / 50.0;
                    v += static_cast<int>(std::lround(
                        6.0 * std::sin(2.0 * M_PI * (sx / 80.0 + phase)) *
                        std::cos(2.0 * M_PI * (sy / 64.0 + 0.6 * phase))));
                } else if (scene_.background == BackgroundKind::jitter) {
                    v = patch_value(sx, sy, v);
                } else if (scene_.background == BackgroundKind::pedestrian) {
                    if (sy >= walkway_y_ && sy < walkway_y_ + kWalkwayH)
                        v = 90 + 8 * static_cast<int>(
                                     detail::pixel_hash(sx / 6u, sy / 6u, 0xA11Eu, 0) % 6u);
                    if (ped.contains(sx, sy)) v = 150;
                }

                if (scene_.object_box.contains(sx, sy)) {
                    const auto bx = static_cast<std::uint32_t>((sx - scene_.object_box.x) / 4);
                    const auto by = static_cast<std::uint32_t>((sy - scene_.object_box.y) / 4);
                    v = 20 + 15 * static_cast<int>(detail::pixel_hash(bx, by, 0xB0D7u, 0) % 13u);
                }
                if (ramp > 0.0 && std::abs(sx + 0.5 - spray_cx) <= spray_hw &&
                    std::abs(sy + 0.5 - spray_cy) <= spray_hh) {
                    // Spray: a brightened copy of the body texture, displaced
                    // by a box-scaled offset that wobbles about a pixel per
                    // frame, with a flickering minority of cells on top. The
                    // body pattern a tracker expects is present but shifted
                    // and slowly moving, so matches land a fixed distance
                    // away while the region keeps changing frame to frame.
                    const int wob_x = spray_dx_ + static_cast<int>(std::lround(
                                                      1.5 * std::sin(t * (2.0 * M_PI / 24.0))));
                    const int wob_y = spray_dy_ + static_cast<int>(std::lround(
                                                      1.5 * std::cos(t * (2.0 * M_PI / 30.0))));
                    const auto bx = static_cast<std::uint32_t>(
                        detail::floor_div(sx - wob_x - scene_.object_box.x, 4));
                    const auto by = static_cast<std::uint32_t>(
                        detail::floor_div(sy - wob_y - scene_.object_box.y, 4));
                    const bool churn =
                        detail::pixel_hash(bx, by, t * 0x51EDu + 1u, seed32) % 12u == 0u;
                    const std::uint32_t salt = churn ? t * 0xABCDu + 3u : 0xB0D7u;
                    const std::uint32_t churn_seed = churn ? seed32 : 0u;
                    v = std::min(255, 60 + 15 * static_cast<int>(detail::pixel_hash(
                                                    bx, by, salt, churn_seed) %
                                                13u));
                }

                v += static_cast<int>(detail::pixel_hash(static_cast<std::uint32_t>(x),
                                                         static_cast<std::uint32_t>(y),
                                                         t * 0x5EEDu + 7u, seed32) %
                                      5u) -
                     2;
                f.at(x, y) = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
            }
        }
        return f;
    }

private:
    static constexpr int kWater = 120;
    static constexpr int kWalkwayH = 24;
    static constexpr int kPedW = 12;
    static constexpr int kPedH = 20;

    static Box dilate_plus(const Box& b, int m) {
        return Box{b.x - m, b.y - m, b.w + 2 * m, b.h + 2 * m};
    }

    // Low-contrast static rectangles so camera shake has structure to move.
    int patch_value(int sx, int sy, int base) const {
        const std::uint32_t cellx = static_cast<std::uint32_t>(sx) / 48u;
        const std::uint32_t celly = static_cast<std::uint32_t>(sy) / 40u;
        const std::uint32_t h = detail::pixel_hash(cellx, celly, 0xFA77u, 0);
        if (h % 3u == 0u) return base + static_cast<int>(h >> 8 & 0x1Fu) - 16;
        return base;
    }

    SynthScene scene_;
    int width_ = 0;
    int height_ = 0;
    Box spray_;
    int spray_dx_ = 3;
    int spray_dy_ = 3;
    std::vector<std::pair<int, int>> jitter_;
    int walkway_y_ = 0;
    int ped_start_ = 0;
    double ripple_phase_ = 0.25;
};

inline FrameBuffer synth_video(const SynthScene& scene) {
    SceneRenderer r(scene);
    FrameBuffer fb(scene.meta);
    fb.frames.reserve(scene.meta.frame_count);
    for (std::uint32_t t = 0; t < scene.meta.frame_count; ++t) fb.frames.push_back(r.render(t));
    fb.meta_.frame_count = scene.meta.frame_count;
    return fb;
}

inline nlohmann::ordered_json ground_truth_json(const SynthScene& scene) {
    nlohmann::ordered_json intervals = nlohmann::ordered_json::array();
    for (const auto& [a, b] : scene.on_intervals) intervals.push_back({a, b});
    return nlohmann::ordered_json{
        {"on_intervals", intervals},
        {"object_box", {scene.object_box.x, scene.object_box.y, scene.object_box.w, scene.object_box.h}}};
}

// Renders to an RGV1 file plus the ground-truth sidecar.
inline void synth_scene(const SynthScene& scene, const std::string& video_path,
                        const std::string& labels_path) {
    SceneRenderer r(scene);
    VideoWriter w(video_path, scene.meta);
    for (std::uint32_t t = 0; t < scene.meta.frame_count; ++t) w.write(r.render(t));
    w.close();
    std::ofstream labels(labels_path, std::ios::trunc);
    labels << ground_truth_json(scene).dump(2) << "\n";
    if (!labels) throw VideoFormatError("cannot write labels: " + labels_path);
}

// ------------------------------- JSON parsing -------------------------------

inline SynthScene scene_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecError("$", "scene spec must be a JSON object");
    SynthScene s;
    auto need_uint = [&](const char* key) -> std::uint32_t {
        if (!j.contains(key) || !j[key].is_number_integer() || j[key].get<std::int64_t>() < 0)
            throw SpecError(key, "missing or not a non-negative integer");
        return j[key].get<std::uint32_t>();
    };
    s.meta.width = need_uint("width");
    s.meta.height = need_uint("height");
    s.meta.fps = static_cast<std::uint16_t>(need_uint("fps"));
    s.meta.frame_count = need_uint("frames");
    if (!j.contains("object_box") || !j["object_box"].is_array() || j["object_box"].size() != 4)
        throw SpecError("object_box", "expected [x, y, w, h]");
    for (int i = 0; i < 4; ++i)
        if (!j["object_box"][i].is_number_integer())
            throw SpecError("object_box[" + std::to_string(i) + "]", "expected integer");
    s.object_box = Box{j["object_box"][0].get<int>(), j["object_box"][1].get<int>(),
                       j["object_box"][2].get<int>(), j["object_box"][3].get<int>()};
    if (j.contains("on_intervals")) {
        if (!j["on_intervals"].is_array()) throw SpecError("on_intervals", "expected array of pairs");
        for (std::size_t i = 0; i < j["on_intervals"].size(); ++i) {
            const auto& iv = j["on_intervals"][i];
            const std::string path = "on_intervals[" + std::to_string(i) + "]";
            if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number_integer() ||
                !iv[1].is_number_integer() || iv[0].get<std::int64_t>() < 0 ||
                iv[1].get<std::int64_t>() < 0)
                throw SpecError(path, "expected [start, end] with non-negative integers");
            s.on_intervals.emplace_back(iv[0].get<std::uint32_t>(), iv[1].get<std::uint32_t>());
        }
    }
    if (j.contains("background")) {
        const std::string b = j["background"].is_string() ? j["background"].get<std::string>() : "";
        if (b == "flat") s.background = BackgroundKind::flat;
        else if (b == "ripple") s.background = BackgroundKind::ripple;
        else if (b == "jitter") s.background = BackgroundKind::jitter;
        else if (b == "pedestrian") s.background = BackgroundKind::pedestrian;
        else throw SpecError("background", "expected flat|ripple|jitter|pedestrian");
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw SpecError("seed", "expected integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw SpecError("$", e.what());
    }
    return s;
}

}  // namespace aeromon
