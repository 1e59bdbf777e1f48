#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "aeromon/background.hpp"
#include "aeromon/features.hpp"
#include "aeromon/rfklt.hpp"
#include "aeromon/video_io.hpp"

namespace aeromon {

// One per-frame maximum contour with its gray-difference evidence.
struct MaxContour {
    std::uint64_t frame = 0;
    Blob blob;
    double f = 0.0;  // mean (key frame - reference) over the contour pixels
};

namespace detail {

// Mean gray difference of key frame minus reference over the contour's own
// pixels, found by flooding the cleaned mask from the blob seed.
inline double f_feature(const BinaryImage& mask, const Blob& blob, const Frame& key,
                        const Frame& reference) {
    std::vector<std::uint32_t> stack;
    std::vector<std::uint8_t> seen(mask.pixels.size(), 0);
    const std::size_t start = static_cast<std::size_t>(blob.seed_y) * mask.width + blob.seed_x;
    stack.push_back(static_cast<std::uint32_t>(start));
    seen[start] = 1;
    double sum = 0.0;
    while (!stack.empty()) {
        const std::uint32_t idx = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(idx % mask.width);
        const int y = static_cast<int>(idx / mask.width);
        sum += static_cast<double>(key.at(x, y)) - static_cast<double>(reference.at(x, y));
        for (int dy = -1; dy <= 1; ++dy) {
            const int yy = y + dy;
            if (yy < 0 || yy >= mask.height) continue;
            for (int dx = -1; dx <= 1; ++dx) {
                const int xx = x + dx;
                if (xx < 0 || xx >= mask.width) continue;
                const std::size_t n = static_cast<std::size_t>(yy) * mask.width + xx;
                if (mask.pixels[n] && !seen[n]) {
                    seen[n] = 1;
                    stack.push_back(static_cast<std::uint32_t>(n));
                }
            }
        }
    }
    return sum / static_cast<double>(blob.area);
}

}  // namespace detail

// Per-frame winner of smooth -> mixture update -> threshold 240 -> open/close
// -> largest component, each scored with F against the frame-0 reference.
// Frames whose mask comes out empty contribute nothing.
template <VideoSource V>
std::vector<MaxContour> max_contours(V& video, MixtureModel& bg) {
    const VideoMeta meta = video.meta();
    if (meta.frame_count == 0) throw std::invalid_argument("empty video");
    const Frame reference = video.frame(0);
    std::vector<MaxContour> out;
    for (std::uint64_t i = 0; i < meta.frame_count; ++i) {
        const Frame raw = video.frame(i);
        const GrayImage smoothed = gaussian5x5(to_gray(raw));
        const GrayImage mask = bg.update(smoothed);
        const BinaryImage cleaned = morph_open_close(threshold_binary(mask, 240));
        std::vector<Blob> blobs = connected_blobs(cleaned);
        if (blobs.empty()) continue;
        out.push_back(
            MaxContour{i, blobs.front(), detail::f_feature(cleaned, blobs.front(), raw, reference)});
    }
    return out;
}

struct Candidate {
    Region region;
    double f = 0.0;
};

// Candidate selection: keep the top quarter by area, suppress neighbors whose
// centroids sit closer than min(width,height)/10, then keep regions whose F
// value reaches the mean of the survivors (non-strict, so a singleton always
// passes).
inline std::vector<Candidate> select_candidates(const std::vector<MaxContour>& contours,
                                                const VideoMeta& meta) {
    if (contours.empty()) return {};

    std::vector<MaxContour> sorted = contours;
    std::sort(sorted.begin(), sorted.end(), [](const MaxContour& a, const MaxContour& b) {
        if (a.blob.area != b.blob.area) return a.blob.area > b.blob.area;
        return a.frame < b.frame;
    });
    sorted.resize((sorted.size() + 3) / 4);

    const double spacing = std::min(meta.width, meta.height) / 10.0;
    std::vector<MaxContour> kept;
    for (const MaxContour& entry : sorted) {
        bool ok = true;
        for (const MaxContour& k : kept) {
            const double dx = entry.blob.cx - k.blob.cx;
            const double dy = entry.blob.cy - k.blob.cy;
            if (std::sqrt(dx * dx + dy * dy) < spacing) { ok = false; break; }
        }
        if (ok) kept.push_back(entry);
    }

    double mean_f = 0.0;
    for (const MaxContour& k : kept) mean_f += k.f;
    mean_f /= static_cast<double>(kept.size());

    std::vector<Candidate> out;
    for (const MaxContour& k : kept) {
        if (k.f < mean_f) continue;
        out.push_back(Candidate{
            Region{k.blob.bbox, k.blob.area, k.blob.cx, k.blob.cy, k.frame}, k.f});
    }
    return out;
}

struct PickOptions {
    std::uint64_t seed = 42;
    int levels = 4;         // pyramid cap used for the returned series
    int max_corners = 5;
    double quality = 0.01;
    double min_dist = 3.0;
    int window_override = 0;
};

struct PickResult {
    std::size_t chosen = 0;
    std::vector<double> cent_feature;          // NaN marks an untrackable candidate
    std::vector<std::vector<Corner>> corners;  // per candidate, in the reference frame
    std::vector<DistSeries> series;            // per candidate, at the `levels` cap
    double elapsed_ms = 0.0;
};

// Scores every candidate with the pyramid-weighted inter-class centroid gap
// of its (dist, ewma) clusters and returns the argmax. Caps above what the
// frame size supports contribute a zero gap.
template <VideoSource V>
PickResult pick_object_region(const std::vector<Candidate>& candidates, V& video,
                              const Frame& reference, const PickOptions& opts = {}) {
    if (candidates.empty()) throw std::invalid_argument("no candidates");
    const VideoMeta meta = video.meta();
    const auto t0 = std::chrono::steady_clock::now();

    const GrayImage ref_smoothed = gaussian5x5(to_gray(reference));
    const int top_cap = std::min(4, allowed_pyramid_levels(ref_smoothed.width, ref_smoothed.height));
    const Pyramid ref_pyr = build_pyramid(ref_smoothed, top_cap);

    const std::size_t n = candidates.size();
    PickResult res;
    res.cent_feature.assign(n, std::numeric_limits<double>::quiet_NaN());
    res.corners.resize(n);
    res.series.resize(n);

    // All candidates and caps share one reference pyramid; only the corner
    // sets and search radii differ.
    std::vector<double> radius(n, 0.0);
    std::vector<bool> trackable(n, false);
    for (std::size_t c = 0; c < n; ++c) {
        const Box& box = candidates[c].region.box;
        res.corners[c] =
            shi_tomasi(ref_smoothed, box, opts.max_corners, opts.quality, opts.min_dist);
        radius[c] = 2.0 * std::sqrt(box.w * box.w / 4.0 + box.h * box.h / 4.0);
        trackable[c] = !res.corners[c].empty();
    }
    if (std::none_of(trackable.begin(), trackable.end(), [](bool b) { return b; }))
        throw UntrackableError("untrackable candidates: no corners in any candidate region");

    // One pass over the video; the per-frame pyramid is shared by every
    // candidate and every cap.
    std::vector<std::vector<DistSeries>> series(n, std::vector<DistSeries>(top_cap + 1));
    for (std::uint64_t i = 0; i < meta.frame_count; ++i) {
        const Pyramid cur = build_pyramid(gaussian5x5(to_gray(video.frame(i))), top_cap);
        for (std::size_t c = 0; c < n; ++c) {
            if (!trackable[c]) continue;
            for (int cap = 0; cap <= top_cap; ++cap) {
                const FlowResult flow = track_corners(ref_pyr, cur, res.corners[c],
                                                      candidates[c].region.box, radius[c], cap);
                series[c][cap].push(i, dist_feature(flow));
            }
        }
    }

    const EwmaParams ewma = EwmaParams::from_fps(meta.fps, opts.window_override);
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_idx = n;
    for (std::size_t c = 0; c < n; ++c) {
        if (!trackable[c]) continue;
        double cent = 0.0;
        for (int cap = 0; cap <= top_cap; ++cap) {
            double diff = 0.0;
            try {
                const auto points = build_dataset(series[c][cap], ewma);
                const KMeans2Result km = kmeans2(points, mix_seed(opts.seed, c * 8 + cap));
                diff = std::abs(km.centroids[0].first - km.centroids[1].first);
            } catch (const DegenerateDataError&) {
                diff = 0.0;  // a motionless candidate has no inter-class gap
            }
            cent += diff / static_cast<double>(1 << cap);
        }
        res.cent_feature[c] = cent;
        const int keep_cap = std::min(opts.levels, top_cap);
        res.series[c] = series[c][keep_cap];
        if (cent > best) {
            best = cent;
            best_idx = c;
        }
    }
    res.chosen = best_idx;
    res.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace aeromon
