#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "aeromon/core.hpp"

namespace aeromon {

// Per-frame motion feature over time.
struct DistSeries {
    std::vector<std::uint64_t> frames;
    std::vector<double> dist;

    std::size_t size() const { return dist.size(); }
    void push(std::uint64_t frame, double d) {
        if (!frames.empty() && frame <= frames.back())
            throw std::invalid_argument("frame indices must be strictly increasing");
        frames.push_back(frame);
        dist.push_back(d);
    }
};

struct FeaturePoint {
    double dist = 0.0;
    double ewma = 0.0;
    int label = -1;  // -1 unlabeled, 0 off, 1 on
};

struct EwmaParams {
    double alpha = 0.0;   // 2 / (s + 1)
    int window = 1;       // trailing window length, one second of frames

    static EwmaParams from_fps(int fps, int window_override = 0) {
        if (fps < 1) throw std::invalid_argument("fps must be >= 1");
        EwmaParams p;
        const int s = window_override > 0 ? window_override : fps;
        p.window = s;
        p.alpha = 2.0 / (s + 1.0);
        return p;
    }
};

// Weighted average over the trailing window ending at position `at`; weights
// (1-alpha)^k with k = 0 at the newest sample, normalized over the window.
// Windows at the start of the series truncate.
inline double ewma_window(const DistSeries& series, const EwmaParams& params, std::size_t at) {
    if (series.size() == 0) throw std::invalid_argument("empty series");
    if (at >= series.size()) throw std::invalid_argument("position past end of series");
    const std::size_t len = std::min<std::size_t>(params.window, at + 1);
    const double q = 1.0 - params.alpha;
    double num = 0.0, den = 0.0, wk = 1.0;
    for (std::size_t k = 0; k < len; ++k) {
        num += wk * series.dist[at - k];
        den += wk;
        wk *= q;
    }
    return num / den;
}

// One 2-D point per frame; the time index is dropped.
inline std::vector<FeaturePoint> build_dataset(const DistSeries& series, const EwmaParams& params) {
    if (series.size() <= static_cast<std::size_t>(params.window))
        throw std::invalid_argument("series shorter than the smoothing window");
    std::vector<FeaturePoint> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i)
        out.push_back(FeaturePoint{series.dist[i], ewma_window(series, params, i), -1});
    return out;
}

// ---------------------------------------------------------------------------
// 2-class k-means, k-means++ seeding, Lloyd iterations. Ten restarts keep the
// lowest inertia.
// ---------------------------------------------------------------------------

struct KMeans2Result {
    std::array<std::pair<double, double>, 2> centroids{};
    std::vector<int> labels;
    double inertia = 0.0;
    int iterations = 0;
    std::vector<double> inertia_trace;  // per Lloyd iteration of the winning restart
};

namespace detail {

inline double sqdist(const FeaturePoint& p, const std::pair<double, double>& c) {
    const double dx = p.dist - c.first;
    const double dy = p.ewma - c.second;
    return dx * dx + dy * dy;
}

struct LloydRun {
    std::array<std::pair<double, double>, 2> centroids{};
    std::vector<int> labels;
    double inertia = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::vector<double> trace;
};

inline LloydRun lloyd(const std::vector<FeaturePoint>& pts,
                      std::array<std::pair<double, double>, 2> centroids, int max_iter,
                      double tol) {
    LloydRun run;
    run.centroids = centroids;
    run.labels.assign(pts.size(), 0);
    for (int it = 0; it < max_iter; ++it) {
        double inertia = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d0 = sqdist(pts[i], run.centroids[0]);
            const double d1 = sqdist(pts[i], run.centroids[1]);
            run.labels[i] = d1 < d0 ? 1 : 0;  // ties go to the lower index
            inertia += std::min(d0, d1);
        }
        run.trace.push_back(inertia);
        run.inertia = inertia;
        run.iterations = it + 1;

        std::array<double, 2> sx{}, sy{};
        std::array<std::size_t, 2> n{};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            sx[run.labels[i]] += pts[i].dist;
            sy[run.labels[i]] += pts[i].ewma;
            ++n[run.labels[i]];
        }
        std::array<std::pair<double, double>, 2> next = run.centroids;
        for (int c = 0; c < 2; ++c)
            if (n[c]) next[c] = {sx[c] / n[c], sy[c] / n[c]};
        // An empty cluster restarts at the point farthest from the other one.
        for (int c = 0; c < 2; ++c) {
            if (n[c]) continue;
            std::size_t far = 0;
            double best = -1.0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const double d = sqdist(pts[i], next[1 - c]);
                if (d > best) { best = d; far = i; }
            }
            next[c] = {pts[far].dist, pts[far].ewma};
        }
        const double move = std::sqrt(std::max(sqdist({next[0].first, next[0].second}, run.centroids[0]),
                                               sqdist({next[1].first, next[1].second}, run.centroids[1])));
        run.centroids = next;
        if (move < tol) break;
    }
    // Final assignment against the settled centroids.
    double inertia = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double d0 = sqdist(pts[i], run.centroids[0]);
        const double d1 = sqdist(pts[i], run.centroids[1]);
        run.labels[i] = d1 < d0 ? 1 : 0;
        inertia += std::min(d0, d1);
    }
    run.trace.push_back(inertia);
    run.inertia = inertia;
    return run;
}

}  // namespace detail

inline KMeans2Result kmeans2(const std::vector<FeaturePoint>& pts, std::uint64_t seed,
                             int restarts = 10, int max_iter = 300, double tol = 1e-6) {
    if (pts.size() < 2) throw std::invalid_argument("need at least two points");
    bool distinct = false;
    for (std::size_t i = 1; i < pts.size() && !distinct; ++i)
        distinct = pts[i].dist != pts[0].dist || pts[i].ewma != pts[0].ewma;
    if (!distinct) throw DegenerateDataError("degenerate clustering: all points identical");

    // Tiny unstructured sets are where Lloyd sticks in local optima, and also
    // where restarts cost nothing.
    if (pts.size() <= 16) restarts = std::max(restarts, 50);

    Rng rng(seed ? seed : 1);
    detail::LloydRun best;
    for (int r = 0; r < restarts; ++r) {
        // k-means++: first uniform, second weighted by squared distance.
        std::array<std::pair<double, double>, 2> init{};
        const std::size_t first = static_cast<std::size_t>(rng.uniform_int(pts.size()));
        init[0] = {pts[first].dist, pts[first].ewma};
        double total = 0.0;
        std::vector<double> d2(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            d2[i] = detail::sqdist(pts[i], init[0]);
            total += d2[i];
        }
        // Weighted choice among points at nonzero distance (such points exist,
        // the all-identical case was rejected above).
        double target = rng.uniform() * total;
        std::size_t second = pts.size();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (d2[i] <= 0.0) continue;
            if (second == pts.size()) second = i;  // fallback: first eligible
            target -= d2[i];
            if (target <= 0.0) { second = i; break; }
        }
        init[1] = {pts[second].dist, pts[second].ewma};

        detail::LloydRun run = detail::lloyd(pts, init, max_iter, tol);
        if (run.inertia < best.inertia) best = std::move(run);
    }

    KMeans2Result out;
    out.centroids = best.centroids;
    out.labels = std::move(best.labels);
    out.inertia = best.inertia;
    out.iterations = best.iterations;
    out.inertia_trace = std::move(best.trace);
    return out;
}

// Cluster farther from the origin becomes label 1 (machine on).
inline std::vector<FeaturePoint> label_by_origin(const KMeans2Result& km,
                                                 const std::vector<FeaturePoint>& pts) {
    const double n0 = std::hypot(km.centroids[0].first, km.centroids[0].second);
    const double n1 = std::hypot(km.centroids[1].first, km.centroids[1].second);
    if (std::abs(n0 - n1) <= 1e-12 * std::max({n0, n1, 1.0}))
        throw DegenerateDataError("indistinguishable states: centroid norms equal");
    const int far_cluster = n1 > n0 ? 1 : 0;
    std::vector<FeaturePoint> out = pts;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].label = km.labels[i] == far_cluster ? 1 : 0;
    return out;
}

// count(label 1) / count(label 0); the caller rejects training outside
// [0.2, 5.0]. Empty classes return the 0 / +inf sentinels.
inline double balance_check(const std::vector<FeaturePoint>& labeled) {
    std::size_t c0 = 0, c1 = 0;
    for (const auto& p : labeled) {
        if (p.label == 0) ++c0;
        else if (p.label == 1) ++c1;
        else throw std::invalid_argument("balance_check needs labeled points");
    }
    if (c0 == 0) return c1 == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(c1) / static_cast<double>(c0);
}

inline bool balance_acceptable(double ratio) { return ratio >= 0.2 && ratio <= 5.0; }

// |N_negative - N_openframe| / N_frames; meaningful when the training video
// changes state exactly once.
inline double class_coefficient(const std::vector<FeaturePoint>& labeled,
                                std::uint64_t open_frame, std::uint64_t n_frames) {
    if (n_frames == 0) throw std::invalid_argument("empty video");
    std::int64_t negatives = 0;
    for (const auto& p : labeled)
        if (p.label == 0) ++negatives;
    const std::int64_t diff = negatives - static_cast<std::int64_t>(open_frame);
    return static_cast<double>(diff < 0 ? -diff : diff) / static_cast<double>(n_frames);
}

}  // namespace aeromon
