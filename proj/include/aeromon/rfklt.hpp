#pragma once

#include <cmath>
#include <vector>

#include "aeromon/imgproc.hpp"

namespace aeromon {

// One iterative Lucas-Kanade solve at a single pyramid level.
struct LkStep {
    double dx = 0.0;
    double dy = 0.0;
    double residual = 0.0;  // final sum of squared window differences
    bool converged = false;
};

// Solves G d = b over a (2w+1)^2 window of `ref` centered at u, matching
// against `cur` sampled at u + g + d with bilinear interpolation. Iterates
// until |delta d| < 0.01 px or 30 iterations. Not converged when the gradient
// matrix is near singular or the iterate leaves the image; a reference window
// that does not fit also reports not converged rather than throwing.
inline LkStep lk_at_level(const GrayImage& ref, const GrayImage& cur, double ux, double uy,
                          double gx, double gy, int w = 7) {
    LkStep out;
    const int span = w + 1;  // +1 for central-difference gradients
    if (ux - span < 0.0 || uy - span < 0.0 || ux + span > ref.width - 1.0 ||
        uy + span > ref.height - 1.0)
        return out;

    const int win = 2 * w + 1;
    std::vector<double> patch(static_cast<std::size_t>(win) * win);
    std::vector<double> grad_x(patch.size());
    std::vector<double> grad_y(patch.size());
    double gxx = 0.0, gyy = 0.0, gxy = 0.0;
    for (int i = -w; i <= w; ++i) {
        for (int j = -w; j <= w; ++j) {
            const double px = ux + j;
            const double py = uy + i;
            const std::size_t at = static_cast<std::size_t>(i + w) * win + (j + w);
            patch[at] = sample_bilinear(ref, px, py);
            const double ix = (sample_bilinear(ref, px + 1, py) - sample_bilinear(ref, px - 1, py)) / 2.0;
            const double iy = (sample_bilinear(ref, px, py + 1) - sample_bilinear(ref, px, py - 1)) / 2.0;
            grad_x[at] = ix;
            grad_y[at] = iy;
            gxx += ix * ix;
            gyy += iy * iy;
            gxy += ix * iy;
        }
    }
    const double det = gxx * gyy - gxy * gxy;
    const double min_eig = 0.5 * (gxx + gyy - std::sqrt((gxx - gyy) * (gxx - gyy) + 4.0 * gxy * gxy));
    if (min_eig < 1e-4 * win * win || det <= 0.0) return out;  // aperture problem

    double dx = 0.0, dy = 0.0;
    bool ok = true;
    double residual = 0.0;
    for (int iter = 0; iter < 30; ++iter) {
        const double ox = ux + gx + dx;
        const double oy = uy + gy + dy;
        if (ox - w < 0.0 || oy - w < 0.0 || ox + w > cur.width - 1.0 || oy + w > cur.height - 1.0) {
            ok = false;  // iterate left the image
            break;
        }
        double bx = 0.0, by = 0.0;
        residual = 0.0;
        for (int i = -w; i <= w; ++i) {
            for (int j = -w; j <= w; ++j) {
                const std::size_t at = static_cast<std::size_t>(i + w) * win + (j + w);
                const double diff = patch[at] - sample_bilinear(cur, ox + j, oy + i);
                bx += diff * grad_x[at];
                by += diff * grad_y[at];
                residual += diff * diff;
            }
        }
        const double sx = (gyy * bx - gxy * by) / det;
        const double sy = (gxx * by - gxy * bx) / det;
        dx += sx;
        dy += sy;
        if (std::sqrt(sx * sx + sy * sy) < 0.01) break;
    }
    out.dx = dx;
    out.dy = dy;
    out.residual = residual;
    out.converged = ok;
    return out;
}

// Frozen matching target: pyramid and corners of one reference frame, never
// updated afterwards.
struct ReferenceSet {
    Pyramid pyramid;
    std::vector<Corner> corners;  // detected inside `region`, at most 5
    Box region;
    double search_radius = 0.0;   // 2 * sqrt((l/2)^2 + (h/2)^2)
    int max_level = 4;
    int window = 7;
    bool smooth = true;           // 5x5 smoothing applied before pyramids

    // `reference` is the raw gray reference frame. Levels are capped by image
    // size (every level needs dims >= 16).
    static ReferenceSet make(const GrayImage& reference, const Box& region, int levels = 4,
                             int max_corners = 5, double quality = 0.01, double min_dist = 3.0,
                             bool smooth = true) {
        if (!region.inside(reference.width, reference.height))
            throw std::invalid_argument("reference region out of bounds");
        ReferenceSet rs;
        rs.region = region;
        rs.smooth = smooth;
        rs.max_level = std::min(levels, allowed_pyramid_levels(reference.width, reference.height));
        const GrayImage base = smooth ? gaussian5x5(reference) : reference;
        rs.pyramid = build_pyramid(base, rs.max_level);
        rs.corners = shi_tomasi(base, region, max_corners, quality, min_dist);
        rs.search_radius =
            2.0 * std::sqrt(region.w * region.w / 4.0 + region.h * region.h / 4.0);
        return rs;
    }
};

struct FlowStatus {
    bool matched = false;
    double dx = 0.0;
    double dy = 0.0;
    double residual = 0.0;
};

struct FlowResult {
    std::vector<FlowStatus> corners;
};

// Guess handed from level L to level L-1: doubled because the next level has
// twice the resolution.
inline std::pair<double, double> propagate_guess(double gx, double gy, double dx, double dy) {
    return {2.0 * (gx + dx), 2.0 * (gy + dy)};
}

namespace detail {

// Coarse-to-fine descent for one corner with a given top-level guess.
inline FlowStatus descend(const Pyramid& ref_pyr, const Pyramid& cur_pyr, const Corner& c,
                          int max_level, int w, double radius, double top_gx, double top_gy) {
    double gx = top_gx, gy = top_gy;
    FlowStatus st;
    for (int level = max_level; level >= 0; --level) {
        const double scale = static_cast<double>(1 << level);
        const LkStep step =
            lk_at_level(ref_pyr.levels[level], cur_pyr.levels[level], c.x / scale, c.y / scale,
                        gx, gy, w);
        const double dx = step.converged ? step.dx : 0.0;
        const double dy = step.converged ? step.dy : 0.0;
        if (level > 0) {
            std::tie(gx, gy) = propagate_guess(gx, gy, dx, dy);
        } else {
            st.dx = gx + dx;
            st.dy = gy + dy;
            st.residual = step.residual;
            st.matched = step.converged &&
                         std::sqrt(st.dx * st.dx + st.dy * st.dy) <= radius;
        }
    }
    return st;
}

}  // namespace detail

// Matches fixed corners of a reference pyramid against a current pyramid.
// A corner is unmatched when level 0 fails to converge or the final
// displacement exceeds `radius`; a failed corner gets one retry with the
// initial guess pointed at the region center.
inline FlowResult track_corners(const Pyramid& ref_pyr, const Pyramid& cur_pyr,
                                const std::vector<Corner>& corners, const Box& region,
                                double radius, int max_level, int window = 7) {
    if (cur_pyr.levels.empty() || ref_pyr.levels.empty() ||
        cur_pyr.levels[0].width != ref_pyr.levels[0].width ||
        cur_pyr.levels[0].height != ref_pyr.levels[0].height ||
        cur_pyr.max_level() < max_level || ref_pyr.max_level() < max_level)
        throw std::invalid_argument("current pyramid does not match reference");
    FlowResult out;
    out.corners.reserve(corners.size());
    const double top_scale = static_cast<double>(1 << max_level);
    const double center_x = region.x + region.w / 2.0;
    const double center_y = region.y + region.h / 2.0;
    for (const Corner& c : corners) {
        FlowStatus st = detail::descend(ref_pyr, cur_pyr, c, max_level, window, radius, 0.0, 0.0);
        if (!st.matched) {
            const FlowStatus retry =
                detail::descend(ref_pyr, cur_pyr, c, max_level, window, radius,
                                (center_x - c.x) / top_scale, (center_y - c.y) / top_scale);
            if (retry.matched) st = retry;
        }
        out.corners.push_back(st);
    }
    return out;
}

inline FlowResult track_pyramidal(const ReferenceSet& ref, const Pyramid& cur_pyr) {
    return track_corners(ref.pyramid, cur_pyr, ref.corners, ref.region, ref.search_radius,
                         ref.max_level, ref.window);
}

inline FlowResult track_pyramidal(const ReferenceSet& ref, const GrayImage& cur) {
    if (cur.width != ref.pyramid.levels[0].width || cur.height != ref.pyramid.levels[0].height)
        throw std::invalid_argument("frame dimensions do not match reference");
    const Pyramid cur_pyr = build_pyramid(ref.smooth ? gaussian5x5(cur) : cur, ref.max_level);
    return track_pyramidal(ref, cur_pyr);
}

inline FlowResult track_pyramidal(const ReferenceSet& ref, const Frame& cur) {
    return track_pyramidal(ref, to_gray(cur));
}

// Mean Manhattan displacement over matched corners; 0 when none match.
inline double dist_feature(const FlowResult& flow) {
    double sum = 0.0;
    int matched = 0;
    for (const FlowStatus& s : flow.corners) {
        if (!s.matched) continue;
        sum += std::abs(s.dx) + std::abs(s.dy);
        ++matched;
    }
    return matched ? sum / matched : 0.0;
}

// Baseline for ablation: classic adjacent-frame KLT. Corner positions update
// to each frame's match; the per-frame feature is the displacement since the
// previous frame.
class AdjacentTracker {
public:
    AdjacentTracker(const ReferenceSet& ref)
        : positions_(ref.corners), max_level_(ref.max_level), window_(ref.window),
          radius_(ref.search_radius), smooth_(ref.smooth) {}

    // Returns the mean Manhattan step between consecutive frames.
    double feed(const GrayImage& frame) {
        Pyramid pyr = build_pyramid(smooth_ ? gaussian5x5(frame) : frame, max_level_);
        double dist = 0.0;
        if (has_prev_) {
            double sum = 0.0;
            int matched = 0;
            for (Corner& p : positions_) {
                FlowStatus st =
                    detail::descend(prev_, pyr, p, max_level_, window_, radius_, 0.0, 0.0);
                if (!st.matched) continue;
                sum += std::abs(st.dx) + std::abs(st.dy);
                ++matched;
                p.x += st.dx;
                p.y += st.dy;
            }
            dist = matched ? sum / matched : 0.0;
        }
        prev_ = std::move(pyr);
        has_prev_ = true;
        return dist;
    }

private:
    std::vector<Corner> positions_;
    Pyramid prev_;
    bool has_prev_ = false;
    int max_level_;
    int window_;
    double radius_;
    bool smooth_;
};

}  // namespace aeromon
