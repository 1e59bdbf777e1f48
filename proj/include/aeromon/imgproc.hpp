#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "aeromon/image.hpp"

namespace aeromon {

// ---------------------------------------------------------------------------
// 5x5 binomial smoothing, separable (1,4,6,4,1)/16 per axis, replicate border.
// ---------------------------------------------------------------------------

namespace detail {

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

inline float binomial5(const float* p, int stride, int i, int n) {
    const int i0 = clampi(i - 2, 0, n - 1), i1 = clampi(i - 1, 0, n - 1);
    const int i3 = clampi(i + 1, 0, n - 1), i4 = clampi(i + 2, 0, n - 1);
    return (p[i0 * stride] + 4.0f * p[i1 * stride] + 6.0f * p[i * stride] +
            4.0f * p[i3 * stride] + p[i4 * stride]) *
           (1.0f / 16.0f);
}

}  // namespace detail

namespace detail {

// Vertical 5-tap pass evaluated at `rows` output rows given by row_of(y),
// reading whole rows so the traversal stays cache friendly.
template <typename RowOf>
GrayImage binomial5_vertical(const GrayImage& img, int rows, RowOf row_of) {
    GrayImage out(img.width, rows);
    for (int y = 0; y < rows; ++y) {
        const int base = row_of(y);
        const float* r0 = &img.pixels[static_cast<std::size_t>(clampi(base - 2, 0, img.height - 1)) * img.width];
        const float* r1 = &img.pixels[static_cast<std::size_t>(clampi(base - 1, 0, img.height - 1)) * img.width];
        const float* r2 = &img.pixels[static_cast<std::size_t>(base) * img.width];
        const float* r3 = &img.pixels[static_cast<std::size_t>(clampi(base + 1, 0, img.height - 1)) * img.width];
        const float* r4 = &img.pixels[static_cast<std::size_t>(clampi(base + 2, 0, img.height - 1)) * img.width];
        float* dst = &out.pixels[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x)
            dst[x] = (r0[x] + 4.0f * r1[x] + 6.0f * r2[x] + 4.0f * r3[x] + r4[x]) * (1.0f / 16.0f);
    }
    return out;
}

}  // namespace detail

inline GrayImage gaussian5x5(const GrayImage& img) {
    if (img.width < 5 || img.height < 5)
        throw std::invalid_argument("gaussian5x5 needs dimensions >= 5");
    GrayImage tmp = detail::binomial5_vertical(img, img.height, [](int y) { return y; });
    GrayImage dst(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const float* row = &tmp.pixels[static_cast<std::size_t>(y) * img.width];
        float* out = &dst.pixels[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) out[x] = detail::binomial5(row, 1, x, img.width);
    }
    return dst;
}

// ---------------------------------------------------------------------------
// Threshold; strictly greater-than.
// ---------------------------------------------------------------------------

inline BinaryImage threshold_binary(const GrayImage& img, int t) {
    if (t < 0 || t > 255) throw std::invalid_argument("threshold must be in [0,255]");
    BinaryImage out(img.width, img.height);
    const float ft = static_cast<float>(t);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        out.pixels[i] = img.pixels[i] > ft ? 255 : 0;
    return out;
}

// ---------------------------------------------------------------------------
// Morphology: 3x3 full structuring element, pixels outside the image are 0.
// ---------------------------------------------------------------------------

namespace detail {

// Separable min/max over the full 3x3 element, pixels outside the image are 0.
template <bool Erode>
BinaryImage morph3x3(const BinaryImage& in) {
    BinaryImage rows(in.width, in.height);
    for (int y = 0; y < in.height; ++y) {
        const std::uint8_t* src = &in.pixels[static_cast<std::size_t>(y) * in.width];
        std::uint8_t* dst = &rows.pixels[static_cast<std::size_t>(y) * in.width];
        for (int x = 0; x < in.width; ++x) {
            const std::uint8_t left = x > 0 ? src[x - 1] : 0;
            const std::uint8_t right = x + 1 < in.width ? src[x + 1] : 0;
            dst[x] = Erode ? (left & src[x] & right) : (left | src[x] | right);
        }
    }
    BinaryImage out(in.width, in.height);
    const std::vector<std::uint8_t> zero(in.width, 0);
    for (int y = 0; y < in.height; ++y) {
        const std::uint8_t* up = y > 0 ? &rows.pixels[static_cast<std::size_t>(y - 1) * in.width] : zero.data();
        const std::uint8_t* mid = &rows.pixels[static_cast<std::size_t>(y) * in.width];
        const std::uint8_t* down =
            y + 1 < in.height ? &rows.pixels[static_cast<std::size_t>(y + 1) * in.width] : zero.data();
        std::uint8_t* dst = &out.pixels[static_cast<std::size_t>(y) * in.width];
        for (int x = 0; x < in.width; ++x)
            dst[x] = Erode ? (up[x] & mid[x] & down[x]) : (up[x] | mid[x] | down[x]);
    }
    return out;
}

}  // namespace detail

inline BinaryImage erode3x3(const BinaryImage& in) { return detail::morph3x3<true>(in); }

inline BinaryImage dilate3x3(const BinaryImage& in) { return detail::morph3x3<false>(in); }

// Opening (kills speckle) then closing (fills pinholes), one iteration each.
inline BinaryImage morph_open_close(const BinaryImage& in) {
    BinaryImage opened = dilate3x3(erode3x3(in));
    return erode3x3(dilate3x3(opened));
}

// ---------------------------------------------------------------------------
// Connected components, 8-connectivity.
// ---------------------------------------------------------------------------

struct Blob {
    long long area = 0;
    double cx = 0.0;
    double cy = 0.0;
    Box bbox;
    int seed_x = 0;  // one member pixel, usable as a flood-fill seed
    int seed_y = 0;
};

inline std::vector<Blob> connected_blobs(const BinaryImage& bin) {
    std::vector<Blob> blobs;
    std::vector<std::uint8_t> seen(bin.pixels.size(), 0);
    std::vector<std::uint32_t> stack;
    for (int y0 = 0; y0 < bin.height; ++y0) {
        for (int x0 = 0; x0 < bin.width; ++x0) {
            const std::size_t start = static_cast<std::size_t>(y0) * bin.width + x0;
            if (!bin.pixels[start] || seen[start]) continue;
            Blob b;
            b.seed_x = x0;
            b.seed_y = y0;
            long long sx = 0, sy = 0;
            int minx = x0, maxx = x0, miny = y0, maxy = y0;
            stack.clear();
            stack.push_back(static_cast<std::uint32_t>(start));
            seen[start] = 1;
            while (!stack.empty()) {
                const std::uint32_t idx = stack.back();
                stack.pop_back();
                const int x = static_cast<int>(idx % bin.width);
                const int y = static_cast<int>(idx / bin.width);
                ++b.area;
                sx += x;
                sy += y;
                minx = std::min(minx, x); maxx = std::max(maxx, x);
                miny = std::min(miny, y); maxy = std::max(maxy, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    const int yy = y + dy;
                    if (yy < 0 || yy >= bin.height) continue;
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xx = x + dx;
                        if (xx < 0 || xx >= bin.width) continue;
                        const std::size_t nidx = static_cast<std::size_t>(yy) * bin.width + xx;
                        if (bin.pixels[nidx] && !seen[nidx]) {
                            seen[nidx] = 1;
                            stack.push_back(static_cast<std::uint32_t>(nidx));
                        }
                    }
                }
            }
            b.cx = static_cast<double>(sx) / static_cast<double>(b.area);
            b.cy = static_cast<double>(sy) / static_cast<double>(b.area);
            b.bbox = Box{minx, miny, maxx - minx + 1, maxy - miny + 1};
            blobs.push_back(b);
        }
    }
    std::sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) {
        if (a.area != b.area) return a.area > b.area;
        if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
        return a.bbox.x < b.bbox.x;
    });
    return blobs;
}

// ---------------------------------------------------------------------------
// Image pyramid: level L+1 is the 5x5-smoothed level L sampled at even
// coordinates, so dims halve (floor) per level.
// ---------------------------------------------------------------------------

struct Pyramid {
    std::vector<GrayImage> levels;  // levels[0] is full resolution

    int max_level() const { return static_cast<int>(levels.size()) - 1; }
};

// Equivalent to gaussian5x5 followed by stride-2 sampling, computed only at
// the surviving pixels.
inline GrayImage downsample_half(const GrayImage& img) {
    const int ow = img.width / 2;
    const int oh = img.height / 2;
    GrayImage rows = detail::binomial5_vertical(img, oh, [](int y) { return 2 * y; });
    GrayImage out(ow, oh);
    for (int y = 0; y < oh; ++y) {
        const float* row = &rows.pixels[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < ow; ++x) out.at(x, y) = detail::binomial5(row, 1, 2 * x, img.width);
    }
    return out;
}

// Largest level count (0-based max level, capped at 4) for which every level
// keeps both dimensions >= 16.
inline int allowed_pyramid_levels(int width, int height) {
    int level = 0;
    while (level < 4 && (width >> (level + 1)) >= 16 && (height >> (level + 1)) >= 16) ++level;
    return level;
}

inline Pyramid build_pyramid(const GrayImage& img, int max_level) {
    if (max_level < 0 || max_level > 4)
        throw std::invalid_argument("max_level must be in [0,4]");
    if ((img.width >> max_level) < 16 || (img.height >> max_level) < 16)
        throw std::invalid_argument("image too small for requested pyramid levels");
    Pyramid p;
    p.levels.reserve(static_cast<std::size_t>(max_level) + 1);
    p.levels.push_back(img);
    for (int l = 0; l < max_level; ++l) p.levels.push_back(downsample_half(p.levels.back()));
    return p;
}

// ---------------------------------------------------------------------------
// Shi-Tomasi corners: min eigenvalue of the 3x3-windowed structure tensor of
// Sobel gradients, local maxima above quality * global max, min-distance
// suppression, strongest max_corners returned.
// ---------------------------------------------------------------------------

struct Corner {
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;
};

namespace detail {

// lambda_min of [[ixx, ixy], [ixy, iyy]]
inline double min_eigenvalue(double ixx, double iyy, double ixy) {
    const double tr = ixx + iyy;
    const double det = (ixx - iyy) * (ixx - iyy) + 4.0 * ixy * ixy;
    return 0.5 * (tr - std::sqrt(det));
}

}  // namespace detail

inline std::vector<Corner> shi_tomasi(const GrayImage& img, const Box& region, int max_corners,
                                      double quality, double min_dist) {
    if (!region.inside(img.width, img.height))
        throw std::invalid_argument("corner region out of image bounds");
    if (max_corners <= 0) return {};

    // Sobel gradients; zero on the 1-px image border.
    GrayImage gx(img.width, img.height, 0.0f);
    GrayImage gy(img.width, img.height, 0.0f);
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            const float a = img.at(x - 1, y - 1), b = img.at(x, y - 1), c = img.at(x + 1, y - 1);
            const float d = img.at(x - 1, y), f = img.at(x + 1, y);
            const float g = img.at(x - 1, y + 1), h = img.at(x, y + 1), i = img.at(x + 1, y + 1);
            gx.at(x, y) = (c + 2 * f + i) - (a + 2 * d + g);
            gy.at(x, y) = (g + 2 * h + i) - (a + 2 * b + c);
        }
    }

    // Response only where the 3x3 tensor window holds valid gradients.
    const int rx0 = std::max(region.x, 2);
    const int ry0 = std::max(region.y, 2);
    const int rx1 = std::min(region.right(), img.width - 2);
    const int ry1 = std::min(region.bottom(), img.height - 2);
    if (rx0 >= rx1 || ry0 >= ry1) return {};

    GrayImage resp(img.width, img.height, 0.0f);
    double global_max = 0.0;
    for (int y = ry0; y < ry1; ++y) {
        for (int x = rx0; x < rx1; ++x) {
            double ixx = 0.0, iyy = 0.0, ixy = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const double vx = gx.at(x + dx, y + dy);
                    const double vy = gy.at(x + dx, y + dy);
                    ixx += vx * vx;
                    iyy += vy * vy;
                    ixy += vx * vy;
                }
            }
            const double r = detail::min_eigenvalue(ixx, iyy, ixy);
            resp.at(x, y) = static_cast<float>(r);
            global_max = std::max(global_max, r);
        }
    }
    if (global_max <= 0.0) return {};

    const double floor_score = quality * global_max;
    std::vector<Corner> raw;
    for (int y = ry0; y < ry1; ++y) {
        for (int x = rx0; x < rx1; ++x) {
            const float r = resp.at(x, y);
            if (r <= 0.0f || r < floor_score) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if ((dx || dy) && y + dy >= 0 && y + dy < img.height && x + dx >= 0 &&
                        x + dx < img.width && resp.at(x + dx, y + dy) > r) {
                        is_max = false;
                        break;
                    }
            if (is_max) raw.push_back(Corner{static_cast<double>(x), static_cast<double>(y), r});
        }
    }
    std::sort(raw.begin(), raw.end(), [](const Corner& a, const Corner& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    std::vector<Corner> kept;
    const double d2 = min_dist * min_dist;
    for (const Corner& c : raw) {
        bool ok = true;
        for (const Corner& k : kept) {
            const double dx = c.x - k.x, dy = c.y - k.y;
            if (dx * dx + dy * dy < d2) { ok = false; break; }
        }
        if (ok) {
            kept.push_back(c);
            if (static_cast<int>(kept.size()) == max_corners) break;
        }
    }
    return kept;
}

}  // namespace aeromon
