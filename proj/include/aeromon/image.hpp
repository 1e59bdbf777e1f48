#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "aeromon/core.hpp"

namespace aeromon {

// Single-channel 8-bit frame, row major.
struct Frame {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint64_t index = 0;
    std::vector<std::uint8_t> pixels;

    Frame() = default;
    Frame(std::uint32_t w, std::uint32_t h, std::uint64_t idx = 0, std::uint8_t fill = 0)
        : width(w), height(h), index(idx), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    bool valid() const { return pixels.size() == static_cast<std::size_t>(width) * height; }
};

struct VideoMeta {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint16_t fps = 0;
    std::uint32_t frame_count = 0;

    bool valid() const { return fps >= 1 && width >= 32 && height >= 32; }
    bool operator==(const VideoMeta&) const = default;
};

// Float image for filtered intermediates.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<float> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, float fill = 0.0f)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    float& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    float at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Mask image; values are 0 or 255.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    BinaryImage() = default;
    BinaryImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

inline GrayImage to_gray(const Frame& f) {
    GrayImage g(static_cast<int>(f.width), static_cast<int>(f.height));
    for (std::size_t i = 0; i < f.pixels.size(); ++i) g.pixels[i] = f.pixels[i];
    return g;
}

// Rounds half away from zero, clamps to [0,255].
inline Frame to_frame(const GrayImage& g, std::uint64_t index = 0) {
    Frame f(static_cast<std::uint32_t>(g.width), static_cast<std::uint32_t>(g.height), index);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        const int v = round_half_away(g.pixels[i]);
        f.pixels[i] = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
    }
    return f;
}

// Bilinear sample at real-valued coordinates; caller keeps (x,y) within
// [0, width-1] x [0, height-1].
inline double sample_bilinear(const GrayImage& img, double x, double y) {
    int x0 = static_cast<int>(x);
    int y0 = static_cast<int>(y);
    if (x0 > img.width - 2) x0 = img.width - 2;
    if (y0 > img.height - 2) y0 = img.height - 2;
    if (x0 < 0) x0 = 0;
    if (y0 < 0) y0 = 0;
    const double fx = x - x0;
    const double fy = y - y0;
    const double p00 = img.at(x0, y0);
    const double p10 = img.at(x0 + 1, y0);
    const double p01 = img.at(x0, y0 + 1);
    const double p11 = img.at(x0 + 1, y0 + 1);
    return p00 * (1 - fx) * (1 - fy) + p10 * fx * (1 - fy) + p01 * (1 - fx) * fy +
           p11 * fx * fy;
}

}  // namespace aeromon
