#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace aeromon {

// ---------------------------------------------------------------------------
// Error types. Argument violations use std::invalid_argument throughout.
// ---------------------------------------------------------------------------

struct VideoFormatError : std::runtime_error {
    explicit VideoFormatError(const std::string& what) : std::runtime_error(what) {}
};

struct VideoCorruptError : std::runtime_error {
    std::uint64_t byte_offset;
    VideoCorruptError(const std::string& what, std::uint64_t offset)
        : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
          byte_offset(offset) {}
};

// Training clip produced no usable motion region.
struct NoMotionError : std::runtime_error {
    explicit NoMotionError(const std::string& what) : std::runtime_error(what) {}
};

// On/off sample ratio outside [1/5, 5].
struct ImbalanceError : std::runtime_error {
    double ratio;
    explicit ImbalanceError(double r)
        : std::runtime_error("class balance ratio " + std::to_string(r) +
                             " outside [0.2, 5.0]"),
          ratio(r) {}
};

// No candidate region yields trackable corners.
struct UntrackableError : std::runtime_error {
    explicit UntrackableError(const std::string& what) : std::runtime_error(what) {}
};

// Clustering or labeling cannot distinguish two states.
struct DegenerateDataError : std::runtime_error {
    explicit DegenerateDataError(const std::string& what) : std::runtime_error(what) {}
};

struct ConvergenceError : std::runtime_error {
    double objective;
    ConvergenceError(const std::string& what, double obj)
        : std::runtime_error(what), objective(obj) {}
};

struct DimensionMismatchError : std::runtime_error {
    explicit DimensionMismatchError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed spec file; `path` points at the offending field.
struct SpecError : std::runtime_error {
    std::string field_path;
    SpecError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), field_path(path) {}
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    int right() const { return x + w; }    // exclusive
    int bottom() const { return y + h; }   // exclusive
    bool contains(int px, int py) const {
        return px >= x && px < right() && py >= y && py < bottom();
    }
    bool inside(int width, int height) const {
        return x >= 0 && y >= 0 && w > 0 && h > 0 && right() <= width && bottom() <= height;
    }
    bool operator==(const Box&) const = default;
};

inline double iou(const Box& a, const Box& b) {
    const int ix = std::max(a.x, b.x);
    const int iy = std::max(a.y, b.y);
    const int ir = std::min(a.right(), b.right());
    const int ib = std::min(a.bottom(), b.bottom());
    if (ir <= ix || ib <= iy) return 0.0;
    const double inter = static_cast<double>(ir - ix) * (ib - iy);
    const double uni = static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// Scales a box about its center, clamped to [0,width)x[0,height).
inline Box dilate_box(const Box& b, double factor, int width, int height) {
    const double cx = b.x + b.w / 2.0;
    const double cy = b.y + b.h / 2.0;
    const double nw = b.w * factor;
    const double nh = b.h * factor;
    int x0 = static_cast<int>(std::lround(cx - nw / 2.0));
    int y0 = static_cast<int>(std::lround(cy - nh / 2.0));
    int x1 = static_cast<int>(std::lround(cx + nw / 2.0));
    int y1 = static_cast<int>(std::lround(cy + nh / 2.0));
    x0 = std::max(0, x0);
    y0 = std::max(0, y0);
    x1 = std::min(width, x1);
    y1 = std::min(height, y1);
    return Box{x0, y0, std::max(1, x1 - x0), std::max(1, y1 - y0)};
}

// Candidate or final object region: tight bbox, blob area, blob centroid and
// the frame in which the blob was observed.
struct Region {
    Box box;
    long long area = 0;
    double cx = 0.0;
    double cy = 0.0;
    std::uint64_t key_frame = 0;
};

// ---------------------------------------------------------------------------
// Seeded RNG: xorshift64* (Vigna). All randomized operations in the library
// draw from this generator so corpora reproduce for a fixed seed.
// ---------------------------------------------------------------------------

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9E3779B97F4A7C15ull) {}

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1Dull;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        return n ? next_u64() % n : 0;  // modulo bias irrelevant at our ranges
    }

    // Uniform draw from the discrete set {lo, lo+step, ..., hi}.
    double pick_step(double lo, double hi, double step) {
        if (step <= 0.0 || hi <= lo) return lo;
        const auto n = static_cast<std::uint64_t>(std::llround((hi - lo) / step)) + 1;
        return lo + step * static_cast<double>(uniform_int(n));
    }

private:
    std::uint64_t state_;
};

// splitmix64; used to derive independent substreams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------

// Rounding used when converting filtered float pixels back to 8 bit.
inline int round_half_away(double v) {
    return static_cast<int>(v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5));
}

}  // namespace aeromon
