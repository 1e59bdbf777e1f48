#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "aeromon/video_io.hpp"

namespace aeromon {

// Leading-rows x leading-columns selection: a pixel (x,y) is affected when
// y < rows and x < cols.
struct RowColMask {
    int rows = 0;
    int cols = 0;

    static RowColMask full(const Frame& f) {
        return {static_cast<int>(f.height), static_cast<int>(f.width)};
    }
    long long area() const { return static_cast<long long>(rows) * cols; }
};

// Adds v to every masked pixel, clamped to [0,255]. v = 0 is the identity.
inline Frame apply_gray_shift(const Frame& f, int v, const RowColMask& mask) {
    Frame out = f;
    const int rows = std::min<int>(mask.rows, static_cast<int>(f.height));
    const int cols = std::min<int>(mask.cols, static_cast<int>(f.width));
    for (int y = 0; y < rows; ++y) {
        for (int x = 0; x < cols; ++x) {
            const int p = out.at(x, y) + v;
            out.at(x, y) = static_cast<std::uint8_t>(std::clamp(p, 0, 255));
        }
    }
    return out;
}

// Sets exactly round(snr * mask area) distinct masked pixels to 0 or 255
// (equal odds). A draw that matches the original value flips to the other
// extreme so the changed-pixel count is exact.
inline Frame apply_salt_pepper(const Frame& f, double snr, const RowColMask& mask,
                               std::uint64_t seed) {
    if (snr < 0.0 || snr > 0.5) throw std::invalid_argument("snr must be in [0, 0.5]");
    Frame out = f;
    const int rows = std::min<int>(mask.rows, static_cast<int>(f.height));
    const int cols = std::min<int>(mask.cols, static_cast<int>(f.width));
    const long long area = static_cast<long long>(rows) * cols;
    const auto count = static_cast<std::size_t>(std::llround(snr * static_cast<double>(area)));
    if (count == 0) return out;

    std::vector<std::uint32_t> idx(static_cast<std::size_t>(area));
    std::size_t k = 0;
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x)
            idx[k++] = static_cast<std::uint32_t>(y) * f.width + static_cast<std::uint32_t>(x);

    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {  // partial Fisher-Yates
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(idx.size() - i));
        std::swap(idx[i], idx[j]);
        std::uint8_t v = (rng.next_u64() & 1) ? 255 : 0;
        if (out.pixels[idx[i]] == v) v = static_cast<std::uint8_t>(255 - v);
        out.pixels[idx[i]] = v;
    }
    return out;
}

// A knob drawn per frame from {lo, lo+step, ..., hi}; lo == hi pins it.
struct RandRange {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;

    static RandRange constant(double v) { return {v, v, 0.0}; }
    bool is_constant() const { return hi <= lo; }
    double draw(Rng& rng) const { return is_constant() ? lo : rng.pick_step(lo, hi, step); }
};

struct AugmentSpec {
    RandRange row_ratio = RandRange::constant(1.0);
    RandRange col_ratio = RandRange::constant(1.0);
    RandRange gray_delta = RandRange::constant(0.0);
    RandRange snr = RandRange::constant(0.0);
    bool apply_to_reference = true;
    std::uint64_t seed = 1;

    void validate() const {
        auto in01 = [](const RandRange& r) { return r.lo >= 0.0 && std::max(r.lo, r.hi) <= 1.0; };
        if (!in01(row_ratio)) throw SpecError("row_ratio", "ratios must lie in [0,1]");
        if (!in01(col_ratio)) throw SpecError("col_ratio", "ratios must lie in [0,1]");
        if (snr.lo < 0.0 || std::max(snr.lo, snr.hi) > 0.5)
            throw SpecError("snr", "snr must lie in [0, 0.5]");
    }
};

// One frame of the protocol: draw ratios/delta/snr, shift then noise the
// leading-rows x leading-cols rectangle.
inline Frame augment_frame(const Frame& f, const AugmentSpec& spec, std::uint64_t frame_seed) {
    Rng rng(frame_seed);
    const double rr = spec.row_ratio.draw(rng);
    const double cr = spec.col_ratio.draw(rng);
    const int v = static_cast<int>(std::llround(spec.gray_delta.draw(rng)));
    const double snr = spec.snr.draw(rng);
    const RowColMask mask{static_cast<int>(std::llround(rr * f.height)),
                          static_cast<int>(std::llround(cr * f.width))};
    Frame out = apply_gray_shift(f, v, mask);
    return apply_salt_pepper(out, snr, mask, rng.next_u64());
}

// Streams src through the per-frame protocol. Frame 0 passes through
// untouched unless apply_to_reference is set.
template <typename Source, typename Sink>
void augment_video(Source& src, const AugmentSpec& spec, Sink&& sink) {
    spec.validate();
    const std::uint64_t n = src.meta().frame_count;
    for (std::uint64_t i = 0; i < n; ++i) {
        Frame f = src.frame(i);
        if (i > 0 || spec.apply_to_reference)
            f = augment_frame(f, spec, mix_seed(spec.seed, i));
        sink(std::move(f));
    }
}

inline void augment_video_file(const std::string& in_path, const AugmentSpec& spec,
                               const std::string& out_path) {
    VideoReader reader(in_path);
    VideoWriter writer(out_path, reader.meta());
    spec.validate();
    Frame f;
    while (reader.next(f)) {
        if (f.index > 0 || spec.apply_to_reference)
            f = augment_frame(f, spec, mix_seed(spec.seed, f.index));
        writer.write(f);
    }
    writer.close();
}

// --------------------------- JSON spec parsing ------------------------------
// A knob is either a number (constant), the string "all" (constant 1.0, masks
// only), or {"lo":..,"hi":..,"step":..}.

namespace detail {

inline RandRange parse_range(const nlohmann::json& j, const std::string& path,
                             bool allow_all) {
    if (j.is_number()) return RandRange::constant(j.get<double>());
    if (j.is_string()) {
        if (allow_all && j.get<std::string>() == "all") return RandRange::constant(1.0);
        throw SpecError(path, "expected number, range object" +
                                  std::string(allow_all ? ", or \"all\"" : ""));
    }
    if (!j.is_object()) throw SpecError(path, "expected number or range object");
    for (const char* key : {"lo", "hi"})
        if (!j.contains(key) || !j[key].is_number())
            throw SpecError(path + "." + key, "missing or non-numeric");
    RandRange r;
    r.lo = j["lo"].get<double>();
    r.hi = j["hi"].get<double>();
    r.step = j.value("step", 0.0);
    if (r.hi < r.lo) throw SpecError(path + ".hi", "hi < lo");
    if (r.hi > r.lo && r.step <= 0.0) throw SpecError(path + ".step", "step must be > 0");
    return r;
}

}  // namespace detail

inline AugmentSpec augment_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SpecError("$", "augment spec must be a JSON object");
    AugmentSpec s;
    if (j.contains("rows")) s.row_ratio = detail::parse_range(j["rows"], "rows", true);
    if (j.contains("cols")) s.col_ratio = detail::parse_range(j["cols"], "cols", true);
    if (j.contains("gray")) s.gray_delta = detail::parse_range(j["gray"], "gray", false);
    if (j.contains("snr")) s.snr = detail::parse_range(j["snr"], "snr", false);
    if (j.contains("apply_to_reference")) {
        if (!j["apply_to_reference"].is_boolean())
            throw SpecError("apply_to_reference", "expected boolean");
        s.apply_to_reference = j["apply_to_reference"].get<bool>();
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw SpecError("seed", "expected integer");
        s.seed = j["seed"].get<std::uint64_t>();
    }
    s.validate();
    return s;
}

}  // namespace aeromon
