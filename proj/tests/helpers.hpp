#pragma once

#include <filesystem>
#include <string>

#include "aeromon/image.hpp"

namespace testutil {

// Unique path under the system temp dir; removed lazily by the OS.
inline std::string temp_path(const std::string& name) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path() / "aeromon-tests";
    std::filesystem::create_directories(dir);
    return (dir / (std::to_string(++counter) + "-" + name)).string();
}

inline aeromon::Frame random_frame(std::uint32_t w, std::uint32_t h, aeromon::Rng& rng,
                                   std::uint64_t index = 0) {
    aeromon::Frame f(w, h, index);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(256));
    return f;
}

inline aeromon::GrayImage random_gray(int w, int h, aeromon::Rng& rng) {
    aeromon::GrayImage g(w, h);
    for (auto& p : g.pixels) p = static_cast<float>(rng.uniform_int(256));
    return g;
}

}  // namespace testutil
