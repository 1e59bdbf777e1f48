#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "aeromon/image.hpp"

namespace aeromon {

struct AgmmConfig {
    int kmax = 5;
    int history = 500;
    double var_threshold = 16.0;    // squared-distance gate, (p-mean)^2 < gate * var
    double background_ratio = 0.9;  // cumulative-weight cut for the background set
    double var_init = 225.0;
    double var_min = 4.0;
    double var_max = 5625.0;        // 75^2
    double prune_ct = 0.05;         // Zivkovic's negative weight prior
};

// Per-pixel adaptive mixture of <= kmax Gaussians over gray values. Emits a
// {0,255} foreground mask; stateful, one frame stream per model.
class MixtureModel {
public:
    MixtureModel(int width, int height, AgmmConfig cfg = {})
        : cfg_(cfg), width_(width), height_(height) {
        if (width <= 0 || height <= 0) throw std::invalid_argument("bad model dimensions");
        if (cfg_.kmax < 1 || cfg_.kmax > kSlots) throw std::invalid_argument("kmax must be in [1,5]");
        reset();
    }

    const AgmmConfig& config() const { return cfg_; }
    int width() const { return width_; }
    int height() const { return height_; }
    std::uint64_t frames_seen() const { return frames_seen_; }

    // Back to the cold state; configuration is preserved.
    void reset() {
        modes_.assign(static_cast<std::size_t>(width_) * height_ * kSlots, Mode{});
        counts_.assign(static_cast<std::size_t>(width_) * height_, 0);
        frames_seen_ = 0;
    }

    // One update step: match, adapt, emit. Mask value 255 marks foreground.
    GrayImage update(const GrayImage& frame) {
        if (frame.width != width_ || frame.height != height_)
            throw DimensionMismatchError("frame does not match background model dimensions");
        ++frames_seen_;
        const float alpha = static_cast<float>(
            std::max(1.0 / static_cast<double>(frames_seen_), 1.0 / cfg_.history));
        const float prune = alpha * static_cast<float>(cfg_.prune_ct);
        GrayImage mask(width_, height_);

        const std::size_t n = static_cast<std::size_t>(width_) * height_;
        for (std::size_t p = 0; p < n; ++p) {
            Mode* m = &modes_[p * kSlots];
            int count = counts_[p];
            const float value = frame.pixels[p];

            // Settled single-mode pixels take a short path: the weight
            // normalizes back to exactly 1 and the mode is the background.
            if (count == 1) {
                const float d = value - m[0].mean;
                if (d * d < cfg_.var_threshold * m[0].var) {
                    m[0].mean += alpha * d;
                    m[0].var = std::clamp(m[0].var + alpha * (d * d - m[0].var),
                                          static_cast<float>(cfg_.var_min),
                                          static_cast<float>(cfg_.var_max));
                    m[0].weight = 1.0f;
                    mask.pixels[p] = 0.0f;
                    continue;
                }
            }

            // Nearest component passing the squared-distance gate.
            int match = -1;
            float best = 0.0f;
            for (int k = 0; k < count; ++k) {
                const float d = value - m[k].mean;
                const float d2 = d * d;
                if (d2 < cfg_.var_threshold * m[k].var && (match < 0 || d2 < best)) {
                    match = k;
                    best = d2;
                }
            }

            bool foreground = true;
            if (match >= 0) {
                // Background set: descending weights until the cumulative sum
                // crosses background_ratio (crossing component included).
                float cum = 0.0f;
                for (int k = 0; k < count; ++k) {
                    if (k == match) { foreground = false; break; }
                    cum += m[k].weight;
                    if (cum > cfg_.background_ratio) break;
                }
            }

            // Weight decay with the negative prior; matched component adapts.
            float total = 0.0f;
            int kept = 0;
            for (int k = 0; k < count; ++k) {
                float w = m[k].weight - alpha * m[k].weight - prune;
                if (k == match) {
                    w += alpha;
                    const float d = value - m[k].mean;
                    m[k].mean += alpha * d;
                    float v = m[k].var + alpha * (d * d - m[k].var);
                    m[k].var = std::clamp(v, static_cast<float>(cfg_.var_min),
                                          static_cast<float>(cfg_.var_max));
                }
                if (w > 0.0f) {
                    m[kept] = m[k];
                    m[kept].weight = w;
                    total += w;
                    ++kept;
                }
            }
            count = kept;

            if (match < 0) {
                if (count < cfg_.kmax) {
                    ++count;
                } else {
                    total -= m[count - 1].weight;  // weakest slot is evicted
                }
                m[count - 1] = Mode{alpha, value, static_cast<float>(cfg_.var_init)};
                total += alpha;
            }

            if (total > 0.0f) {
                const float inv = 1.0f / total;
                for (int k = 0; k < count; ++k) m[k].weight *= inv;
            }
            // Keep descending weight order; count is tiny.
            for (int k = 1; k < count; ++k) {
                Mode key = m[k];
                int j = k - 1;
                while (j >= 0 && m[j].weight < key.weight) {
                    m[j + 1] = m[j];
                    --j;
                }
                m[j + 1] = key;
            }
            counts_[p] = static_cast<std::uint8_t>(count);
            mask.pixels[p] = foreground ? 255.0f : 0.0f;
        }
        return mask;
    }

    // Test hook: per-pixel weights (first counts() entries meaningful).
    std::vector<float> weights_at(int x, int y) const {
        const std::size_t p = static_cast<std::size_t>(y) * width_ + x;
        std::vector<float> out;
        for (int k = 0; k < counts_[p]; ++k) out.push_back(modes_[p * kSlots + k].weight);
        return out;
    }

private:
    static constexpr int kSlots = 5;

    struct Mode {
        float weight = 0.0f;
        float mean = 0.0f;
        float var = 0.0f;
    };

    AgmmConfig cfg_;
    int width_;
    int height_;
    std::uint64_t frames_seen_ = 0;
    std::vector<Mode> modes_;
    std::vector<std::uint8_t> counts_;
};

}  // namespace aeromon
