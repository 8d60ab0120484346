#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vehnet {

/// Interleaved 8-bit image, 1 or 3 channels.
struct ImageU8 {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> pixels;

    ImageU8() = default;
    ImageU8(std::size_t h, std::size_t w, std::size_t c)
        : height(h), width(w), channels(c), pixels(h * w * c, 0) {}

    std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
        return pixels[(y * width + x) * channels + c];
    }
    std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
        return pixels[(y * width + x) * channels + c];
    }
    bool empty() const { return pixels.empty(); }
};

/// Per-pixel class indices; kIgnore marks pixels excluded from training and
/// scoring.
struct LabelMap {
    static constexpr std::uint8_t kIgnore = 255;

    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> labels;

    LabelMap() = default;
    LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = 0)
        : height(h), width(w), labels(h * w, fill) {}

    std::uint8_t& at(std::size_t y, std::size_t x) { return labels[y * width + x]; }
    std::uint8_t at(std::size_t y, std::size_t x) const { return labels[y * width + x]; }
    bool empty() const { return labels.empty(); }
};

/// Relabels by class name from one ordered class list to another. Names absent
/// from `to` (and kIgnore) become kIgnore.
LabelMap remap_labels(const LabelMap& map, const std::vector<std::string>& from,
                      const std::vector<std::string>& to);

/// Bilinear resample with center-aligned sampling and edge clamping:
/// src = (dst + 0.5) * in/out - 0.5 per axis.
ImageU8 resize_bilinear(const ImageU8& image, std::size_t out_height, std::size_t out_width);

}  // namespace vehnet
