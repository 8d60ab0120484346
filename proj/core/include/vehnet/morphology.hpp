#pragma once

#include <cstdint>
#include <vector>

#include "vehnet/image.hpp"

namespace vehnet {

struct BinaryMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> bits;  // nonzero = foreground

    BinaryMask() = default;
    BinaryMask(std::size_t h, std::size_t w) : height(h), width(w), bits(h * w, 0) {}

    std::uint8_t& at(std::size_t y, std::size_t x) { return bits[y * width + x]; }
    std::uint8_t at(std::size_t y, std::size_t x) const { return bits[y * width + x]; }
    bool set(std::size_t y, std::size_t x) const { return bits[y * width + x] != 0; }

    std::size_t count() const {
        std::size_t n = 0;
        for (std::uint8_t b : bits) n += (b != 0);
        return n;
    }
    bool operator==(const BinaryMask& other) const {
        if (height != other.height || width != other.width) return false;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if ((bits[i] != 0) != (other.bits[i] != 0)) return false;
        return true;
    }
};

/// Odd-sized binary kernel with its origin at the center; the origin cell
/// must be set.
struct StructuringElement {
    int size = 3;
    std::vector<std::uint8_t> cells;

    static StructuringElement square(int n);

    bool cell(int dy, int dx) const {  // dy, dx in [-size/2, size/2]
        const int half = size / 2;
        return cells[static_cast<std::size_t>(dy + half) * size + (dx + half)] != 0;
    }
    void validate() const;
};

/// Erosion with out-of-bounds neighborhoods treated as background: a pixel
/// survives only if every SE cell lands on foreground inside the mask.
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);

/// Erosion then dilation with the same element.
BinaryMask opening(const BinaryMask& mask, const StructuringElement& se);

}  // namespace vehnet
