#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vehnet/image.hpp"

namespace vehnet::io {

/// Decodes any 8-bit PNG to interleaved RGB (palette/gray expanded, alpha
/// stripped).
ImageU8 read_png_rgb8(const std::string& path);

ImageU8 read_png_gray8(const std::string& path);

void write_png_rgb8(const std::string& path, const ImageU8& image);

void write_png_gray8(const std::string& path, const ImageU8& image);

struct ImageU16 {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint16_t> pixels;  // single channel
};

ImageU16 read_png_gray16(const std::string& path);

void write_png_gray16(const std::string& path, const ImageU16& image);

}  // namespace vehnet::io
