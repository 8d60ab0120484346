#pragma once

#include <array>
#include <string>
#include <vector>

#include "vehnet/image.hpp"

namespace vehnet::io {

/// Bijective class name <-> RGB mapping for color-encoded label images.
struct LabelColorMap {
    struct Entry {
        std::string name;
        std::array<std::uint8_t, 3> color;
    };
    std::vector<Entry> entries;

    /// ISPRS color convention for the Potsdam classes.
    static LabelColorMap potsdam();

    std::vector<std::string> class_names() const;
    int index_of(const std::string& name) const;
    void validate() const;  // throws unless name<->color is a bijection
};

/// Unknown colors raise an error naming the offending RGB and pixel location.
LabelMap decode_label_image(const ImageU8& rgb, const LabelColorMap& colors);

ImageU8 encode_label_image(const LabelMap& labels, const LabelColorMap& colors);

LabelMap read_label_png(const std::string& path, const LabelColorMap& colors);
void write_label_png(const std::string& path, const LabelMap& labels, const LabelColorMap& colors);

/// Index-encoded variant: an 8-bit grayscale PNG whose values are class
/// indices, with 255 reserved for ignored pixels.
LabelMap read_label_png_indexed(const std::string& path, std::size_t class_count);
void write_label_png_indexed(const std::string& path, const LabelMap& labels);

}  // namespace vehnet::io
