#include "vehnet/io/label_codec.hpp"

#include <map>
#include <set>
#include <stdexcept>

#include "vehnet/io/png.hpp"

namespace vehnet::io {

LabelColorMap LabelColorMap::potsdam() {
    return {{
        {"impervious_surface", {255, 255, 255}},
        {"building", {0, 0, 255}},
        {"tree", {0, 255, 0}},
        {"low_vegetation", {0, 255, 255}},
        {"car", {255, 255, 0}},
        {"clutter", {255, 0, 0}},
    }};
}

std::vector<std::string> LabelColorMap::class_names() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const Entry& e : entries) out.push_back(e.name);
    return out;
}

int LabelColorMap::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].name == name) return static_cast<int>(i);
    return -1;
}

void LabelColorMap::validate() const {
    std::set<std::string> names;
    std::set<std::array<std::uint8_t, 3>> colors;
    for (const Entry& e : entries) {
        if (!names.insert(e.name).second)
            throw std::invalid_argument("label colors: duplicate name '" + e.name + "'");
        if (!colors.insert(e.color).second)
            throw std::invalid_argument("label colors: duplicate color for '" + e.name + "'");
    }
}

LabelMap decode_label_image(const ImageU8& rgb, const LabelColorMap& colors) {
    colors.validate();
    if (rgb.channels != 3) throw std::invalid_argument("decode_label_image: expected RGB input");
    std::map<std::array<std::uint8_t, 3>, std::uint8_t> lut;
    for (std::size_t i = 0; i < colors.entries.size(); ++i) {
        lut[colors.entries[i].color] = static_cast<std::uint8_t>(i);
    }
    LabelMap out(rgb.height, rgb.width);
    for (std::size_t y = 0; y < rgb.height; ++y) {
        for (std::size_t x = 0; x < rgb.width; ++x) {
            const std::array<std::uint8_t, 3> c{rgb.at(y, x, 0), rgb.at(y, x, 1), rgb.at(y, x, 2)};
            auto it = lut.find(c);
            if (it == lut.end()) {
                throw std::runtime_error(
                    "label image: unknown color (" + std::to_string(c[0]) + "," +
                    std::to_string(c[1]) + "," + std::to_string(c[2]) + ") at pixel (" +
                    std::to_string(x) + "," + std::to_string(y) + ")");
            }
            out.at(y, x) = it->second;
        }
    }
    return out;
}

ImageU8 encode_label_image(const LabelMap& labels, const LabelColorMap& colors) {
    colors.validate();
    ImageU8 out(labels.height, labels.width, 3);
    for (std::size_t y = 0; y < labels.height; ++y) {
        for (std::size_t x = 0; x < labels.width; ++x) {
            const std::uint8_t lab = labels.at(y, x);
            if (lab >= colors.entries.size()) {
                throw std::invalid_argument("encode_label_image: label index " +
                                            std::to_string(lab) + " has no color");
            }
            const auto& c = colors.entries[lab].color;
            out.at(y, x, 0) = c[0];
            out.at(y, x, 1) = c[1];
            out.at(y, x, 2) = c[2];
        }
    }
    return out;
}

LabelMap read_label_png(const std::string& path, const LabelColorMap& colors) {
    return decode_label_image(read_png_rgb8(path), colors);
}

void write_label_png(const std::string& path, const LabelMap& labels,
                     const LabelColorMap& colors) {
    write_png_rgb8(path, encode_label_image(labels, colors));
}

LabelMap read_label_png_indexed(const std::string& path, std::size_t class_count) {
    const ImageU8 gray = read_png_gray8(path);
    LabelMap out(gray.height, gray.width);
    for (std::size_t i = 0; i < gray.pixels.size(); ++i) {
        const std::uint8_t v = gray.pixels[i];
        if (v != LabelMap::kIgnore && v >= class_count) {
            throw std::runtime_error("label image '" + path + "': index " + std::to_string(v) +
                                     " at pixel (" + std::to_string(i % gray.width) + "," +
                                     std::to_string(i / gray.width) + ") outside " +
                                     std::to_string(class_count) + " classes");
        }
        out.labels[i] = v;
    }
    return out;
}

void write_label_png_indexed(const std::string& path, const LabelMap& labels) {
    ImageU8 gray(labels.height, labels.width, 1);
    gray.pixels = labels.labels;
    write_png_gray8(path, gray);
}

}  // namespace vehnet::io
