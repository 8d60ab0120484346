#include "vehnet/image.hpp"

#include <algorithm>
#include <cmath>

namespace vehnet {

LabelMap remap_labels(const LabelMap& map, const std::vector<std::string>& from,
                      const std::vector<std::string>& to) {
    std::vector<std::uint8_t> lut(from.size(), LabelMap::kIgnore);
    for (std::size_t i = 0; i < from.size(); ++i) {
        for (std::size_t j = 0; j < to.size(); ++j) {
            if (from[i] == to[j]) {
                lut[i] = static_cast<std::uint8_t>(j);
                break;
            }
        }
    }
    LabelMap out(map.height, map.width);
    for (std::size_t i = 0; i < map.labels.size(); ++i) {
        const std::uint8_t lab = map.labels[i];
        if (lab == LabelMap::kIgnore) {
            out.labels[i] = LabelMap::kIgnore;
        } else if (lab >= from.size()) {
            throw std::invalid_argument("remap_labels: index " + std::to_string(lab) +
                                        " outside source class list");
        } else {
            out.labels[i] = lut[lab];
        }
    }
    return out;
}

ImageU8 resize_bilinear(const ImageU8& image, std::size_t out_height, std::size_t out_width) {
    if (image.empty()) throw std::invalid_argument("resize: empty image");
    if (out_height == 0 || out_width == 0) throw std::invalid_argument("resize: empty output");

    ImageU8 out(out_height, out_width, image.channels);
    const double sy = static_cast<double>(image.height) / static_cast<double>(out_height);
    const double sx = static_cast<double>(image.width) / static_cast<double>(out_width);

    for (std::size_t oy = 0; oy < out_height; ++oy) {
        const double fy = (static_cast<double>(oy) + 0.5) * sy - 0.5;
        const long y0 = static_cast<long>(std::floor(fy));
        const double ty = fy - static_cast<double>(y0);
        const std::size_t ya = static_cast<std::size_t>(std::clamp<long>(y0, 0, image.height - 1));
        const std::size_t yb =
            static_cast<std::size_t>(std::clamp<long>(y0 + 1, 0, image.height - 1));
        for (std::size_t ox = 0; ox < out_width; ++ox) {
            const double fx = (static_cast<double>(ox) + 0.5) * sx - 0.5;
            const long x0 = static_cast<long>(std::floor(fx));
            const double tx = fx - static_cast<double>(x0);
            const std::size_t xa =
                static_cast<std::size_t>(std::clamp<long>(x0, 0, image.width - 1));
            const std::size_t xb =
                static_cast<std::size_t>(std::clamp<long>(x0 + 1, 0, image.width - 1));
            for (std::size_t c = 0; c < image.channels; ++c) {
                const double top = (1.0 - tx) * image.at(ya, xa, c) + tx * image.at(ya, xb, c);
                const double bot = (1.0 - tx) * image.at(yb, xa, c) + tx * image.at(yb, xb, c);
                const double v = (1.0 - ty) * top + ty * bot;
                out.at(oy, ox, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
            }
        }
    }
    return out;
}

}  // namespace vehnet
