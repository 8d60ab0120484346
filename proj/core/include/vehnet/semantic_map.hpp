#pragma once

#include <string>
#include <vector>

#include "vehnet/image.hpp"

namespace vehnet {

/// Per-pixel class-probability volume over a named class list, stored as
/// planar float (class, y, x). Probabilities sum to 1 per pixel.
struct SemanticMap {
    std::vector<std::string> class_list;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> prob;  // class_list.size() * height * width

    SemanticMap() = default;
    SemanticMap(std::vector<std::string> classes, std::size_t h, std::size_t w)
        : class_list(std::move(classes)), height(h), width(w),
          prob(class_list.size() * h * w, 0.0f) {}

    std::size_t class_count() const { return class_list.size(); }

    float& at(std::size_t k, std::size_t y, std::size_t x) {
        return prob[(k * height + y) * width + x];
    }
    float at(std::size_t k, std::size_t y, std::size_t x) const {
        return prob[(k * height + y) * width + x];
    }

    int class_index(const std::string& name) const {
        for (std::size_t k = 0; k < class_list.size(); ++k)
            if (class_list[k] == name) return static_cast<int>(k);
        return -1;
    }

    /// Per-pixel argmax labels; ties break toward the lowest class index.
    LabelMap argmax() const {
        LabelMap out(height, width);
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                std::size_t best = 0;
                float best_p = at(0, y, x);
                for (std::size_t k = 1; k < class_list.size(); ++k) {
                    if (at(k, y, x) > best_p) {
                        best_p = at(k, y, x);
                        best = k;
                    }
                }
                out.at(y, x) = static_cast<std::uint8_t>(best);
            }
        }
        return out;
    }
};

}  // namespace vehnet
