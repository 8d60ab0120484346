#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "vehnet/objects.hpp"

namespace vehnet {

struct TileCount {
    std::string tile_id;
    int ground_truth = 0;
    int predicted = 0;
    /// |pred - gt| / gt; absent when gt == 0 (absolute count stands in).
    std::optional<double> relative_error;
};

struct CountReport {
    std::vector<TileCount> tiles;
    std::optional<double> mean_relative_error;  // over tiles with gt > 0
};

int count_instances(const std::vector<ObjectInstance>& instances);

/// (tile id, ground truth, predicted) per tile.
CountReport counting_report(const std::vector<std::tuple<std::string, int, int>>& per_tile);

/// Real-valued density grid; max-normalized to 1 when any instance exists.
struct HeatMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> values;

    HeatMap() = default;
    HeatMap(std::size_t h, std::size_t w) : height(h), width(w), values(h * w, 0.0f) {}
    float& at(std::size_t y, std::size_t x) { return values[y * width + x]; }
    float at(std::size_t y, std::size_t x) const { return values[y * width + x]; }
};

/// Sum of isotropic Gaussian kernels centered at the instance centroids,
/// truncated at 3*sigma. `normalize` rescales the maximum to 1; the raw
/// surface supports cross-tile comparison.
HeatMap density_heatmap(const std::vector<std::pair<double, double>>& centroids,
                        std::size_t height, std::size_t width, double sigma,
                        bool normalize = true);

}  // namespace vehnet
