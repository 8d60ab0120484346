#pragma once

#include <utility>
#include <vector>

#include "vehnet/image.hpp"
#include "vehnet/semantic_map.hpp"

namespace vehnet {

/// Window placement over a tile. Positions advance by `stride` per axis; when
/// the last regular position does not reach the border, one extra position
/// clamped to (dim - window) is appended so every pixel is covered.
struct TileGrid {
    std::size_t tile_height = 0;
    std::size_t tile_width = 0;
    std::size_t window = 0;
    std::size_t stride = 0;
    std::vector<std::size_t> ys;
    std::vector<std::size_t> xs;

    /// Row-major (y, x) top-left corners.
    std::vector<std::pair<std::size_t, std::size_t>> positions() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        out.reserve(ys.size() * xs.size());
        for (std::size_t y : ys)
            for (std::size_t x : xs) out.emplace_back(y, x);
        return out;
    }
    std::size_t count() const { return ys.size() * xs.size(); }
};

TileGrid make_grid(std::size_t tile_height, std::size_t tile_width, std::size_t window,
                   std::size_t stride);

/// Running per-pixel probability sums and window coverage counts for overlap
/// averaging. Windows are committed in grid order regardless of where they
/// were computed, which keeps stitching bit-reproducible.
class StitchAccumulator {
public:
    StitchAccumulator(std::size_t classes, std::size_t height, std::size_t width);

    void add(std::size_t y0, std::size_t x0, const SemanticMap& window_map);

    std::uint32_t coverage(std::size_t y, std::size_t x) const {
        return coverage_[y * width_ + x];
    }

    /// prob_sum / coverage per pixel; throws if any pixel is uncovered.
    SemanticMap finalize(std::vector<std::string> class_list) const;

private:
    std::size_t classes_, height_, width_;
    std::vector<float> prob_sum_;
    std::vector<std::uint32_t> coverage_;
};

/// Per-pixel mean of all covering windows' probabilities; window_maps are
/// ordered like grid.positions().
SemanticMap stitch(const TileGrid& grid, const std::vector<SemanticMap>& window_maps);

/// Image/label pairs cut at the grid positions of (tile, window, stride).
std::vector<std::pair<ImageU8, LabelMap>> extract_training_windows(const ImageU8& tile,
                                                                   const LabelMap& label_map,
                                                                   std::size_t window = 128,
                                                                   std::size_t stride = 32);

ImageU8 crop(const ImageU8& image, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w);
LabelMap crop(const LabelMap& map, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w);

}  // namespace vehnet
