#include "vehnet/tiling.hpp"

#include <stdexcept>
#include <string>

namespace vehnet {

namespace {

std::vector<std::size_t> axis_positions(std::size_t dim, std::size_t window, std::size_t stride) {
    std::vector<std::size_t> pos;
    for (std::size_t p = 0; p + window <= dim; p += stride) pos.push_back(p);
    if (pos.back() + window < dim) pos.push_back(dim - window);  // edge clamp
    return pos;
}

}  // namespace

TileGrid make_grid(std::size_t tile_height, std::size_t tile_width, std::size_t window,
                   std::size_t stride) {
    if (window == 0 || stride == 0) throw std::invalid_argument("make_grid: window and stride must be > 0");
    if (window > tile_height || window > tile_width) {
        throw std::invalid_argument("make_grid: window " + std::to_string(window) +
                                    " exceeds tile " + std::to_string(tile_height) + "x" +
                                    std::to_string(tile_width));
    }
    TileGrid grid;
    grid.tile_height = tile_height;
    grid.tile_width = tile_width;
    grid.window = window;
    grid.stride = stride;
    grid.ys = axis_positions(tile_height, window, stride);
    grid.xs = axis_positions(tile_width, window, stride);
    return grid;
}

StitchAccumulator::StitchAccumulator(std::size_t classes, std::size_t height, std::size_t width)
    : classes_(classes), height_(height), width_(width),
      prob_sum_(classes * height * width, 0.0f), coverage_(height * width, 0) {}

void StitchAccumulator::add(std::size_t y0, std::size_t x0, const SemanticMap& window_map) {
    if (window_map.class_count() != classes_) {
        throw std::invalid_argument("stitch: window map has " +
                                    std::to_string(window_map.class_count()) + " classes, expected " +
                                    std::to_string(classes_));
    }
    const std::size_t wh = window_map.height, ww = window_map.width;
    if (y0 + wh > height_ || x0 + ww > width_) {
        throw std::invalid_argument("stitch: window does not fit inside the tile");
    }
    for (std::size_t k = 0; k < classes_; ++k) {
        for (std::size_t y = 0; y < wh; ++y) {
            float* dst = prob_sum_.data() + (k * height_ + y0 + y) * width_ + x0;
            const float* src = window_map.prob.data() + (k * wh + y) * ww;
            for (std::size_t x = 0; x < ww; ++x) dst[x] += src[x];
        }
    }
    for (std::size_t y = 0; y < wh; ++y) {
        std::uint32_t* cov = coverage_.data() + (y0 + y) * width_ + x0;
        for (std::size_t x = 0; x < ww; ++x) ++cov[x];
    }
}

SemanticMap StitchAccumulator::finalize(std::vector<std::string> class_list) const {
    if (class_list.size() != classes_) {
        throw std::invalid_argument("stitch: class list size does not match accumulator");
    }
    SemanticMap out(std::move(class_list), height_, width_);
    for (std::size_t i = 0; i < height_ * width_; ++i) {
        if (coverage_[i] == 0) {
            throw std::runtime_error("stitch: pixel " + std::to_string(i % width_) + "," +
                                     std::to_string(i / width_) + " has no covering window");
        }
    }
    for (std::size_t k = 0; k < classes_; ++k) {
        const float* src = prob_sum_.data() + k * height_ * width_;
        float* dst = out.prob.data() + k * height_ * width_;
        for (std::size_t i = 0; i < height_ * width_; ++i)
            dst[i] = src[i] / static_cast<float>(coverage_[i]);
    }
    return out;
}

SemanticMap stitch(const TileGrid& grid, const std::vector<SemanticMap>& window_maps) {
    if (window_maps.size() != grid.count()) {
        throw std::invalid_argument("stitch: " + std::to_string(window_maps.size()) +
                                    " window maps for " + std::to_string(grid.count()) +
                                    " grid positions");
    }
    const auto pos = grid.positions();
    StitchAccumulator acc(window_maps.front().class_count(), grid.tile_height, grid.tile_width);
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (window_maps[i].height != grid.window || window_maps[i].width != grid.window) {
            throw std::invalid_argument("stitch: window map " + std::to_string(i) +
                                        " is not window-sized");
        }
        acc.add(pos[i].first, pos[i].second, window_maps[i]);
    }
    return acc.finalize(window_maps.front().class_list);
}

ImageU8 crop(const ImageU8& image, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
    if (y0 + h > image.height || x0 + w > image.width) {
        throw std::invalid_argument("crop: rectangle leaves the image");
    }
    ImageU8 out(h, w, image.channels);
    for (std::size_t y = 0; y < h; ++y) {
        const std::uint8_t* src = &image.pixels[((y0 + y) * image.width + x0) * image.channels];
        std::uint8_t* dst = &out.pixels[y * w * image.channels];
        std::copy(src, src + w * image.channels, dst);
    }
    return out;
}

LabelMap crop(const LabelMap& map, std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) {
    if (y0 + h > map.height || x0 + w > map.width) {
        throw std::invalid_argument("crop: rectangle leaves the label map");
    }
    LabelMap out(h, w);
    for (std::size_t y = 0; y < h; ++y) {
        const std::uint8_t* src = &map.labels[(y0 + y) * map.width + x0];
        std::copy(src, src + w, &out.labels[y * w]);
    }
    return out;
}

std::vector<std::pair<ImageU8, LabelMap>> extract_training_windows(const ImageU8& tile,
                                                                   const LabelMap& label_map,
                                                                   std::size_t window,
                                                                   std::size_t stride) {
    if (tile.height != label_map.height || tile.width != label_map.width) {
        throw std::invalid_argument("extract_training_windows: tile and label map sizes differ");
    }
    const TileGrid grid = make_grid(tile.height, tile.width, window, stride);
    std::vector<std::pair<ImageU8, LabelMap>> out;
    out.reserve(grid.count());
    for (const auto& [y, x] : grid.positions()) {
        out.emplace_back(crop(tile, y, x, window, window), crop(label_map, y, x, window, window));
    }
    return out;
}

}  // namespace vehnet
