#include "vehnet/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace vehnet {

int count_instances(const std::vector<ObjectInstance>& instances) {
    return static_cast<int>(instances.size());
}

CountReport counting_report(const std::vector<std::tuple<std::string, int, int>>& per_tile) {
    CountReport report;
    double sum = 0.0;
    std::size_t with_gt = 0;
    for (const auto& [tile, gt, pred] : per_tile) {
        if (gt < 0 || pred < 0) throw std::invalid_argument("counting_report: negative count");
        TileCount t;
        t.tile_id = tile;
        t.ground_truth = gt;
        t.predicted = pred;
        if (gt > 0) {
            t.relative_error = std::abs(pred - gt) / static_cast<double>(gt);
            sum += *t.relative_error;
            ++with_gt;
        }
        report.tiles.push_back(std::move(t));
    }
    if (with_gt > 0) report.mean_relative_error = sum / static_cast<double>(with_gt);
    return report;
}

HeatMap density_heatmap(const std::vector<std::pair<double, double>>& centroids,
                        std::size_t height, std::size_t width, double sigma, bool normalize) {
    if (sigma <= 0.0) throw std::invalid_argument("density_heatmap: sigma must be > 0");
    HeatMap map(height, width);
    const double radius = 3.0 * sigma;
    const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

    for (const auto& [cx, cy] : centroids) {
        if (cx < 0 || cy < 0 || cx >= static_cast<double>(width) ||
            cy >= static_cast<double>(height)) {
            throw std::invalid_argument("density_heatmap: centroid outside the tile");
        }
        const long y0 = std::max(0L, static_cast<long>(std::floor(cy - radius)));
        const long y1 = std::min(static_cast<long>(height) - 1,
                                 static_cast<long>(std::ceil(cy + radius)));
        const long x0 = std::max(0L, static_cast<long>(std::floor(cx - radius)));
        const long x1 = std::min(static_cast<long>(width) - 1,
                                 static_cast<long>(std::ceil(cx + radius)));
        for (long y = y0; y <= y1; ++y) {
            for (long x = x0; x <= x1; ++x) {
                const double dx = static_cast<double>(x) - cx;
                const double dy = static_cast<double>(y) - cy;
                const double d2 = dx * dx + dy * dy;
                if (d2 > radius * radius) continue;
                map.at(y, x) += static_cast<float>(std::exp(-d2 * inv_two_sigma2));
            }
        }
    }

    if (normalize && !centroids.empty()) {
        float mx = 0.0f;
        for (float v : map.values) mx = std::max(mx, v);
        if (mx > 0.0f) {
            for (float& v : map.values) v /= mx;
        }
    }
    return map;
}

}  // namespace vehnet
