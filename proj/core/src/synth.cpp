#include "vehnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace vehnet::synth {

namespace {

constexpr std::uint8_t kImpervious = 0;
constexpr std::uint8_t kBuilding = 1;
constexpr std::uint8_t kTree = 2;
constexpr std::uint8_t kLowVegetation = 3;
constexpr std::uint8_t kCar = 4;
constexpr std::uint8_t kClutter = 5;

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr Rgb kLowVegColor{105, 155, 80};
constexpr Rgb kTreeColor{40, 90, 45};
constexpr Rgb kRoadColor{120, 120, 125};
constexpr Rgb kBuildingColor{165, 90, 80};
constexpr Rgb kClutterColor{200, 60, 160};

struct VehicleStyle {
    const char* name;
    double min_aspect, max_aspect;  // short side / long side
    Rgb color;
};

// colors and aspects are deliberately separable so a small patch net can
// learn the taxonomy from desk-scale data
constexpr VehicleStyle kVehicleStyles[] = {
    {"car", 0.48, 0.58, {200, 40, 40}},
    {"van", 0.50, 0.60, {230, 230, 235}},
    {"truck", 0.38, 0.48, {45, 45, 60}},
    {"pick_up", 0.44, 0.54, {210, 140, 60}},
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void paint(ImageU8& img, LabelMap& labels, std::size_t y, std::size_t x, Rgb color,
           std::uint8_t label) {
    img.at(y, x, 0) = color.r;
    img.at(y, x, 1) = color.g;
    img.at(y, x, 2) = color.b;
    labels.at(y, x) = label;
}

void fill_rect(ImageU8& img, LabelMap& labels, long y0, long x0, long y1, long x1, Rgb color,
               std::uint8_t label) {
    y0 = std::max(0L, y0);
    x0 = std::max(0L, x0);
    y1 = std::min(static_cast<long>(img.height) - 1, y1);
    x1 = std::min(static_cast<long>(img.width) - 1, x1);
    for (long y = y0; y <= y1; ++y)
        for (long x = x0; x <= x1; ++x) paint(img, labels, y, x, color, label);
}

}  // namespace

std::vector<std::string> scene_palette() {
    return {"impervious_surface", "building", "tree", "low_vegetation", "car", "clutter"};
}

std::vector<std::string> scene_vehicle_classes() {
    return {"car", "van", "truck", "pick_up"};
}

void SceneSpec::validate() const {
    if (height < 64 || width < 64) throw std::invalid_argument("scene spec: scene smaller than 64px");
    if (min_vehicles < 0 || max_vehicles < min_vehicles)
        throw std::invalid_argument("scene spec: bad vehicle count range");
    if (min_vehicle_side < 6 || max_vehicle_side < min_vehicle_side)
        throw std::invalid_argument("scene spec: bad vehicle size range");
    if (static_cast<std::size_t>(max_vehicle_side) * 2 > std::min(height, width))
        throw std::invalid_argument("scene spec: vehicles do not fit in the scene");
    if (min_separation < 0) throw std::invalid_argument("scene spec: separation must be >= 0");
    if (noise_sigma < 0.0) throw std::invalid_argument("scene spec: noise sigma must be >= 0");
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    std::mt19937 rng(static_cast<std::mt19937::result_type>(splitmix64(spec.seed)));
    const long H = static_cast<long>(spec.height), W = static_cast<long>(spec.width);

    Scene scene;
    scene.image = ImageU8(spec.height, spec.width, 3);
    scene.labels = LabelMap(spec.height, spec.width, kLowVegetation);
    for (std::size_t y = 0; y < spec.height; ++y)
        for (std::size_t x = 0; x < spec.width; ++x)
            paint(scene.image, scene.labels, y, x, kLowVegColor, kLowVegetation);

    // tree blobs
    const int n_trees = static_cast<int>((spec.height * spec.width) / 6000);
    for (int t = 0; t < n_trees; ++t) {
        const long cy = std::uniform_int_distribution<long>(0, H - 1)(rng);
        const long cx = std::uniform_int_distribution<long>(0, W - 1)(rng);
        const long r = std::uniform_int_distribution<long>(6, 14)(rng);
        for (long y = std::max(0L, cy - r); y <= std::min(H - 1, cy + r); ++y) {
            for (long x = std::max(0L, cx - r); x <= std::min(W - 1, cx + r); ++x) {
                if ((y - cy) * (y - cy) + (x - cx) * (x - cx) <= r * r)
                    paint(scene.image, scene.labels, y, x, kTreeColor, kTree);
            }
        }
    }

    // building blocks
    const int n_buildings = std::uniform_int_distribution<int>(2, 5)(rng);
    for (int b = 0; b < n_buildings; ++b) {
        const long bh = std::uniform_int_distribution<long>(24, 60)(rng);
        const long bw = std::uniform_int_distribution<long>(24, 60)(rng);
        const long y0 = std::uniform_int_distribution<long>(0, std::max(0L, H - bh - 1))(rng);
        const long x0 = std::uniform_int_distribution<long>(0, std::max(0L, W - bw - 1))(rng);
        fill_rect(scene.image, scene.labels, y0, x0, y0 + bh - 1, x0 + bw - 1, kBuildingColor,
                  kBuilding);
    }

    // one horizontal and one vertical road band
    {
        const long th = std::uniform_int_distribution<long>(24, 40)(rng);
        const long y0 = std::uniform_int_distribution<long>(0, H - th - 1)(rng);
        fill_rect(scene.image, scene.labels, y0, 0, y0 + th - 1, W - 1, kRoadColor, kImpervious);
        const long tw = std::uniform_int_distribution<long>(24, 40)(rng);
        const long x0 = std::uniform_int_distribution<long>(0, W - tw - 1)(rng);
        fill_rect(scene.image, scene.labels, 0, x0, H - 1, x0 + tw - 1, kRoadColor, kImpervious);
    }

    // clutter patches (ignored by training and scoring downstream)
    for (int c = 0; c < spec.clutter_blobs; ++c) {
        const long ch = std::uniform_int_distribution<long>(4, 10)(rng);
        const long cw = std::uniform_int_distribution<long>(4, 10)(rng);
        const long y0 = std::uniform_int_distribution<long>(0, H - ch - 1)(rng);
        const long x0 = std::uniform_int_distribution<long>(0, W - cw - 1)(rng);
        fill_rect(scene.image, scene.labels, y0, x0, y0 + ch - 1, x0 + cw - 1, kClutterColor,
                  kClutter);
    }

    // vehicles: rotated rectangles under a center-distance separation rule
    const int n_vehicles =
        std::uniform_int_distribution<int>(spec.min_vehicles, spec.max_vehicles)(rng);
    struct Placement {
        double cx, cy, radius;
    };
    std::vector<Placement> placed;

    for (int v = 0; v < n_vehicles; ++v) {
        const std::size_t style_idx =
            std::uniform_int_distribution<std::size_t>(0, std::size(kVehicleStyles) - 1)(rng);
        const VehicleStyle& style = kVehicleStyles[style_idx];
        const double long_side = std::uniform_real_distribution<double>(
            spec.min_vehicle_side, spec.max_vehicle_side)(rng);
        const double aspect =
            std::uniform_real_distribution<double>(style.min_aspect, style.max_aspect)(rng);
        const double short_side = long_side * aspect;
        const double radius = 0.5 * std::hypot(long_side, short_side);
        const double margin = radius + 2.0;

        bool ok = false;
        double cx = 0.0, cy = 0.0, angle = 0.0;
        for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
            cx = std::uniform_real_distribution<double>(margin, W - 1 - margin)(rng);
            cy = std::uniform_real_distribution<double>(margin, H - 1 - margin)(rng);
            angle = std::uniform_real_distribution<double>(0.0, 3.14159265358979)(rng);
            ok = true;
            for (const Placement& p : placed) {
                const double d = std::hypot(cx - p.cx, cy - p.cy);
                if (d < p.radius + radius + spec.min_separation) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            throw std::runtime_error("generate_scene: cannot place vehicle " + std::to_string(v) +
                                     " of " + std::to_string(n_vehicles) +
                                     " under the separation constraint");
        }
        placed.push_back({cx, cy, radius});

        const int jr = std::uniform_int_distribution<int>(-15, 15)(rng);
        const int jg = std::uniform_int_distribution<int>(-15, 15)(rng);
        const int jb = std::uniform_int_distribution<int>(-15, 15)(rng);
        const Rgb color{
            static_cast<std::uint8_t>(std::clamp(style.color.r + jr, 0, 255)),
            static_cast<std::uint8_t>(std::clamp(style.color.g + jg, 0, 255)),
            static_cast<std::uint8_t>(std::clamp(style.color.b + jb, 0, 255))};

        ObjectInstance inst;
        inst.id = v;
        inst.label = style.name;
        const double hl = long_side / 2.0, hw = short_side / 2.0;
        const double ca = std::cos(angle), sa = std::sin(angle);
        const long sy0 = static_cast<long>(std::floor(cy - radius)),
                   sy1 = static_cast<long>(std::ceil(cy + radius));
        const long sx0 = static_cast<long>(std::floor(cx - radius)),
                   sx1 = static_cast<long>(std::ceil(cx + radius));
        bool first = true;
        double sumx = 0.0, sumy = 0.0;
        for (long y = sy0; y <= sy1; ++y) {
            for (long x = sx0; x <= sx1; ++x) {
                if (y < 0 || y >= H || x < 0 || x >= W) continue;
                const double dx = static_cast<double>(x) - cx;
                const double dy = static_cast<double>(y) - cy;
                const double u = dx * ca + dy * sa;
                const double w = -dx * sa + dy * ca;
                if (std::abs(u) > hl || std::abs(w) > hw) continue;
                paint(scene.image, scene.labels, y, x, color, kCar);
                inst.pixels.push_back({static_cast<int>(x), static_cast<int>(y)});
                sumx += x;
                sumy += y;
                if (first) {
                    inst.bbox_x0 = inst.bbox_x1 = static_cast<int>(x);
                    inst.bbox_y0 = inst.bbox_y1 = static_cast<int>(y);
                    first = false;
                } else {
                    inst.bbox_x0 = std::min(inst.bbox_x0, static_cast<int>(x));
                    inst.bbox_x1 = std::max(inst.bbox_x1, static_cast<int>(x));
                    inst.bbox_y0 = std::min(inst.bbox_y0, static_cast<int>(y));
                    inst.bbox_y1 = std::max(inst.bbox_y1, static_cast<int>(y));
                }
            }
        }
        inst.area = static_cast<int>(inst.pixels.size());
        if (inst.area == 0) {
            throw std::runtime_error("generate_scene: vehicle rasterized to zero pixels");
        }
        inst.centroid_x = sumx / inst.area;
        inst.centroid_y = sumy / inst.area;
        scene.instances.push_back(std::move(inst));
    }

    // per-pixel sensor noise, single raster pass for determinism
    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (std::size_t i = 0; i < scene.image.pixels.size(); ++i) {
            const double v = static_cast<double>(scene.image.pixels[i]) + noise(rng);
            scene.image.pixels[i] =
                static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
        }
    }
    return scene;
}

DatasetSplit split_dataset(std::size_t n_scenes, std::uint64_t seed) {
    if (n_scenes < 10) throw std::invalid_argument("split_dataset: need at least 10 scenes");
    std::vector<int> order(n_scenes);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937 rng(static_cast<std::mt19937::result_type>(splitmix64(seed ^ 0x5371c3u)));
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_train = (n_scenes * 7) / 10;
    const std::size_t n_val = n_scenes / 10;
    DatasetSplit split;
    split.train.assign(order.begin(), order.begin() + n_train);
    split.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    split.test.assign(order.begin() + n_train + n_val, order.end());
    return split;
}

SynthDataset generate_dataset(const SceneSpec& spec, std::size_t n_scenes) {
    SynthDataset out;
    out.scenes.reserve(n_scenes);
    for (std::size_t i = 0; i < n_scenes; ++i) {
        SceneSpec s = spec;
        s.seed = splitmix64(spec.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
        out.scenes.push_back(generate_scene(s));
    }
    out.split = split_dataset(n_scenes, spec.seed);
    return out;
}

}  // namespace vehnet::synth
