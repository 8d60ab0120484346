#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vehnet/image.hpp"
#include "vehnet/objects.hpp"

namespace vehnet::synth {

/// Ordered class palette used by generated label maps: the Potsdam
/// segmentation classes plus clutter.
std::vector<std::string> scene_palette();

/// Vehicle classes drawn by the generator (Potsdam-4 taxonomy names).
std::vector<std::string> scene_vehicle_classes();

struct SceneSpec {
    std::uint64_t seed = 1;
    std::size_t height = 256;
    std::size_t width = 256;
    int min_vehicles = 6;
    int max_vehicles = 12;
    int min_vehicle_side = 10;  // long side, px
    int max_vehicle_side = 20;
    int min_separation = 4;  // px between vehicle hulls
    double noise_sigma = 8.0;  // additive Gaussian pixel noise, 0..255 scale
    int clutter_blobs = 2;

    void validate() const;
};

struct Scene {
    ImageU8 image;                         // RGB
    LabelMap labels;                       // indices into scene_palette()
    std::vector<ObjectInstance> instances; // label = vehicle class name
};

/// Fully deterministic given spec.seed. Vehicles are rotated rectangles with
/// class-specific aspect and color over textured background regions; the
/// label map and the instance records agree with the rendered pixels. Throws
/// if the separation constraint cannot be met after bounded retries.
Scene generate_scene(const SceneSpec& spec);

struct DatasetSplit {
    std::vector<int> train, val, test;  // scene indices
};

/// Seeded shuffle, then 70/10/20 by scene. n_scenes must be >= 10.
DatasetSplit split_dataset(std::size_t n_scenes, std::uint64_t seed);

struct SynthDataset {
    std::vector<Scene> scenes;
    DatasetSplit split;
};

SynthDataset generate_dataset(const SceneSpec& spec, std::size_t n_scenes);

}  // namespace vehnet::synth
