#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "vehnet/classifier.hpp"
#include "vehnet/objects.hpp"
#include "vehnet/synth.hpp"

using namespace vehnet;
using namespace vehnet::synth;

TEST_CASE("same seed reproduces the scene bit for bit") {
    SceneSpec spec;
    spec.seed = 1234;
    spec.height = spec.width = 128;
    const Scene a = generate_scene(spec);
    const Scene b = generate_scene(spec);
    CHECK(a.image.pixels == b.image.pixels);
    CHECK(a.labels.labels == b.labels.labels);
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t i = 0; i < a.instances.size(); ++i) {
        CHECK(a.instances[i].pixels == b.instances[i].pixels);
        CHECK(a.instances[i].label == b.instances[i].label);
    }

    SceneSpec other = spec;
    other.seed = 1235;
    const Scene c = generate_scene(other);
    CHECK(a.image.pixels != c.image.pixels);
}

TEST_CASE("label maps contain only palette classes") {
    SceneSpec spec;
    spec.seed = 7;
    spec.height = spec.width = 160;
    const Scene scene = generate_scene(spec);
    const std::size_t palette_size = scene_palette().size();
    for (std::uint8_t lab : scene.labels.labels) REQUIRE(lab < palette_size);
}

TEST_CASE("instances agree with the rendered label map") {
    SceneSpec spec;
    spec.seed = 99;
    spec.height = spec.width = 192;
    spec.min_vehicles = 5;
    spec.max_vehicles = 10;
    const Scene scene = generate_scene(spec);

    const int car_index = 4;  // scene_palette position of "car"
    std::size_t car_pixels = 0;
    for (std::uint8_t lab : scene.labels.labels) car_pixels += (lab == car_index);
    std::size_t instance_pixels = 0;
    for (const ObjectInstance& inst : scene.instances) {
        instance_pixels += inst.pixels.size();
        CHECK(inst.area == static_cast<int>(inst.pixels.size()));
        CHECK(inst.area >= 32);

        // bbox is the tight hull; centroid sits inside it
        int x0 = scene.labels.width, x1 = -1, y0 = scene.labels.height, y1 = -1;
        for (const PixelCoord& p : inst.pixels) {
            REQUIRE(scene.labels.at(p.y, p.x) == car_index);
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        CHECK(inst.bbox_x0 == x0);
        CHECK(inst.bbox_x1 == x1);
        CHECK(inst.bbox_y0 == y0);
        CHECK(inst.bbox_y1 == y1);
        CHECK(inst.centroid_x >= x0);
        CHECK(inst.centroid_x <= x1);
        CHECK(inst.centroid_y >= y0);
        CHECK(inst.centroid_y <= y1);
        REQUIRE(inst.label.has_value());
        CHECK(VehicleTaxonomy::potsdam4().index_of(*inst.label) >= 0);
    }
    CHECK(instance_pixels == car_pixels);
}

TEST_CASE("separated vehicles remain distinct connected components") {
    for (std::uint64_t seed : {11ull, 22ull, 33ull, 44ull}) {
        SceneSpec spec;
        spec.seed = seed;
        spec.height = spec.width = 224;
        spec.min_vehicles = 6;
        spec.max_vehicles = 12;
        spec.min_separation = 4;  // wider than the default 3x3 opening element
        const Scene scene = generate_scene(spec);

        BinaryMask mask(scene.labels.height, scene.labels.width);
        for (std::size_t i = 0; i < mask.bits.size(); ++i)
            mask.bits[i] = scene.labels.labels[i] == 4;
        CHECK(connected_components(mask, 8).size() == scene.instances.size());
    }
}

TEST_CASE("dataset split follows 70/10/20") {
    const DatasetSplit split = split_dataset(10, 5);
    CHECK(split.train.size() == 7);
    CHECK(split.val.size() == 1);
    CHECK(split.test.size() == 2);

    const DatasetSplit big = split_dataset(20, 5);
    CHECK(big.train.size() == 14);
    CHECK(big.val.size() == 2);
    CHECK(big.test.size() == 4);

    // disjoint and covering
    std::set<int> seen;
    for (int i : split.train) seen.insert(i);
    for (int i : split.val) seen.insert(i);
    for (int i : split.test) seen.insert(i);
    CHECK(seen.size() == 10);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 9);

    // deterministic given the seed
    const DatasetSplit again = split_dataset(10, 5);
    CHECK(again.train == split.train);
    CHECK(again.test == split.test);
    const DatasetSplit other = split_dataset(10, 6);
    CHECK(other.train != split.train);

    CHECK_THROWS_AS(split_dataset(9, 5), std::invalid_argument);
}

TEST_CASE("placement failure surfaces as an error") {
    SceneSpec spec;
    spec.seed = 3;
    spec.height = spec.width = 64;
    spec.min_vehicles = 60;
    spec.max_vehicles = 60;
    spec.min_vehicle_side = 14;
    spec.max_vehicle_side = 20;
    CHECK_THROWS_AS(generate_scene(spec), std::runtime_error);
}
