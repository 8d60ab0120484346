#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "vehnet/analytics.hpp"

using namespace vehnet;

TEST_CASE("instance counting") {
    CHECK(count_instances({}) == 0);
    std::vector<ObjectInstance> five(5);
    CHECK(count_instances(five) == 5);
}

TEST_CASE("counting report on the reference tile counts") {
    // five Potsdam testing tiles: gt and predicted instance counts
    const std::vector<std::tuple<std::string, int, int>> tiles = {
        {"2_11", 110, 115}, {"7_12", 351, 342}, {"3_11", 168, 182},
        {"5_12", 428, 435}, {"7_10", 253, 257},
    };
    const CountReport report = counting_report(tiles);
    REQUIRE(report.tiles.size() == 5);
    CHECK(*report.tiles[0].relative_error == doctest::Approx(5.0 / 110.0));   // 4.55%
    CHECK(*report.tiles[1].relative_error == doctest::Approx(9.0 / 351.0));   // 2.56%
    CHECK(*report.tiles[2].relative_error == doctest::Approx(14.0 / 168.0));  // 8.33%
    CHECK(*report.tiles[3].relative_error == doctest::Approx(7.0 / 428.0));   // 1.64%
    CHECK(*report.tiles[4].relative_error == doctest::Approx(4.0 / 253.0));   // 1.58%
    REQUIRE(report.mean_relative_error.has_value());
    CHECK(*report.mean_relative_error == doctest::Approx(0.0373).epsilon(0.01));
    CHECK(*report.mean_relative_error < 0.04);
}

TEST_CASE("counting report edge cases") {
    const CountReport exact = counting_report({{"a", 10, 10}, {"b", 3, 3}});
    CHECK(*exact.mean_relative_error == doctest::Approx(0.0));

    const CountReport single = counting_report({{"t", 100, 110}});
    CHECK(*single.tiles[0].relative_error == doctest::Approx(0.10));

    // gt = 0: relative error undefined, absolute count reported instead
    const CountReport zero = counting_report({{"empty", 0, 7}});
    CHECK_FALSE(zero.tiles[0].relative_error.has_value());
    CHECK(zero.tiles[0].predicted == 7);
    CHECK_FALSE(zero.mean_relative_error.has_value());
}

TEST_CASE("mean equals the arithmetic mean of per-tile errors") {
    std::mt19937 rng(3);
    std::vector<std::tuple<std::string, int, int>> tiles;
    for (int i = 0; i < 20; ++i) {
        tiles.emplace_back("t" + std::to_string(i), 10 + static_cast<int>(rng() % 100),
                           static_cast<int>(rng() % 120));
    }
    const CountReport report = counting_report(tiles);
    double sum = 0.0;
    for (const TileCount& t : report.tiles) sum += *t.relative_error;
    CHECK(*report.mean_relative_error == doctest::Approx(sum / 20.0).epsilon(1e-12));
}

TEST_CASE("density heat map") {
    const HeatMap empty = density_heatmap({}, 32, 32, 4.0);
    for (float v : empty.values) CHECK(v == 0.0f);

    // single centroid: global maximum at the centroid cell, normalized to 1
    const HeatMap one = density_heatmap({{10.0, 12.0}}, 32, 32, 3.0);
    CHECK(one.at(12, 10) == doctest::Approx(1.0f));
    float mx = 0.0f;
    for (float v : one.values) mx = std::max(mx, v);
    CHECK(mx == doctest::Approx(1.0f));

    // two centroids 10 sigma apart: equal maxima (3-sigma truncation keeps
    // them independent)
    const double sigma = 3.0;
    const HeatMap two = density_heatmap({{10.0, 20.0}, {40.0, 20.0}}, 40, 64, sigma);
    CHECK(two.at(20, 10) == doctest::Approx(1.0f).epsilon(1e-6));
    CHECK(two.at(20, 40) == doctest::Approx(1.0f).epsilon(1e-6));

    // values stay within [0, 1] after normalization
    for (float v : two.values) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }

    CHECK_THROWS_AS(density_heatmap({{1.0, 1.0}}, 8, 8, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(density_heatmap({{100.0, 1.0}}, 8, 8, 2.0), std::invalid_argument);
}

TEST_CASE("heat map is permutation-invariant and translation-equivariant") {
    std::mt19937 rng(9);
    // continuous coordinates: grid-valued centroids can land exactly on the
    // 3-sigma truncation boundary, where translated rounding flips inclusion
    std::uniform_real_distribution<double> coord(8.0, 38.0);
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < 8; ++i) {
        pts.emplace_back(coord(rng), coord(rng));
    }
    const HeatMap a = density_heatmap(pts, 64, 64, 2.5);
    std::vector<std::pair<double, double>> shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const HeatMap b = density_heatmap(shuffled, 64, 64, 2.5);
    for (std::size_t i = 0; i < a.values.size(); ++i)
        REQUIRE(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-6));

    // translate all centroids by (5, 3); compare away from the borders
    std::vector<std::pair<double, double>> moved;
    for (auto [x, y] : pts) moved.emplace_back(x + 5.0, y + 3.0);
    const HeatMap c = density_heatmap(moved, 64, 64, 2.5);
    for (std::size_t y = 12; y < 52; ++y)
        for (std::size_t x = 14; x < 52; ++x)
            REQUIRE(c.at(y, x) == doctest::Approx(a.at(y - 3, x - 5)).epsilon(1e-4));
}
