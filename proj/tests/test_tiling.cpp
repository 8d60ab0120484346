#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "vehnet/tiling.hpp"

using namespace vehnet;

namespace {

SemanticMap constant_map(std::vector<std::string> classes, std::size_t h, std::size_t w,
                         const std::vector<float>& probs) {
    SemanticMap m(std::move(classes), h, w);
    for (std::size_t k = 0; k < probs.size(); ++k)
        for (std::size_t i = 0; i < h * w; ++i) m.prob[k * h * w + i] = probs[k];
    return m;
}

}  // namespace

TEST_CASE("grid enumeration examples") {
    const TileGrid g1 = make_grid(256, 256, 128, 64);
    CHECK(g1.count() == 9);
    CHECK(g1.ys == std::vector<std::size_t>{0, 64, 128});
    CHECK(g1.xs == std::vector<std::size_t>{0, 64, 128});

    const TileGrid g2 = make_grid(128, 128, 128, 32);
    CHECK(g2.count() == 1);
    CHECK(g2.positions().front() == std::pair<std::size_t, std::size_t>{0, 0});

    // 2400/128/64: 36 regular positions, then one clamped to 2272
    const TileGrid g3 = make_grid(2400, 2400, 128, 64);
    CHECK(g3.ys.size() == 37);
    CHECK(g3.ys[35] == 2240);
    CHECK(g3.ys.back() == 2272);

    // stride 32 reaches the border exactly: 72 positions, no clamp
    const TileGrid g4 = make_grid(2400, 2400, 128, 32);
    CHECK(g4.ys.size() == 72);
    CHECK(g4.ys.back() == 2272);
    CHECK(g4.count() == 72 * 72);

    CHECK_THROWS_AS(make_grid(100, 100, 128, 32), std::invalid_argument);
}

TEST_CASE("coverage is positive everywhere and interior overlap is 4") {
    const TileGrid grid = make_grid(256, 256, 128, 64);
    StitchAccumulator acc(1, 256, 256);
    SemanticMap window = constant_map({"a"}, 128, 128, {1.0f});
    for (const auto& [y, x] : grid.positions()) acc.add(y, x, window);

    for (std::size_t y = 0; y < 256; ++y)
        for (std::size_t x = 0; x < 256; ++x) REQUIRE(acc.coverage(y, x) >= 1);
    CHECK(acc.coverage(128, 128) == 4);
    CHECK(acc.coverage(0, 0) == 1);
}

TEST_CASE("random grids cover every pixel") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t window = std::uniform_int_distribution<std::size_t>(4, 40)(rng);
        const std::size_t h = window + std::uniform_int_distribution<std::size_t>(0, 90)(rng);
        const std::size_t w = window + std::uniform_int_distribution<std::size_t>(0, 90)(rng);
        const std::size_t stride = std::uniform_int_distribution<std::size_t>(1, window)(rng);

        const TileGrid grid = make_grid(h, w, window, stride);
        std::vector<int> coverage(h * w, 0);
        for (const auto& [y, x] : grid.positions())
            for (std::size_t dy = 0; dy < window; ++dy)
                for (std::size_t dx = 0; dx < window; ++dx) ++coverage[(y + dy) * w + (x + dx)];
        for (int c : coverage) REQUIRE(c >= 1);
        for (std::size_t p : grid.ys) REQUIRE(p + window <= h);
        for (std::size_t p : grid.xs) REQUIRE(p + window <= w);
    }
}

TEST_CASE("stitching averages overlapping predictions") {
    // identical constant windows stitch to the same constant
    const TileGrid grid = make_grid(256, 256, 128, 64);
    std::vector<SemanticMap> maps(grid.count(),
                                  constant_map({"a", "b"}, 128, 128, {0.25f, 0.75f}));
    const SemanticMap stitched = stitch(grid, maps);
    for (std::size_t i = 0; i < 256 * 256; ++i) {
        CHECK(stitched.prob[i] == doctest::Approx(0.25f));
        CHECK(stitched.prob[256 * 256 + i] == doctest::Approx(0.75f));
    }

    // two overlapping windows, class-A probability 1 and 0: overlap averages to 0.5
    const TileGrid two = make_grid(128, 192, 128, 64);
    REQUIRE(two.count() == 2);
    std::vector<SemanticMap> halves{constant_map({"a", "b"}, 128, 128, {1.0f, 0.0f}),
                                    constant_map({"a", "b"}, 128, 128, {0.0f, 1.0f})};
    const SemanticMap mixed = stitch(two, halves);
    CHECK(mixed.at(0, 0, 0) == doctest::Approx(1.0f));       // left-only region
    CHECK(mixed.at(0, 0, 100) == doctest::Approx(0.5f));     // overlap (64..127)
    CHECK(mixed.at(0, 0, 180) == doctest::Approx(0.0f));     // right-only region

    // per-pixel probabilities still sum to 1
    for (std::size_t x = 0; x < 192; ++x) {
        CHECK(mixed.at(0, 0, x) + mixed.at(1, 0, x) == doctest::Approx(1.0f).epsilon(1e-5));
    }

    std::vector<SemanticMap> missing(grid.count() - 1,
                                     constant_map({"a", "b"}, 128, 128, {0.5f, 0.5f}));
    CHECK_THROWS_AS(stitch(grid, missing), std::invalid_argument);
}

TEST_CASE("training window extraction cuts verbatim crops") {
    ImageU8 tile(128, 160, 3);
    LabelMap labels(128, 160);
    std::mt19937 rng(5);
    for (auto& p : tile.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
    for (auto& l : labels.labels) l = static_cast<std::uint8_t>(rng() % 5);

    const auto pairs = extract_training_windows(tile, labels, 64, 32);
    const TileGrid grid = make_grid(128, 160, 64, 32);
    REQUIRE(pairs.size() == grid.count());

    const auto pos = grid.positions();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [img, lab] = pairs[i];
        const auto& [y0, x0] = pos[i];
        REQUIRE(img.height == 64);
        REQUIRE(lab.width == 64);
        for (std::size_t y = 0; y < 64; y += 13) {
            for (std::size_t x = 0; x < 64; x += 13) {
                REQUIRE(img.at(y, x, 1) == tile.at(y0 + y, x0 + x, 1));
                REQUIRE(lab.at(y, x) == labels.at(y0 + y, x0 + x));
            }
        }
    }

    // a window-sized tile yields exactly one pair, identical to the tile
    const auto single = extract_training_windows(tile, labels, 128, 32);
    const TileGrid sgrid = make_grid(128, 160, 128, 32);
    REQUIRE(single.size() == sgrid.count());
    CHECK(single.front().first.at(5, 5, 0) == tile.at(5, 5, 0));
}
