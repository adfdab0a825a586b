#include "antgen/raster.hpp"

#include "raster_oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace antgen;
using testing::example1_space;
using testing::make_dims;

namespace {

std::size_t count_value(const GeometryImage& img, float v)
{
    std::size_t n = 0;
    for (std::size_t i = 0; i < img.plane_size(); ++i)
        n += img.plane(0)[i] == v;
    return n;
}

MetalLayout bare_layout(double w, double h)
{
    MetalLayout l;
    l.width = w;
    l.height = h;
    return l;
}

}  // namespace

TEST_CASE("empty layout gives a blank 300x60 image")
{
    const GeometryImage img = rasterize(bare_layout(30, 6), 0.1);
    CHECK(img.width_px == 300);
    CHECK(img.height_px == 60);
    CHECK(count_value(img, kSubstrate) == img.plane_size());
    CHECK(img.at(1, 0, 0) == 0.0f);
    CHECK(img.at(1, 0, 299) == 1.0f);
    CHECK(img.at(2, 0, 0) == 0.0f);
    CHECK(img.at(2, 59, 0) == 1.0f);
}

TEST_CASE("full-board rectangle saturates except the port")
{
    const DesignSpace s = example1_space();
    const auto d = make_dims("full", {{1, 1}, {32, 7}});
    const AntennaModel m = assemble_model(s, d, {{10, 0}, {-1, -1}});
    const GeometryImage img = rasterize(m, 0.1);
    const std::size_t port = count_value(img, kPort);
    CHECK(port == 10 * 5);
    CHECK(count_value(img, kMetal) + port == img.plane_size());
}

TEST_CASE("unit square at 0.5 mm per pixel sets exactly four pixels")
{
    MetalLayout l = bare_layout(4, 4);
    l.metal.push_back({1, 1, 1, 1});
    const GeometryImage img = rasterize(l, 0.5);
    CHECK(count_value(img, kMetal) == 4);
    const auto oracle = testing::brute_force_plane(l, 0.5, 8, 8);
    CHECK(std::equal(oracle.begin(), oracle.end(), img.plane(0)));
    // Rows 4-5 (y in [1,2)) and columns 2-3.
    CHECK(img.at(0, 4, 2) == kMetal);
    CHECK(img.at(0, 5, 3) == kMetal);
}

TEST_CASE("property: random models match the brute-force oracle")
{
    DesignSpace s = example1_space();
    s.keepouts.push_back({0, 0, 3, 1.2});
    const auto d = testing::example1_set1();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const double res = seed % 2 ? 0.1 : 0.2;
        const MetalLayout c = clip_to_space(assemble_model(s, d, random_placement(s, d, seed)));
        const GeometryImage img = rasterize(c, res);
        const auto oracle = testing::brute_force_plane(c, res, img.width_px, img.height_px);
        REQUIRE(std::equal(oracle.begin(), oracle.end(), img.plane(0)));
        REQUIRE(rasterize(clip_to_space(c), res) == img);
    }
}

TEST_CASE("property: integer-pixel translation shifts the geometry plane")
{
    Rng rng(21);
    for (int t = 0; t < 200; ++t) {
        MetalLayout a = bare_layout(30, 6), b = bare_layout(30, 6);
        const int dx = static_cast<int>(rng.index(20)), dy = static_cast<int>(rng.index(10));
        const double w = 0.1 * (1 + rng.index(60)), h = 0.1 * (1 + rng.index(20));
        const double x = 0.1 * rng.index(100), y = 0.1 * rng.index(20);
        a.metal.push_back({x, y, w, h});
        b.metal.push_back({x + 0.1 * dx, y + 0.1 * dy, w, h});
        const GeometryImage ia = rasterize(a, 0.1), ib = rasterize(b, 0.1);
        // Compare where the shifted copy stays on the board.
        for (int r = 0; r < 60; ++r)
            for (int c = 0; c < 300; ++c) {
                const int r2 = r - dy, c2 = c + dx;
                if (r2 < 0 || c2 >= 300)
                    continue;
                REQUIRE(ia.at(0, r, c) == ib.at(0, r2, c2));
            }
    }
}

TEST_CASE("property: metal pixel area tracks clipped area within one boundary layer")
{
    Rng rng(8);
    for (int t = 0; t < 500; ++t) {
        MetalLayout l = bare_layout(30, 6);
        const Rect r{rng.uniform(0.0, 25.0), rng.uniform(0.0, 4.0), rng.uniform(0.05, 5.0), rng.uniform(0.05, 2.0)};
        l.metal.push_back(r);
        const double res = 0.1;
        const double px_area = count_value(rasterize(l, res), kMetal) * res * res;
        const double perimeter_layer = (2 * (r.w + r.h) + 4 * res) * res;
        REQUIRE(std::abs(px_area - r.area()) <= perimeter_layer);
    }
}

TEST_CASE("digests")
{
    MetalLayout l = bare_layout(30, 6);
    l.metal.push_back({2, 2, 3, 1});
    const GeometryImage a = rasterize(l, 0.1);
    CHECK(image_digest(a) == image_digest(rasterize(l, 0.1)));
    GeometryImage b = a;
    b.plane(0)[12345] = kMetal;
    CHECK(image_digest(a) != image_digest(b));
}

TEST_CASE("final example-2 layout golden digest")
{
    const GeometryImage img = rasterize(testing::example2_final_model(), 0.1);
    CHECK(img.width_px == 220);
    CHECK(img.height_px == 50);
    CHECK(image_digest(img) == "93c4d99c4c4fd043");
}

TEST_CASE("PGM round-trip and resolution errors")
{
    const DesignSpace s = example1_space();
    const auto d = testing::example1_set1();
    const GeometryImage img = rasterize(assemble_model(s, d, random_placement(s, d, 4)), 0.1);
    const auto dir = testing::temp_dir("raster_pgm");
    write_pgm(img, (dir / "a.pgm").string());
    CHECK(read_pgm((dir / "a.pgm").string(), 0.1) == img);
    CHECK_THROWS_AS(rasterize(bare_layout(30, 6), 0.7), Error);
    CHECK(pixel_count(6.0, 0.1) == 60);
}
