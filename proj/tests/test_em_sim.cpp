#include "antgen/em_sim.hpp"

#include "raster_oracle.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>

using namespace antgen;
using testing::example1_space;
using testing::make_dims;

namespace {

/// Reference longest path: BFS over the brute-force plane from port pixels in
/// the bottom row, through port and metal pixels.
double oracle_path(const MetalLayout& l, double res)
{
    const int w = static_cast<int>(std::lround(l.width / res));
    const int h = static_cast<int>(std::lround(l.height / res));
    const auto g = testing::brute_force_plane(l, res, w, h);
    std::vector<int> d(g.size(), -1);
    std::queue<std::pair<int, int>> q;
    for (int c = 0; c < w; ++c)
        if (g[(h - 1) * w + c] == 0.5f) {
            d[(h - 1) * w + c] = 0;
            q.push({h - 1, c});
        }
    int best = -1;
    bool metal = false;
    while (!q.empty()) {
        auto [r, c] = q.front();
        q.pop();
        best = std::max(best, d[r * w + c]);
        metal = metal || g[r * w + c] == 1.0f;
        const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            const int r2 = r + dr[k], c2 = c + dc[k];
            if (r2 < 0 || r2 >= h || c2 < 0 || c2 >= w || g[r2 * w + c2] == 0.0f || d[r2 * w + c2] >= 0)
                continue;
            d[r2 * w + c2] = d[r * w + c] + 1;
            q.push({r2, c2});
        }
    }
    return metal ? (best + 1) * res : 0.0;
}

/// Lower-edge anchored feed strip with one horizontal arm along the top.
AntennaModel l_shape(double arm_width)
{
    DesignSpace s = example1_space();
    s.anchor_mode = AnchorMode::LowerEdge;
    s.anchor_y = 0.5;
    const auto d = make_dims("l", {{1, 5}, {arm_width, 0.5}});
    return assemble_model(s, d, {{0, 0}, {0, 5}});
}

}  // namespace

TEST_CASE("L-shaped strip path length and first resonance")
{
    const AntennaModel m = l_shape(20);
    const MetalLayout c = clip_to_space(m);
    // From the bottom of the feed (col 9) up 54 rows and right 190 columns, plus one pixel.
    CHECK(longest_path_mm(c, 0.1) == doctest::Approx(24.5).epsilon(1e-12));
    CHECK(oracle_path(c, 0.1) == doctest::Approx(24.5).epsilon(1e-12));

    const OracleConfig cfg;
    const double f1 = kSpeedOfLight / (4.0 * 24.5 * std::sqrt(2.0));
    const auto fk = resonances(24.5, cfg);
    REQUIRE(fk.size() == 3);
    CHECK(fk[0] == doctest::Approx(f1).epsilon(1e-14));
    CHECK(fk[1] == doctest::Approx(3 * f1).epsilon(1e-14));

    const auto grid = default_grid();
    const FrequencyResponse r = SurrogateSimulator(cfg).simulate({m, grid});
    // Deepest sample below the second harmonic.
    std::size_t lo = 0;
    for (std::size_t i = 0; i < grid.size() && grid[i] < 2 * f1; ++i)
        if (r.s11_db[i] < r.s11_db[lo])
            lo = i;
    CHECK(std::abs(grid[lo] - f1) <= grid[1] - grid[0]);
    CHECK(r.s11_db[lo] < -15.0);
}

TEST_CASE("straight strip of 15.615 mm")
{
    DesignSpace s;
    s.width = 1.0;
    s.height = 16.0;
    s.anchor_mode = AnchorMode::LowerEdge;
    s.anchor_y = 0.5;
    const AntennaModel m = assemble_model(s, make_dims("strip", {{0.5, 15.115}}), {{0.25, 0}});
    OracleConfig cfg;
    cfg.resolution = 0.005;
    const double L = longest_path_mm(clip_to_space(m), cfg.resolution);
    CHECK(L == doctest::Approx(15.615).epsilon(1e-12));
    CHECK(oracle_path(clip_to_space(m), cfg.resolution) == doctest::Approx(L).epsilon(1e-12));

    const double f1 = kSpeedOfLight / (4.0 * L * std::sqrt(2.0));
    CHECK(f1 == doctest::Approx(3.394).epsilon(1e-3));
    const auto grid = default_grid();
    const auto r = surrogate_simulate({m, grid}, cfg);
    const auto lo = std::min_element(r.s11_db.begin(), r.s11_db.end());
    CHECK(std::abs(grid[lo - r.s11_db.begin()] - f1) <= grid[1] - grid[0]);
}

TEST_CASE("property: path length agrees with the BFS oracle")
{
    DesignSpace s = example1_space();
    const auto d = testing::example1_set1();
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const MetalLayout c = clip_to_space(assemble_model(s, d, random_placement(s, d, seed)));
        REQUIRE(longest_path_mm(c, 0.2) == oracle_path(c, 0.2));
    }
}

TEST_CASE("surrogate contract")
{
    const OracleConfig cfg;
    const auto grid = default_grid();
    const SurrogateSimulator sim(cfg);
    const AntennaModel m = l_shape(12);
    CHECK(sim.simulate({m, grid}) == sim.simulate({m, grid}));

    SUBCASE("no radiator reflects everything")
    {
        const auto flat = surrogate_response(0.0, grid, cfg);
        for (double v : flat.s11_db)
            CHECK(v == 0.0);
        CHECK(score(flat, wifi_dual_band_target()).value == 6.0);

        MetalLayout l;
        l.width = 30;
        l.height = 6;
        l.port = {0, 0, 1, 0.5};
        l.metal.push_back({10, 3, 5, 1});
        CHECK(longest_path_mm(l, 0.1) == 0.0);
    }

    SUBCASE("doubling the path halves every resonance")
    {
        const auto a = resonances(11.3, cfg), b = resonances(22.6, cfg);
        for (std::size_t k = 0; k < a.size(); ++k)
            CHECK(b[k] == a[k] / 2);
    }

    SUBCASE("final example-2 layout simulates on the full grid")
    {
        const auto r = sim.simulate({testing::example2_final_model(), grid});
        CHECK(r.freqs == grid);
        for (double v : r.s11_db)
            CHECK(std::isfinite(v));
    }

    CHECK_THROWS_AS(sim.simulate({m, {2.0}}), Error);
    CHECK_THROWS_AS(SurrogateSimulator(OracleConfig{0.5}), Error);
}

TEST_CASE("property: surrogate bounded and monotone in path length")
{
    Rng rng(77);
    const auto grid = default_grid();
    for (int t = 0; t < 500; ++t) {
        OracleConfig cfg;
        cfg.q_factor = rng.uniform(1.0, 80.0);
        cfg.depth_db = rng.uniform(1.0, 60.0);
        cfg.eps_eff = rng.uniform(1.0, 5.0);
        const double L = rng.uniform(1.0, 60.0);
        const double L2 = L * rng.uniform(1.001, 2.0);
        const auto r = surrogate_response(L, grid, cfg);
        for (double v : r.s11_db) {
            REQUIRE(v <= 0.0);
            REQUIRE(v >= -40.0);
        }
        const auto a = resonances(L, cfg), b = resonances(L2, cfg);
        for (std::size_t k = 0; k < a.size(); ++k)
            REQUIRE(b[k] < a[k]);
    }
}

TEST_CASE("Touchstone formats")
{
    const double half_db = -6.020599913279624;
    auto one = [](const std::string& text) { return parse_touchstone(text); };

    const auto db = one("# GHZ S DB R 50\n2.4 -8.0 30\n");
    CHECK(db.freqs[0] == 2.4);
    CHECK(db.s11_db[0] == -8.0);

    CHECK(std::abs(one("# GHZ S MA R 50\n2.4 0.5 10\n").s11_db[0] - half_db) < 1e-9);
    CHECK(std::abs(one("# GHZ S RI R 50\n2.4 0.3 0.4\n").s11_db[0] - half_db) < 1e-9);

    const auto mhz = one("! comment\n# MHZ S MA R 50\n2400 0.5 0 ! inline\n2500 0.25 0\n");
    CHECK(mhz.freqs[0] == doctest::Approx(2.4).epsilon(1e-15));
    CHECK(mhz.s11_db[1] == doctest::Approx(2 * half_db).epsilon(1e-12));
    CHECK(one("# HZ S DB R 50\n2.4e9 -3 0\n").freqs[0] == doctest::Approx(2.4).epsilon(1e-15));

    CHECK_THROWS_AS(one("# GHZ S XX R 50\n2.4 -8 0\n"), Error);
    CHECK_THROWS_AS(one("# GHZ Z DB R 50\n2.4 -8 0\n"), Error);
    CHECK_THROWS_AS(one("# GHZ S DB R 50\n2.5 -8 0\n2.4 -8 0\n"), Error);
    CHECK_THROWS_AS(one("# GHZ S DB R 50\n2.4 -8 0 -9 0 -9 0 -9 0\n"), Error);
    CHECK_THROWS_AS(one("2.4 -8 0\n"), Error);
}

TEST_CASE("Touchstone DB round-trip is bit-stable")
{
    const auto r = SurrogateSimulator().simulate({l_shape(17.3), default_grid()});
    const auto dir = testing::temp_dir("em_touchstone");
    const auto path = (dir / "r.s1p").string();
    write_touchstone(r, path);
    const auto back = import_touchstone(path);
    CHECK(back == r);

    std::ofstream((dir / "two.s2p").string()) << "# GHZ S DB R 50\n";
    CHECK_THROWS_AS(import_touchstone((dir / "two.s2p").string()), Error);
}

TEST_CASE("file-exchange backend")
{
    const auto dir = testing::temp_dir("em_exchange");
    const FileExchangeSimulator sim(dir.string());
    const AntennaModel m = l_shape(9);
    const std::vector<double> grid{2.0, 2.5, 3.0};
    const std::string digest = geometry_digest(m);
    try {
        sim.simulate({m, grid});
        FAIL("expected a missing-result error");
    } catch (const SimulationError& e) {
        CHECK(e.digest() == digest);
    }
    CHECK(std::filesystem::exists(dir / (digest + ".json")));
    CHECK(load_model((dir / (digest + ".json")).string()).positions == m.positions);

    std::ofstream((dir / (digest + ".s1p")).string()) << "# GHZ S DB R 50\n2.0 -2 0\n3.0 -4 0\n";
    const auto r = sim.simulate({m, grid});
    CHECK(r.s11_db == std::vector<double>{-2, -3, -4});
    CHECK(sim.simulate({m, grid}) == r);
    CHECK_THROWS_AS(sim.simulate({m, {1.0, 2.0}}), SimulationError);
}
