#include "antgen/scoring.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace antgen;

namespace {

FrequencyResponse constant(const std::vector<double>& f, double db)
{
    return {f, std::vector<double>(f.size(), db)};
}

TargetSpec single(double lo, double hi, double db) { return {{{lo, hi, db}}}; }

/// Random response on the default grid with values on a 1/64 dB lattice, so
/// threshold shifts by multiples of 1/4 are exact in binary arithmetic.
FrequencyResponse random_lattice_response(Rng& rng)
{
    FrequencyResponse r{default_grid(), {}};
    for (std::size_t i = 0; i < r.freqs.size(); ++i)
        r.s11_db.push_back(-static_cast<double>(rng.index(40 * 64)) / 64.0);
    return r;
}

}  // namespace

TEST_CASE("scoring examples")
{
    const auto f = default_grid();
    const TargetSpec t = wifi_dual_band_target();
    CHECK(score(constant(f, -6.0), t).value == 0.0);
    CHECK(score(constant(f, -3.0), t).value == 3.0);

    FrequencyResponse r = constant(f, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] >= 2.4 && f[i] <= 2.5)
            r.s11_db[i] = -10.0;
        if (f[i] >= 5.1 && f[i] <= 7.0)
            r.s11_db[i] = -7.0;
    }
    CHECK(score(r, t).value == -1.0);
}

TEST_CASE("meets_target cut")
{
    CHECK(meets_target({0.0}));
    CHECK_FALSE(meets_target({2.2}));
    CHECK(meets_target({-0.5}));
}

TEST_CASE("default grid and target")
{
    const auto f = default_grid();
    CHECK(f.size() == 201);
    CHECK(f.front() == 2.0);
    CHECK(f.back() == 8.0);
    CHECK(f[1] == doctest::Approx(2.03));
    const TargetSpec t = wifi_dual_band_target();
    REQUIRE(t.bands.size() == 2);
    CHECK(t.bands[1].f_hi == 7.0);
}

TEST_CASE("band without samples is an error naming the band")
{
    const std::vector<double> f{2.0, 3.0};
    try {
        score(constant(f, -10), single(2.4, 2.5, -6));
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("2.4") != std::string::npos);
    }
}

TEST_CASE("target validation")
{
    CHECK_THROWS_AS(validate(TargetSpec{}), Error);
    CHECK_THROWS_AS(validate(single(2.5, 2.4, -6)), Error);
    CHECK_THROWS_AS(validate(TargetSpec{{{5, 7, -6}, {2.4, 2.5, -6}}}), Error);
    CHECK_THROWS_AS(validate(TargetSpec{{{2, 3, -6}, {2.5, 4, -6}}}), Error);
    const TargetSpec t = target_from_json(nlohmann::json::parse(
        R"({"bands":[{"lo":2.4,"hi":2.5,"db":-6},{"lo":5.1,"hi":7.0,"db":-6}]})"));
    CHECK(t.bands.size() == 2);
    CHECK(target_to_json(t) == target_to_json(wifi_dual_band_target()));
}

TEST_CASE("property: monotone, out-of-band blind, threshold-equivariant")
{
    Rng rng(2024);
    const TargetSpec t = wifi_dual_band_target();
    for (int n = 0; n < 10000; ++n) {
        FrequencyResponse r = random_lattice_response(rng);
        const double s = score(r, t).value;
        const std::size_t i = rng.index(r.size());
        const double f = r.freqs[i];
        const bool in_band = (f >= 2.4 && f <= 2.5) || (f >= 5.1 && f <= 7.0);

        FrequencyResponse up = r;
        up.s11_db[i] = std::min(0.0, up.s11_db[i] + 0.25 * (1 + rng.index(40)));
        const double s_up = score(up, t).value;
        REQUIRE(s_up >= s);
        if (!in_band)
            REQUIRE(s_up == s);

        const double delta = 0.25 * static_cast<double>(rng.index(16));
        TargetSpec shifted = t;
        for (auto& b : shifted.bands)
            b.threshold_db -= delta;
        REQUIRE(score(r, shifted).value == s + delta);
    }
}

TEST_CASE("response CSV round-trip is exact")
{
    Rng rng(1);
    FrequencyResponse r{default_grid(), {}};
    for (std::size_t i = 0; i < r.size(); ++i)
        r.s11_db.push_back(-40.0 * rng.uniform());
    const auto dir = testing::temp_dir("scoring_csv");
    write_response_csv(r, (dir / "r.csv").string());
    CHECK(read_response_csv((dir / "r.csv").string()) == r);
}

TEST_CASE("response validation")
{
    CHECK_THROWS_AS(validate(FrequencyResponse{{2.0, 1.0}, {-1, -1}}), Error);
    CHECK_THROWS_AS(validate(FrequencyResponse{{1.0, 2.0}, {-1}}), Error);
    CHECK_THROWS_AS(validate(FrequencyResponse{{1.0, 2.0}, {-1, 0.6}}), Error);
    CHECK_NOTHROW(validate(FrequencyResponse{{1.0, 2.0}, {-1, 0.4}}));
}
