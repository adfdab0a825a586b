#include "antgen/common.hpp"

#include <doctest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

using namespace antgen;

TEST_CASE("fnv1a64 known vectors")
{
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(to_hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("derive_seed separates named streams")
{
    CHECK(derive_seed(1, "select") == derive_seed(1, "select"));
    CHECK(derive_seed(1, "select") != derive_seed(1, "generate"));
    CHECK(derive_seed(1, "select") != derive_seed(2, "select"));
}

TEST_CASE("Rng is reproducible and respects bounds")
{
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform(-1.0, 3.0);
        CHECK(u == b.uniform(-1.0, 3.0));
        CHECK(u >= -1.0);
        CHECK(u <= 3.0);
    }
    Rng c(7);
    CHECK(c.uniform(2.0, 2.0) == 2.0);
    for (int i = 0; i < 100; ++i)
        CHECK(c.index(5) < 5);
}

TEST_CASE("median convention")
{
    const std::vector<double> one{4.0}, odd{1, 3, 2}, even{1, 2, 3, 4};
    CHECK(median(one) == 4.0);
    CHECK(median(odd) == 2.0);
    CHECK(median(even) == 2.5);
    CHECK_THROWS_AS(median(std::vector<double>{}), Error);
}

TEST_CASE("format_double round-trips")
{
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-8.0, 8.0));
        CHECK(parse_double(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(parse_double(format_double(std::numeric_limits<double>::infinity())) ==
          std::numeric_limits<double>::infinity());
    CHECK_THROWS_AS(parse_double("1.5x"), Error);
}

TEST_CASE("parallel_for covers every index and rethrows the lowest failure")
{
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits)
        CHECK(h.load() == 1);

    try {
        parallel_for(50, 3, [](std::size_t i) {
            if (i == 7 || i == 30)
                throw Error("fail " + std::to_string(i));
        });
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(std::string(e.what()) == "fail 7");
    }
}
