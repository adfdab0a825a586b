#include "antgen/dataset.hpp"
#include "antgen/em_sim.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace antgen;

namespace {

DatasetRecord simulated(std::uint64_t seed, int iteration)
{
    const DesignSpace s = testing::example1_space();
    const auto d = testing::example1_set1();
    const AntennaModel m = assemble_model(s, d, random_placement(s, d, seed));
    const auto resp = SurrogateSimulator().simulate({m, default_grid()});
    return make_record(m, rasterize(m, 0.2), resp, wifi_dual_band_target(), iteration, "test");
}

}  // namespace

TEST_CASE("records carry the score of their response")
{
    const DatasetRecord r = simulated(1, 0);
    CHECK(r.score == score(r.response, wifi_dual_band_target()));
    CHECK(r.id == image_digest(r.image.to_image()));
    CHECK(r.image.to_image() == rasterize(r.model, 0.2));
}

TEST_CASE("append rules")
{
    DatasetStore store;
    store.append(simulated(1, 1));
    CHECK_THROWS_AS(store.append(simulated(1, 1)), Error);
    CHECK_THROWS_AS(store.append(simulated(2, 0)), Error);
    store.append(simulated(2, 2));
    CHECK(store.size() == 2);
    CHECK(store.scores_for_iteration(2).size() == 1);
    CHECK(store.scores_for_iteration(3).empty());
}

TEST_CASE("directory store persists and reloads exactly")
{
    const auto dir = testing::temp_dir("dataset_store");
    {
        DatasetStore store(dir.string());
        for (std::uint64_t s = 0; s < 12; ++s) {
            DatasetRecord r = simulated(s, static_cast<int>(s / 4));
            if (s % 3 == 0) {
                r.predicted_score = 1.25 + s;
                r.threshold = 4.5;
            }
            store.append(std::move(r));
        }
    }
    const DatasetStore a = DatasetStore::load(dir.string());
    DatasetStore b(dir.string());
    REQUIRE(a.size() == 12);
    CHECK(b.size() == 12);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& r = a.records()[i];
        const DatasetRecord fresh = simulated(i, static_cast<int>(i / 4));
        CHECK(r.id == fresh.id);
        CHECK(r.score == fresh.score);
        CHECK(r.response == fresh.response);
        CHECK(r.image.pixels == fresh.image.pixels);
        CHECK(r.model.positions == fresh.model.positions);
        CHECK(r.predicted_score.has_value() == (i % 3 == 0));
        // Stored scores agree with a recomputation from the stored response.
        CHECK(score(r.response, wifi_dual_band_target()) == r.score);
    }
    CHECK_THROWS_AS(DatasetStore::load((dir / "missing").string()), Error);
}
