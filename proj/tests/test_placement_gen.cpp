#include "antgen/placement_gen.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace antgen;

namespace {

GeneratorConfig small_config(std::uint64_t seed, int n_iter)
{
    GeneratorConfig g;
    g.n_batch = 30;
    g.n_iter = n_iter;
    g.seed = seed;
    g.resolution = 0.2;
    g.freqs = linear_grid(2.0, 8.0, 61);
    g.train.max_epochs = 3;
    g.train.min_records = 10;
    return g;
}

/// Fails for every model whose digest ends in an even hex digit below 4.
class FlakySimulator final : public Simulator {
public:
    FrequencyResponse simulate(const SimRequest& req) const override
    {
        const std::string d = geometry_digest(req.model);
        if (d.back() == '0' || d.back() == '2')
            throw SimulationError(d, "solver diverged");
        return inner_.simulate(req);
    }
    std::string name() const override { return "flaky"; }

private:
    SurrogateSimulator inner_;
};

DatasetRecord fake(double score_value, int iteration, const std::string& id)
{
    DatasetRecord r;
    r.id = id;
    r.iteration = iteration;
    r.score = {score_value};
    return r;
}

}  // namespace

TEST_CASE("threshold mode names")
{
    CHECK(threshold_mode_from_string("accumulated-median") == ThresholdMode::AccumulatedMedian);
    CHECK(to_string(ThresholdMode::PreviousBatchMedian) == "previous-batch-median");
    CHECK_THROWS_AS(threshold_mode_from_string("mean"), Error);
}

TEST_CASE("a single iteration is unfiltered")
{
    const SurrogateSimulator sim;
    const auto r = run_generation(testing::example1_space(), testing::example1_set1(), small_config(1, 1), sim,
                                  wifi_dual_band_target());
    CHECK(r.store.size() == 30);
    CHECK_FALSE(r.classifier.has_value());
    REQUIRE(r.iterations.size() == 1);
    CHECK_FALSE(r.iterations[0].filtered);
    CHECK(std::isinf(r.iterations[0].threshold));
    CHECK(r.best.size() == 5);
    for (std::size_t i = 1; i < r.best.size(); ++i)
        CHECK(r.best[i - 1].score <= r.best[i].score);
}

TEST_CASE("filtered iterations respect the threshold and are reproducible")
{
    const SurrogateSimulator sim;
    const auto cfg = small_config(2, 3);
    const auto a = run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                  wifi_dual_band_target());
    CHECK(a.store.size() == 90);
    std::vector<double> before;
    for (const auto& rec : a.store.records()) {
        if (rec.iteration >= 2) {
            REQUIRE(rec.predicted_score.has_value());
            REQUIRE(rec.threshold.has_value());
            CHECK(*rec.predicted_score <= *rec.threshold);
        }
    }
    const auto s1 = a.store.scores_for_iteration(1);
    CHECK(a.iterations[1].threshold == median(s1));
    CHECK(a.iterations[1].filtered);

    const auto b = run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                  wifi_dual_band_target());
    REQUIRE(b.store.size() == a.store.size());
    for (std::size_t i = 0; i < a.store.size(); ++i)
        CHECK(a.store.records()[i].id == b.store.records()[i].id);
}

TEST_CASE("previous-batch threshold")
{
    const SurrogateSimulator sim;
    auto cfg = small_config(3, 3);
    cfg.threshold_mode = ThresholdMode::PreviousBatchMedian;
    const auto r = run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                  wifi_dual_band_target());
    CHECK(r.iterations[2].threshold == median(r.store.scores_for_iteration(2)));
}

TEST_CASE("simulation failures are skipped")
{
    const FlakySimulator sim;
    const auto r = run_generation(testing::example1_space(), testing::example1_set1(), small_config(4, 1), sim,
                                  wifi_dual_band_target());
    CHECK(r.store.size() == 30);
    CHECK(r.iterations[0].sim_failures > 0);
    CHECK(r.iterations[0].proposals == 30 + r.iterations[0].sim_failures + r.iterations[0].duplicates);
}

TEST_CASE("a starved filter relaxes once, then aborts")
{
    const SurrogateSimulator sim;
    auto cfg = small_config(5, 1);
    auto seed_run = run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                   wifi_dual_band_target());
    std::vector<DatasetRecord> recs = seed_run.store.records();
    for (auto& r : recs)
        r.score = {10.0};
    cfg.warm_start = train(recs, cfg.train);
    cfg.initial_threshold = 6.0;
    cfg.max_proposals_per_accept = 25;
    CHECK_THROWS_AS(run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                   wifi_dual_band_target()),
                    FilterStarvation);

    // One dB of relaxation is enough when the constant prediction sits just above the threshold.
    cfg.initial_threshold = 9.5;
    const auto r = run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                  wifi_dual_band_target());
    CHECK(r.iterations[0].relaxed);
    CHECK(r.iterations[0].threshold == 10.5);
    CHECK(r.store.size() == 30);
}

TEST_CASE("resuming a store continues the iteration count")
{
    const SurrogateSimulator sim;
    const auto dir = testing::temp_dir("placement_resume");
    auto cfg = small_config(6, 1);
    run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim, wifi_dual_band_target(),
                   DatasetStore(dir.string()));
    const auto r = run_generation(testing::example1_space(), testing::example1_set1(), cfg, sim,
                                  wifi_dual_band_target(), DatasetStore(dir.string()));
    CHECK(r.store.size() == 60);
    CHECK(r.iterations[0].iteration == 2);
    CHECK(r.iterations[0].filtered);
    CHECK(DatasetStore::load(dir.string()).size() == 60);
}

TEST_CASE("batch statistics")
{
    DatasetStore one;
    one.append(fake(2.0, 1, "a"));
    const BatchStats s1 = batch_stats(one);
    CHECK(s1.iterations[0].median == 2.0);
    CHECK(s1.iterations[0].min == 2.0);

    DatasetStore two;
    two.append(fake(4, 1, "a"));
    two.append(fake(6, 1, "b"));
    two.append(fake(1, 2, "c"));
    two.append(fake(3, 2, "d"));
    const BatchStats s2 = batch_stats(two);
    CHECK(s2.iterations[0].median == 5.0);
    CHECK(s2.iterations[1].median == 2.0);
    CHECK(s2.bin_lo == 1.0);

    Rng rng(12);
    for (int t = 0; t < 200; ++t) {
        DatasetStore st;
        const std::size_t n = 1 + rng.index(80);
        for (std::size_t i = 0; i < n; ++i)
            st.append(fake(rng.uniform(-8.0, 6.0), static_cast<int>(i * 3 / n), std::to_string(i)));
        const double width = rng.uniform(0.1, 2.0);
        const BatchStats b = batch_stats(st, width);
        std::size_t total = 0;
        for (const auto& it : b.iterations) {
            REQUIRE(it.histogram.size() == b.bin_count);
            total += std::accumulate(it.histogram.begin(), it.histogram.end(), std::size_t{0});
        }
        REQUIRE(total == n);
    }
}
