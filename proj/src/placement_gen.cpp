#include "antgen/placement_gen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

namespace antgen {

ThresholdMode threshold_mode_from_string(const std::string& s)
{
    if (s == "accumulated-median")
        return ThresholdMode::AccumulatedMedian;
    if (s == "previous-batch-median")
        return ThresholdMode::PreviousBatchMedian;
    throw Error("unknown threshold mode '" + s + "'");
}

std::string to_string(ThresholdMode mode)
{
    return mode == ThresholdMode::AccumulatedMedian ? "accumulated-median" : "previous-batch-median";
}

namespace {

double next_threshold(const DatasetStore& store, ThresholdMode mode, int last_iteration)
{
    const auto scores = mode == ThresholdMode::AccumulatedMedian ? store.scores()
                                                                 : store.scores_for_iteration(last_iteration);
    return median(scores);
}

std::vector<DatasetRecord> top_records(const DatasetStore& store, std::size_t n)
{
    std::vector<const DatasetRecord*> ptrs;
    for (const auto& r : store.records())
        ptrs.push_back(&r);
    std::stable_sort(ptrs.begin(), ptrs.end(),
                     [](const auto* a, const auto* b) { return a->score.value < b->score.value; });
    std::vector<DatasetRecord> out;
    for (std::size_t i = 0; i < std::min(n, ptrs.size()); ++i)
        out.push_back(*ptrs[i]);
    return out;
}

}  // namespace

GenerationResult run_generation(const DesignSpace& space, const DimensionSet& dims,
                                const GeneratorConfig& cfg, const Simulator& backend,
                                const TargetSpec& target, DatasetStore store)
{
    if (cfg.n_batch < 1 || cfg.n_iter < 1)
        throw Error("n_batch and n_iter must be at least 1");
    validate(space, dims);
    validate(target);

    namespace fs = std::filesystem;
    if (!cfg.artifacts_dir.empty())
        fs::create_directories(cfg.artifacts_dir);

    GenerationResult result;
    std::optional<ClassifierState> filter = cfg.warm_start;
    double threshold = cfg.initial_threshold;
    const int first_iteration = store.empty() ? 1 : store.records().back().iteration + 1;

    for (int k = first_iteration; k < first_iteration + cfg.n_iter; ++k) {
        // Resuming a store from an earlier run trains before its first new iteration.
        if (k > first_iteration || (k > 1 && !cfg.warm_start)) {
            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(cfg.seed, "generate/train/" + std::to_string(k));
            tc.iteration = k;
            filter = train(store.records(), tc);
            threshold = next_threshold(store, cfg.threshold_mode, k - 1);
            filter->threshold = threshold;
            if (!cfg.artifacts_dir.empty()) {
                const std::string stem = (fs::path(cfg.artifacts_dir) / ("iter_" + std::to_string(k))).string();
                save_checkpoint(*filter, stem + ".ckpt");
                write_training_log(*filter, stem + "_training.csv");
            }
        } else if (filter) {
            filter->threshold = threshold;
        }

        IterationReport rep;
        rep.iteration = k;
        rep.filtered = filter.has_value();
        rep.threshold = filter ? threshold : std::numeric_limits<double>::infinity();
        Rng rng(derive_seed(cfg.seed, "generate/iter/" + std::to_string(k)));
        std::size_t since_accept = 0;

        while (rep.accepted < cfg.n_batch) {
            if (since_accept >= cfg.max_proposals_per_accept) {
                if (rep.relaxed)
                    throw FilterStarvation("iteration " + std::to_string(k) + ": " +
                                           std::to_string(since_accept) + " proposals without an accepted model at threshold " +
                                           format_double(threshold) + " dB");
                std::cerr << "generate: iteration " << k << " filter starved at threshold "
                          << format_double(threshold) << " dB; relaxing by 1 dB\n";
                threshold += 1.0;
                filter->threshold = threshold;
                rep.threshold = threshold;
                rep.relaxed = true;
                since_accept = 0;
            }
            ++rep.proposals;
            ++since_accept;
            const AntennaModel model = assemble_model(space, dims, random_placement(space, dims, rng));
            const GeometryImage img = rasterize(model, cfg.resolution);
            const std::string id = image_digest(img);
            if (store.contains(id)) {
                ++rep.duplicates;
                continue;
            }
            std::optional<double> predicted;
            if (filter) {
                predicted = predict_score(*filter, img).value;
                if (!classify_score(*predicted, threshold)) {
                    ++rep.rejected;
                    continue;
                }
            }
            FrequencyResponse resp;
            try {
                resp = backend.simulate({model, cfg.freqs});
            } catch (const SimulationError& e) {
                std::cerr << "generate: skipping model: " << e.what() << '\n';
                ++rep.sim_failures;
                continue;
            }
            DatasetRecord rec = make_record(model, img, std::move(resp), target, k, "generate");
            rec.predicted_score = predicted;
            if (filter)
                rec.threshold = threshold;
            store.append(std::move(rec));
            ++rep.accepted;
            since_accept = 0;
        }
        result.iterations.push_back(rep);
    }

    result.best = top_records(store, cfg.top_n);
    result.classifier = std::move(filter);
    result.store = std::move(store);
    return result;
}

BatchStats batch_stats(const DatasetStore& store, double bin_width)
{
    if (store.empty())
        throw Error("batch statistics of an empty store");
    if (!(bin_width > 0.0))
        throw Error("histogram bin width must be positive");
    const auto all = store.scores();
    const double lo = std::floor(*std::min_element(all.begin(), all.end()));
    const double hi = std::ceil(*std::max_element(all.begin(), all.end()));
    BatchStats out;
    out.bin_lo = lo;
    out.bin_width = bin_width;
    out.bin_count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((hi - lo) / bin_width)));

    std::vector<int> iterations;
    for (const auto& r : store.records())
        if (iterations.empty() || iterations.back() != r.iteration)
            iterations.push_back(r.iteration);
    for (int it : iterations) {
        const auto s = store.scores_for_iteration(it);
        IterationStats st;
        st.iteration = it;
        st.count = s.size();
        st.median = median(s);
        st.min = *std::min_element(s.begin(), s.end());
        st.histogram.assign(out.bin_count, 0);
        for (double v : s) {
            auto bin = static_cast<std::size_t>(std::max(0.0, std::floor((v - lo) / bin_width)));
            st.histogram[std::min(bin, out.bin_count - 1)]++;
        }
        out.iterations.push_back(std::move(st));
    }
    return out;
}

void write_batch_stats_csv(const BatchStats& stats, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "iteration,count,median,min\n";
    for (const auto& it : stats.iterations)
        out << it.iteration << ',' << it.count << ',' << format_double(it.median) << ',' << format_double(it.min)
            << '\n';
}

void write_histograms_csv(const BatchStats& stats, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "iteration,bin_lo,bin_hi,count\n";
    for (const auto& it : stats.iterations)
        for (std::size_t b = 0; b < it.histogram.size(); ++b) {
            const double lo = stats.bin_lo + static_cast<double>(b) * stats.bin_width;
            out << it.iteration << ',' << format_double(lo) << ',' << format_double(lo + stats.bin_width) << ','
                << it.histogram[b] << '\n';
        }
}

void write_iteration_report_csv(const std::vector<IterationReport>& reports, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "iteration,threshold,filtered,relaxed,proposals,rejected,duplicates,sim_failures,accepted\n";
    for (const auto& r : reports)
        out << r.iteration << ',' << format_double(r.threshold) << ',' << r.filtered << ',' << r.relaxed << ','
            << r.proposals << ',' << r.rejected << ',' << r.duplicates << ',' << r.sim_failures << ','
            << r.accepted << '\n';
}

}  // namespace antgen
