#include "antgen/dim_select.hpp"

#include <algorithm>
#include <fstream>

namespace antgen {

CandidateSample sample_candidate(const DesignSpace& space, const DimensionSet& dims,
                                 const SelectorConfig& cfg, const Simulator& backend)
{
    if (cfg.n_p < 1)
        throw Error("n_p must be at least 1");
    validate(space, dims);
    validate(cfg.target);

    const std::uint64_t cand_seed = derive_seed(cfg.seed, "dim_select/" + dims.id);
    CandidateSample out;
    out.records.resize(cfg.n_p);
    parallel_for(cfg.n_p, cfg.workers, [&](std::size_t i) {
        try {
            Rng rng(derive_seed(cand_seed, "sample/" + std::to_string(i)));
            const AntennaModel model = assemble_model(space, dims, random_placement(space, dims, rng));
            const GeometryImage img = rasterize(model, cfg.resolution);
            FrequencyResponse resp = backend.simulate({model, cfg.freqs});
            out.records[i] = make_record(model, img, std::move(resp), cfg.target, 0, "select/" + dims.id);
        } catch (const SimulationError& e) {
            throw SimulationError(e.digest(), "candidate '" + dims.id + "' sample " + std::to_string(i) + ": " +
                                                  e.what());
        } catch (const std::exception& e) {
            throw Error("candidate '" + dims.id + "' sample " + std::to_string(i) + ": " + e.what());
        }
    });

    out.stats.candidate_id = dims.id;
    std::vector<double> values;
    for (const auto& r : out.records) {
        out.stats.scores.push_back(r.score);
        values.push_back(r.score.value);
    }
    out.stats.median = {median(values)};
    return out;
}

std::size_t argmin_median(const std::vector<DimensionStats>& stats)
{
    if (stats.empty())
        throw Error("no candidates to choose from");
    std::size_t best = 0;
    for (std::size_t i = 1; i < stats.size(); ++i)
        if (stats[i].median.value < stats[best].median.value)
            best = i;
    return best;
}

Selection select(const DesignSpace& space, const std::vector<DimensionSet>& candidates,
                 const SelectorConfig& cfg, const Simulator& backend, DatasetStore* store)
{
    if (candidates.empty())
        throw Error("dimension selection needs at least one candidate");
    std::vector<CandidateSample> samples;
    samples.reserve(candidates.size());
    for (const auto& c : candidates)
        samples.push_back(sample_candidate(space, c, cfg, backend));

    Selection sel;
    for (const auto& s : samples)
        sel.stats.push_back(s.stats);
    sel.chosen_index = argmin_median(sel.stats);
    sel.chosen = candidates[sel.chosen_index];

    if (store) {
        for (std::size_t c = 0; c < samples.size(); ++c) {
            if (!cfg.persist_all_candidates && c != sel.chosen_index)
                continue;
            for (auto& r : samples[c].records)
                if (!store->contains(r.id))
                    store->append(std::move(r));
        }
    }
    return sel;
}

std::vector<RankedScores> export_stats(const std::vector<DimensionStats>& stats)
{
    std::vector<RankedScores> out;
    for (const auto& s : stats) {
        RankedScores r;
        r.candidate_id = s.candidate_id;
        for (const auto& v : s.scores)
            r.raw.push_back(v.value);
        r.sorted = r.raw;
        std::sort(r.sorted.begin(), r.sorted.end());
        r.median = s.median.value;
        out.push_back(std::move(r));
    }
    return out;
}

void write_stats_csv(const std::vector<DimensionStats>& stats, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "candidate,sample,score,sorted_score\n";
    for (const auto& r : export_stats(stats))
        for (std::size_t i = 0; i < r.raw.size(); ++i)
            out << r.candidate_id << ',' << i << ',' << format_double(r.raw[i]) << ','
                << format_double(r.sorted[i]) << '\n';
}

void write_medians_csv(const std::vector<DimensionStats>& stats, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << "candidate,median,min,max\n";
    for (const auto& r : export_stats(stats))
        out << r.candidate_id << ',' << format_double(r.median) << ',' << format_double(r.sorted.front()) << ','
            << format_double(r.sorted.back()) << '\n';
}

}  // namespace antgen
