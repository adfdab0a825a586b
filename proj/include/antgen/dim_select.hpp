#pragma once

#include "antgen/dataset.hpp"
#include "antgen/em_sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace antgen {

struct SelectorConfig {
    std::size_t n_p = 100;  ///< random placements per candidate
    std::uint64_t seed = 1;
    std::vector<double> freqs = default_grid();
    TargetSpec target = wifi_dual_band_target();
    double resolution = 0.1;  ///< raster resolution of persisted images
    /// Persist samples of losing candidates too; they are valid classifier data.
    bool persist_all_candidates = true;
    unsigned workers = 1;
};

struct DimensionStats {
    std::string candidate_id;
    std::vector<Score> scores;  ///< indexed by sample, length n_p
    Score median;
};

struct CandidateSample {
    DimensionStats stats;
    std::vector<DatasetRecord> records;  ///< same order as stats.scores
};

/// Simulates n_p random placements of one candidate. The candidate's random
/// stream is derived from its id, so results do not depend on its position in
/// a candidate list.
CandidateSample sample_candidate(const DesignSpace& space, const DimensionSet& dims,
                                 const SelectorConfig& cfg, const Simulator& backend);

struct Selection {
    std::size_t chosen_index = 0;
    DimensionSet chosen;
    std::vector<DimensionStats> stats;  ///< in candidate order
};

/// Picks the candidate with the smallest median score; ties go to the lowest
/// index. Samples are appended to `store` when one is given.
Selection select(const DesignSpace& space, const std::vector<DimensionSet>& candidates,
                 const SelectorConfig& cfg, const Simulator& backend, DatasetStore* store = nullptr);

/// Index of the smallest median, first one on ties.
std::size_t argmin_median(const std::vector<DimensionStats>& stats);

struct RankedScores {
    std::string candidate_id;
    std::vector<double> raw;
    std::vector<double> sorted;  ///< ascending
    double median = 0.0;
};

std::vector<RankedScores> export_stats(const std::vector<DimensionStats>& stats);

/// CSV "candidate,sample,score,sorted_score" (one row per sample).
void write_stats_csv(const std::vector<DimensionStats>& stats, const std::string& path);
/// CSV "candidate,median,min,max".
void write_medians_csv(const std::vector<DimensionStats>& stats, const std::string& path);

}  // namespace antgen
