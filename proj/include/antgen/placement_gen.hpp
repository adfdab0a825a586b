#pragma once

#include "antgen/classifier.hpp"
#include "antgen/dataset.hpp"
#include "antgen/em_sim.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace antgen {

enum class ThresholdMode {
    AccumulatedMedian,    ///< median score of the whole store
    PreviousBatchMedian,  ///< median score of the last iteration's batch
};

ThresholdMode threshold_mode_from_string(const std::string& s);
std::string to_string(ThresholdMode mode);

struct GeneratorConfig {
    std::size_t n_batch = 500;
    int n_iter = 8;
    double initial_threshold = 6.0;
    ThresholdMode threshold_mode = ThresholdMode::AccumulatedMedian;
    std::size_t max_proposals_per_accept = 10000;
    std::size_t top_n = 5;
    std::uint64_t seed = 1;
    double resolution = 0.1;
    std::vector<double> freqs = default_grid();
    TrainConfig train;
    /// Classifier available before any data is collected; iteration 1 is
    /// filtered against initial_threshold when present.
    std::optional<ClassifierState> warm_start;
    /// Directory for per-iteration checkpoints and training logs (optional).
    std::string artifacts_dir;
};

struct IterationReport {
    int iteration = 0;
    double threshold = 0.0;  ///< +inf when the filter is off
    bool filtered = false;
    bool relaxed = false;
    std::size_t proposals = 0;
    std::size_t rejected = 0;
    std::size_t duplicates = 0;
    std::size_t sim_failures = 0;
    std::size_t accepted = 0;
};

struct GenerationResult {
    DatasetStore store;
    std::vector<DatasetRecord> best;  ///< top_n records by true score, ascending
    std::vector<IterationReport> iterations;
    std::optional<ClassifierState> classifier;  ///< last trained filter
};

/// Raised when the filter rejects too many proposals even after relaxing once.
class FilterStarvation : public Error {
public:
    using Error::Error;
};

/// Random proposals of the chosen dimensions, filtered by the score classifier
/// and simulated until each iteration has n_batch new records. The classifier
/// is retrained on the accumulated store before every iteration after the
/// first, and its threshold follows the configured median rule.
GenerationResult run_generation(const DesignSpace& space, const DimensionSet& dims,
                                const GeneratorConfig& cfg, const Simulator& backend,
                                const TargetSpec& target, DatasetStore store = {});

struct IterationStats {
    int iteration = 0;
    std::size_t count = 0;
    double median = 0.0;
    double min = 0.0;
    std::vector<std::size_t> histogram;
};

/// Per-iteration summaries with one shared histogram binning so iterations
/// can be compared: bins of `bin_width` dB starting at floor(min score).
struct BatchStats {
    double bin_lo = 0.0;
    double bin_width = 0.5;
    std::size_t bin_count = 0;
    std::vector<IterationStats> iterations;
};

BatchStats batch_stats(const DatasetStore& store, double bin_width = 0.5);

void write_batch_stats_csv(const BatchStats& stats, const std::string& path);
void write_histograms_csv(const BatchStats& stats, const std::string& path);
void write_iteration_report_csv(const std::vector<IterationReport>& reports, const std::string& path);

}  // namespace antgen
