#pragma once

#include "antgen/dim_select.hpp"
#include "antgen/placement_gen.hpp"
#include "antgen/tuner.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace antgen {

struct BackendConfig {
    std::string kind = "surrogate";  ///< "surrogate" or "file-exchange"
    OracleConfig oracle;
    std::string exchange_dir;  ///< file-exchange only
};

std::unique_ptr<Simulator> make_backend(const BackendConfig& cfg);

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::string out_dir;
    DesignSpace space;
    TargetSpec target = wifi_dual_band_target();
    std::vector<double> freqs = default_grid();
    double resolution = 0.1;
    std::vector<DimensionSet> candidates;
    SelectorConfig selector;
    GeneratorConfig generator;
    TrustRegionConfig tuner;
    bool run_optimize = true;
    /// Re-score the optimized dimension set with random placements.
    bool rescore = true;
    ToleranceConfig tolerance;
    bool run_tolerance = true;
    BackendConfig backend;
};

/// Parses a config document. Stage seeds, frequency grids and raster
/// resolutions are filled in from the top-level values.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Throws antgen::Error naming the first inconsistency, e.g. a candidate set
/// whose component count differs from the first set.
void validate(const ExperimentConfig& cfg);

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Exclusive ownership of a run directory through a `.lock` file.
class RunLock {
public:
    explicit RunLock(const std::string& run_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::string path_;
};

/// Error from one pipeline stage; artifacts written so far are kept.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PipelineResult {
    AntennaModel final_model;
    FrequencyResponse final_response;
    Score final_score;
    std::string chosen_dims;
    std::string manifest_digest;

    bool meets() const { return meets_target(final_score); }
};

/// Runs select -> generate -> optimize (when the best score is above zero)
/// -> re-score -> tolerance in cfg.out_dir and writes manifest.json listing
/// every artifact with its digest.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

/// Writes plot-ready CSV and PGM files under <run_dir>/report. Output depends
/// only on the run directory contents.
void render_report(const std::string& run_dir);

/// Per-iteration summary of a dataset store written to `out_dir`.
void dataset_report(const std::string& store_dir, const std::string& out_dir, double bin_width = 0.5);

}  // namespace antgen
