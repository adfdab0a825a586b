#pragma once

#include "antgen/em_sim.hpp"
#include "antgen/scoring.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace antgen {

/// Free geometric parameters of a model: (w, h, x, y) per component, without
/// component 0's y, which the anchor decides. Dimensions can be frozen.
class ParamVector {
public:
    ParamVector(const AntennaModel& model, bool freeze_dims = false);

    std::size_t size() const { return values.size(); }

    /// Box bounds per entry. x and y upper bounds assume the minimum size;
    /// `project` applies the tighter size-dependent limit.
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> values;
    std::vector<std::string> names;  ///< e.g. "c2.w"

    /// Clamps a vector into the feasible set, sizes first, then positions
    /// against the clamped sizes.
    std::vector<double> project(std::vector<double> p) const;

    /// Rebuilds the model for a parameter vector (re-anchored, re-validated).
    AntennaModel to_model(const std::vector<double>& p) const;

    bool freeze_dims() const { return freeze_; }

private:
    struct Slot {
        std::size_t component;
        char field;  ///< 'w', 'h', 'x' or 'y'
    };
    AntennaModel base_;
    bool freeze_;
    std::vector<Slot> slots_;
};

inline constexpr double kMinComponentSize = 0.1;

struct TrustRegionConfig {
    double initial_radius = 0.05;  ///< fraction of each bound range
    double shrink = 0.5;
    double grow = 2.0;
    double eta_low = 0.25;
    double eta_high = 0.75;
    std::size_t budget = 700;
    double min_radius = 1e-3;  ///< stop once the radius falls below min_radius * initial_radius
    double fd_fraction = 0.1;  ///< finite-difference step as a fraction of the radius
    double max_radius = 0.5;
    bool freeze_dims = false;
    unsigned workers = 1;
};

void validate(const TrustRegionConfig& cfg);

struct TraceRow {
    std::size_t eval = 0;  ///< 1-based simulation count
    std::string kind;      ///< "start", "probe" or "trial"
    double score = 0.0;
    double best = 0.0;  ///< best score so far
    double radius = 0.0;
    bool accepted = false;
    std::vector<double> params;
};

enum class StopReason { TargetMet, Budget, Converged };
std::string to_string(StopReason r);

struct BoxResult {
    std::vector<double> best;
    double best_value = 0.0;
    std::size_t evaluations = 0;
    StopReason reason = StopReason::Budget;
    std::vector<TraceRow> trace;
};

/// Trust-region minimization of a black-box function over a box. Coordinates
/// are scaled by their bound range. Every objective call is one unit of budget.
/// `project` maps trial points into the feasible set (identity plus clamping
/// by default). The objective must be safe to call concurrently when
/// cfg.workers > 1.
BoxResult minimize_box(const std::function<double(const std::vector<double>&)>& objective,
                       std::vector<double> start, const std::vector<double>& lower,
                       const std::vector<double>& upper, const TrustRegionConfig& cfg,
                       const std::function<std::vector<double>(std::vector<double>)>& project = {});

struct OptimizeResult {
    AntennaModel best;
    FrequencyResponse best_response;
    Score best_score;
    std::size_t simulations = 0;
    StopReason reason = StopReason::Budget;
    std::vector<TraceRow> trace;
    std::vector<std::string> param_names;
};

/// Refines all free geometric parameters of `start`. Stops at the budget, at
/// the convergence radius, or as soon as the target is met.
OptimizeResult optimize(const AntennaModel& start, const TrustRegionConfig& cfg, const Simulator& backend,
                        const TargetSpec& target, const std::vector<double>& freqs = default_grid());

/// CSV "eval,kind,score,best,radius,accepted,<param names...>".
void write_trace_csv(const std::vector<TraceRow>& trace, const std::vector<std::string>& names,
                     const std::string& path);

enum class PerturbMode {
    Multiplicative,  ///< value * U[1-p, 1+p]
    Additive,        ///< value + U[-p, p] * bound range
};

PerturbMode perturb_mode_from_string(const std::string& s);
std::string to_string(PerturbMode mode);

struct ToleranceConfig {
    double perturb_fraction = 0.10;
    std::size_t n_runs = 20;
    PerturbMode mode = PerturbMode::Multiplicative;
    std::size_t max_attempts = 100;  ///< resamples per run before giving up
    std::uint64_t seed = 1;
    bool freeze_dims = false;
};

struct ToleranceResult {
    FrequencyResponse baseline;
    Score baseline_score;
    std::vector<AntennaModel> models;
    std::vector<FrequencyResponse> responses;
    std::vector<Score> scores;
    std::size_t passed = 0;
    std::size_t resamples = 0;

    double pass_fraction() const { return models.empty() ? 0.0 : double(passed) / double(models.size()); }
};

/// Simulates n_runs randomly perturbed copies of a model. A draw that cannot
/// be placed is redrawn; a run exceeding max_attempts is an error.
ToleranceResult tolerance_study(const AntennaModel& model, const ToleranceConfig& cfg, const Simulator& backend,
                                const TargetSpec& target, const std::vector<double>& freqs = default_grid());

/// Long-format CSV "run,freq_ghz,s11_db"; run 0 is the baseline.
void write_tolerance_csv(const ToleranceResult& result, const std::string& path);

}  // namespace antgen
