#pragma once

#include "antgen/geometry.hpp"
#include "antgen/scoring.hpp"

#include <memory>
#include <string>
#include <vector>

namespace antgen {

struct SimRequest {
    AntennaModel model;
    std::vector<double> freqs;  ///< GHz, strictly increasing, at least two points
};

void validate(const SimRequest& req);

/// Electromagnetic simulation backend. Implementations must be pure with
/// respect to the request and safe to call from several threads at once.
class Simulator {
public:
    virtual ~Simulator() = default;
    /// Returns S11 on exactly req.freqs; throws SimulationError on failure.
    virtual FrequencyResponse simulate(const SimRequest& req) const = 0;
    virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Built-in synthetic surrogate

/// Speed of light in mm * GHz.
inline constexpr double kSpeedOfLight = 299.792458;

struct OracleConfig {
    double eps_eff = 2.0;
    double q_factor = 30.0;
    double depth_db = 20.0;
    int n_harmonics = 3;
    double resolution = 0.1;  ///< mm per pixel for connectivity analysis
};

void validate(const OracleConfig& cfg);

/// Longest 4-connected path (mm) from the port's ground contact through the
/// metal attached to the port, measured edge to edge. Zero when no metal
/// touches the port.
double longest_path_mm(const MetalLayout& layout, double resolution);

/// Quarter-wave resonances f_k = (2k-1) c0 / (4 L sqrt(eps_eff)).
std::vector<double> resonances(double path_mm, const OracleConfig& cfg);

/// Sum of Lorentzian dips at the resonances, clamped to [-40, 0] dB.
/// A zero path gives a flat 0 dB (total reflection).
FrequencyResponse surrogate_response(double path_mm, const std::vector<double>& freqs,
                                     const OracleConfig& cfg);

FrequencyResponse surrogate_simulate(const SimRequest& req, const OracleConfig& cfg);

class SurrogateSimulator final : public Simulator {
public:
    explicit SurrogateSimulator(OracleConfig cfg = {});
    FrequencyResponse simulate(const SimRequest& req) const override;
    std::string name() const override { return "surrogate"; }
    const OracleConfig& config() const { return cfg_; }

private:
    OracleConfig cfg_;
};

// ---------------------------------------------------------------------------
// File exchange with external solvers

/// Stable digest of a model's geometry (JSON form); names exchanged files.
std::string geometry_digest(const AntennaModel& model);

void export_geometry(const AntennaModel& model, const std::string& path);

/// Parses a Touchstone v1 one-port file (DB, MA or RI; HZ/KHZ/MHZ/GHZ) into
/// dB with frequencies in GHz.
FrequencyResponse parse_touchstone(const std::string& text, const std::string& source = "<touchstone>");
FrequencyResponse import_touchstone(const std::string& path);

/// Writes "# GHZ S DB R 50" with round-trip-exact numbers.
void write_touchstone(const FrequencyResponse& resp, const std::string& path);

/// Linear interpolation of a response (in dB) onto another grid; throws if
/// the grid reaches outside the response's frequency range.
FrequencyResponse resample(const FrequencyResponse& resp, const std::vector<double>& freqs);

/// Exports <digest>.json into a directory and reads back <digest>.s1p
/// produced by an external solver. Missing results raise SimulationError.
class FileExchangeSimulator final : public Simulator {
public:
    explicit FileExchangeSimulator(std::string directory);
    FrequencyResponse simulate(const SimRequest& req) const override;
    std::string name() const override { return "file-exchange"; }

private:
    std::string dir_;
};

}  // namespace antgen
