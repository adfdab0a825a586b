#pragma once

#include "antgen/common.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace antgen {

struct Band {
    double f_lo = 0.0;  ///< GHz
    double f_hi = 0.0;  ///< GHz
    double threshold_db = -6.0;
};

struct TargetSpec {
    std::vector<Band> bands;
};

void validate(const TargetSpec& target);

/// Sampled |S11| in dB. Frequencies in GHz, strictly increasing.
struct FrequencyResponse {
    std::vector<double> freqs;
    std::vector<double> s11_db;

    std::size_t size() const { return freqs.size(); }
    friend bool operator==(const FrequencyResponse&, const FrequencyResponse&) = default;
};

/// Slack above 0 dB tolerated from numerical noise in external solvers.
inline constexpr double kMaxS11Db = 0.5;

void validate(const FrequencyResponse& resp);

/// Worst-case in-band excess of S11 over the band threshold, in dB.
/// Negative values mean the target is met with margin.
struct Score {
    double value = 0.0;
    friend auto operator<=>(const Score&, const Score&) = default;
};

/// Max over bands and in-band samples of s11_db - threshold. Sampled points only.
Score score(const FrequencyResponse& resp, const TargetSpec& target);

inline bool meets_target(Score s) { return s.value <= 0.0; }

/// Evenly spaced grid of n points over [lo, hi] GHz (the default is 201 points over 2-8 GHz).
std::vector<double> linear_grid(double lo, double hi, std::size_t n);
std::vector<double> default_grid();

/// The dual-band WiFi target used by both worked examples.
TargetSpec wifi_dual_band_target();

nlohmann::json target_to_json(const TargetSpec& target);
TargetSpec target_from_json(const nlohmann::json& j);

/// CSV "freq_ghz,s11_db" with round-trip-exact number formatting.
void write_response_csv(const FrequencyResponse& resp, const std::string& path);
FrequencyResponse read_response_csv(const std::string& path);

}  // namespace antgen
