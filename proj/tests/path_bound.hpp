#pragma once

#include "antgen/tuner.hpp"

#include <cmath>
#include <vector>

namespace testing {

/// Feed strip tuned so the first surrogate resonance lands in the 2.4-2.5 GHz
/// band, plus a parasitic patch that stays clear of it under 10% perturbation.
inline antgen::AntennaModel planted_model(double strip_width = 42.9)
{
    antgen::DesignSpace s;
    s.width = 44.0;
    s.height = 2.0;
    s.extension_margin = 1.0;
    antgen::DimensionSet d{"tuned", {{strip_width, 0.5}, {0.5, 0.5}}};
    return antgen::assemble_model(s, d, {{0.5, 0.0}, {10.0, 1.4}});
}

struct BoundCheck {
    double worst_ratio = 0.0;       ///< max |df1/f1| / bound over runs (<= 1 passes)
    double worst_peak_error = 0.0;  ///< max |observed dip - closed-form f1| in GHz
    double grid_step = 0.0;
};

/// For each perturbed model: the relative first-resonance shift must not exceed
/// (sum of absolute parameter changes + two pixels) / perturbed path length, and
/// the observed dip must sit within one grid step of the closed-form resonance.
inline BoundCheck check_path_bound(const antgen::AntennaModel& base, const antgen::ToleranceResult& r,
                                   const antgen::OracleConfig& cfg)
{
    using namespace antgen;
    const double L0 = longest_path_mm(clip_to_space(base), cfg.resolution);
    const double f0 = resonances(L0, cfg).at(0);
    const ParamVector p0(base);
    BoundCheck out;
    out.grid_step = r.baseline.freqs[1] - r.baseline.freqs[0];
    for (std::size_t i = 0; i < r.models.size(); ++i) {
        const double L = longest_path_mm(clip_to_space(r.models[i]), cfg.resolution);
        const double f1 = resonances(L, cfg).at(0);
        const ParamVector p(r.models[i]);
        double moved = 2.0 * cfg.resolution;
        for (std::size_t j = 0; j < p.values.size(); ++j)
            moved += std::abs(p.values[j] - p0.values[j]);
        const double shift = std::abs(f1 - f0) / f0;
        out.worst_ratio = std::max(out.worst_ratio, shift / (moved / L));

        const auto& resp = r.responses[i];
        std::size_t lo = 0;
        for (std::size_t k = 0; k < resp.size() && resp.freqs[k] < 2.0 * f1; ++k)
            if (resp.s11_db[k] < resp.s11_db[lo])
                lo = k;
        out.worst_peak_error = std::max(out.worst_peak_error, std::abs(resp.freqs[lo] - f1));
    }
    return out;
}

}  // namespace testing
