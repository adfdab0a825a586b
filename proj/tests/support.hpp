#pragma once

#include "antgen/geometry.hpp"
#include "antgen/scoring.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace testing {

inline antgen::DesignSpace example1_space()
{
    antgen::DesignSpace s;
    s.width = 30.0;
    s.height = 6.0;
    s.extension_margin = 1.0;
    return s;
}

inline antgen::DimensionSet make_dims(std::string id, std::vector<std::pair<double, double>> wh)
{
    antgen::DimensionSet d;
    d.id = std::move(id);
    for (auto [w, h] : wh)
        d.dims.push_back({w, h});
    return d;
}

inline antgen::DimensionSet example1_set1()
{
    return make_dims("set1", {{0.75, 5.49}, {16.87, 1.7}, {11.38, 3.0}, {18.63, 0.56}, {0.99, 2.43}});
}

/// Final example-2 layout. Component 4 reaches x = 30.1, past the 22 mm board
/// plus a 1 mm margin, and the tops reach 7.3 mm, so the space gets wider margins.
inline antgen::AntennaModel example2_final_model()
{
    antgen::DesignSpace s;
    s.width = 22.0;
    s.height = 5.0;
    s.extension_margin = 8.5;
    s.top_margin = 2.5;
    s.anchor_mode = antgen::AnchorMode::LowerEdge;
    s.anchor_y = 0.5;
    const auto dims = make_dims("final", {{1.2, 4.2}, {21.1, 2.2}, {7.6, 3.2}, {17.8, 0.7}, {0.8, 2.3}, {0.4, 2.9}});
    const std::vector<antgen::ComponentPos> pos{{20.8, 0.5}, {1.4, 4.0}, {2.4, 4.1}, {12.3, 1.6}, {12.9, 2.6}, {1.9, 2.8}};
    return antgen::assemble_model(s, dims, pos);
}

/// Narrow board where the feed strip length alone sets the first resonance.
inline antgen::DesignSpace planted_space()
{
    antgen::DesignSpace s;
    s.width = 44.0;
    s.height = 2.0;
    s.extension_margin = 1.0;
    return s;
}

inline antgen::TargetSpec planted_target() { return {{{2.4, 2.5, -6.0}}}; }

/// Five candidates; "tuned" has a 42.9 mm feed strip whose half-length path
/// puts f1 near 2.44 GHz. The others are detuned.
inline std::vector<antgen::DimensionSet> planted_candidates()
{
    std::vector<antgen::DimensionSet> c;
    for (double w : {20.0, 30.0, 42.9, 36.0, 39.0})
        c.push_back(make_dims(w == 42.9 ? "tuned" : "w" + std::to_string(static_cast<int>(w)), {{w, 0.5}, {0.5, 0.5}}));
    return c;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    const auto p = std::filesystem::temp_directory_path() / ("antgen_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing
