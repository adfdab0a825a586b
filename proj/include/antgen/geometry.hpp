#pragma once

#include "antgen/common.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace antgen {

/// Axis-aligned rectangle, lower-left corner plus size, millimeters.
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const { return x + w; }
    double top() const { return y + h; }
    double area() const { return w * h; }
    bool empty() const { return !(w > 0.0) || !(h > 0.0); }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Intersection of two rectangles; an empty Rect (w = h = 0) when disjoint.
Rect intersect(const Rect& a, const Rect& b);

struct ComponentDims {
    double width = 0.0;
    double height = 0.0;
    friend bool operator==(const ComponentDims&, const ComponentDims&) = default;
};

struct ComponentPos {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const ComponentPos&, const ComponentPos&) = default;
};

/// Fixed rectangle sizes decided before placement. Component 0 carries the port.
struct DimensionSet {
    std::string id;
    std::vector<ComponentDims> dims;

    std::size_t size() const { return dims.size(); }
};

enum class AnchorMode {
    Center,     ///< component 0's vertical center sits on anchor_y
    LowerEdge,  ///< component 0's lower edge sits on anchor_y
};

struct DesignSpace {
    double width = 0.0;
    double height = 0.0;
    /// Room added to the left, right and bottom edges for random placement.
    double extension_margin = 1.0;
    /// Room added above the top edge. Zero keeps placements below the top.
    double top_margin = 0.0;
    double anchor_y = 0.5;
    AnchorMode anchor_mode = AnchorMode::Center;
    /// Explicit port height; when unset the feed spans from y = 0 up to
    /// component 0's lower edge, but never less than min_port_height.
    std::optional<double> port_height;
    double min_port_height = 0.5;
    /// Feed width cap; actual width is min(component-0 width, port_width).
    double port_width = 1.0;
    /// Fixed environment metal (e.g. shielding cans). Never clipped or moved.
    std::vector<Rect> keepouts;

    Rect bounds() const { return {0.0, 0.0, width, height}; }
    Rect extended_bounds() const
    {
        return {-extension_margin, -extension_margin, width + 2.0 * extension_margin,
                height + extension_margin + top_margin};
    }
};

/// Throws antgen::Error naming the broken invariant.
void validate(const DesignSpace& space);
void validate(const DesignSpace& space, const DimensionSet& dims);

enum EdgeViolation : unsigned {
    kNone = 0,
    kLeft = 1u << 0,
    kRight = 1u << 1,
    kBottom = 1u << 2,
    kTop = 1u << 3,
};

struct PlacementVerdict {
    unsigned violations = kNone;

    bool legal() const { return violations == kNone; }
    std::string describe() const;
};

/// Legal iff the rectangle lies inside the extended area.
PlacementVerdict validate_placement(const DesignSpace& space, const ComponentDims& dims,
                                    const ComponentPos& pos);

struct AntennaModel {
    DesignSpace space;
    DimensionSet dims;
    /// Positions after anchoring (component 0's y already overwritten).
    std::vector<ComponentPos> positions;
    Rect port;

    Rect component(std::size_t i) const
    {
        return {positions[i].x, positions[i].y, dims.dims[i].width, dims.dims[i].height};
    }
};

/// Anchors component 0, attaches the port and validates every placement.
/// Component 0 is checked horizontally only because its y is overwritten.
AntennaModel assemble_model(const DesignSpace& space, const DimensionSet& dims,
                            const std::vector<ComponentPos>& positions);

/// The y that the anchor rule assigns to component 0 of the given height.
double anchored_y(const DesignSpace& space, double height);

/// Metal that survives clipping, ready for rasterization or connectivity analysis.
struct MetalLayout {
    double width = 0.0;
    double height = 0.0;
    std::vector<Rect> metal;  ///< clipped components, in component order
    Rect port;                ///< retained verbatim
    std::vector<Rect> keepouts;

    friend bool operator==(const MetalLayout&, const MetalLayout&) = default;
};

MetalLayout clip_to_space(const AntennaModel& model);
/// Re-clips an already clipped layout; idempotent.
MetalLayout clip_to_space(const MetalLayout& layout);

/// Uniform draw from each component's legal interval. Component 0's y is drawn
/// too and later replaced by the anchor, so the RNG stream does not depend on it.
std::vector<ComponentPos> random_placement(const DesignSpace& space, const DimensionSet& dims,
                                           Rng& rng);
std::vector<ComponentPos> random_placement(const DesignSpace& space, const DimensionSet& dims,
                                           std::uint64_t seed);

// JSON: {space:{w,h,margin,anchor_y,port_h,keepouts:[{x,y,w,h}]}, components:[{w,h,x,y}]}
nlohmann::json space_to_json(const DesignSpace& space);
DesignSpace space_from_json(const nlohmann::json& j);
nlohmann::json dims_to_json(const DimensionSet& dims);
DimensionSet dims_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const AntennaModel& model);
AntennaModel model_from_json(const nlohmann::json& j);

void save_model(const AntennaModel& model, const std::string& path);
AntennaModel load_model(const std::string& path);

}  // namespace antgen
