#include "antgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace antgen {

namespace {

constexpr double kEps = 1e-9;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

Rect intersect(const Rect& a, const Rect& b)
{
    const double x0 = std::max(a.x, b.x);
    const double y0 = std::max(a.y, b.y);
    const double x1 = std::min(a.right(), b.right());
    const double y1 = std::min(a.top(), b.top());
    if (!(x1 > x0) || !(y1 > y0))
        return {};
    return {x0, y0, x1 - x0, y1 - y0};
}

void validate(const DesignSpace& space)
{
    if (!(space.width > 0.0) || !(space.height > 0.0))
        throw Error("design space must have positive width and height");
    if (!(space.extension_margin >= 0.0) || !(space.top_margin >= 0.0))
        throw Error("extension margins must be non-negative");
    if (!(space.anchor_y >= 0.0) || space.anchor_y > space.height)
        throw Error("anchor_y must lie in [0, height]");
    if (space.port_height && !(*space.port_height >= 0.0))
        throw Error("port height must be non-negative");
    if (!(space.min_port_height >= 0.0) || !(space.port_width > 0.0))
        throw Error("port size must be positive");
    for (const auto& k : space.keepouts)
        if (k.empty() || !finite(k.x) || !finite(k.y))
            throw Error("keepout rectangles must have positive size");
}

void validate(const DesignSpace& space, const DimensionSet& dims)
{
    validate(space);
    if (dims.dims.empty())
        throw Error("dimension set '" + dims.id + "' is empty");
    const Rect ext = space.extended_bounds();
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto& d = dims.dims[i];
        const std::string where = "dimension set '" + dims.id + "' component " + std::to_string(i + 1);
        if (!(d.width > 0.0) || !(d.height > 0.0))
            throw Error(where + ": width and height must be positive");
        if (d.width > ext.w + kEps)
            throw Error(where + ": wider than the extended area");
        if (i > 0 && d.height > ext.h + kEps)
            throw Error(where + ": taller than the extended area");
    }
}

std::string PlacementVerdict::describe() const
{
    if (legal())
        return "legal";
    std::string out;
    auto add = [&](unsigned bit, const char* name) {
        if (violations & bit) {
            if (!out.empty())
                out += ",";
            out += name;
        }
    };
    add(kLeft, "left");
    add(kRight, "right");
    add(kBottom, "bottom");
    add(kTop, "top");
    return "illegal (" + out + " edge)";
}

PlacementVerdict validate_placement(const DesignSpace& space, const ComponentDims& dims,
                                    const ComponentPos& pos)
{
    const Rect ext = space.extended_bounds();
    PlacementVerdict v;
    if (!finite(pos.x) || pos.x < ext.x - kEps)
        v.violations |= kLeft;
    if (!finite(pos.x) || pos.x + dims.width > ext.right() + kEps)
        v.violations |= kRight;
    if (!finite(pos.y) || pos.y < ext.y - kEps)
        v.violations |= kBottom;
    if (!finite(pos.y) || pos.y + dims.height > ext.top() + kEps)
        v.violations |= kTop;
    return v;
}

double anchored_y(const DesignSpace& space, double height)
{
    return space.anchor_mode == AnchorMode::Center ? space.anchor_y - 0.5 * height : space.anchor_y;
}

AntennaModel assemble_model(const DesignSpace& space, const DimensionSet& dims,
                            const std::vector<ComponentPos>& positions)
{
    validate(space, dims);
    if (positions.size() != dims.size())
        throw Error("dimension set '" + dims.id + "' has " + std::to_string(dims.size()) +
                    " components but " + std::to_string(positions.size()) + " positions were given");

    AntennaModel model{space, dims, positions, {}};
    auto& first = model.positions.front();
    const auto& d0 = dims.dims.front();
    first.y = anchored_y(space, d0.height);

    for (std::size_t i = 0; i < dims.size(); ++i) {
        auto verdict = validate_placement(space, dims.dims[i], model.positions[i]);
        if (i == 0)
            verdict.violations &= (kLeft | kRight);
        if (!verdict.legal())
            throw Error("component " + std::to_string(i + 1) + " placement is " + verdict.describe());
    }
    if (first.y + d0.height <= 0.0)
        throw Error("component 1 anchored entirely below y = 0");

    const double feed_w = std::min(d0.width, space.port_width);
    const double feed_h = space.port_height ? *space.port_height
                                            : std::max(first.y, space.min_port_height);
    model.port = {first.x + 0.5 * d0.width - 0.5 * feed_w, 0.0, feed_w, feed_h};
    return model;
}

MetalLayout clip_to_space(const AntennaModel& model)
{
    MetalLayout out;
    out.width = model.space.width;
    out.height = model.space.height;
    out.port = model.port;
    out.keepouts = model.space.keepouts;
    const Rect bounds = model.space.bounds();
    for (std::size_t i = 0; i < model.dims.size(); ++i) {
        Rect r = intersect(model.component(i), bounds);
        if (!r.empty())
            out.metal.push_back(r);
    }
    return out;
}

MetalLayout clip_to_space(const MetalLayout& layout)
{
    MetalLayout out = layout;
    out.metal.clear();
    const Rect bounds{0.0, 0.0, layout.width, layout.height};
    for (const auto& m : layout.metal) {
        Rect r = intersect(m, bounds);
        if (!r.empty())
            out.metal.push_back(r);
    }
    return out;
}

std::vector<ComponentPos> random_placement(const DesignSpace& space, const DimensionSet& dims,
                                           Rng& rng)
{
    const Rect ext = space.extended_bounds();
    std::vector<ComponentPos> out;
    out.reserve(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const auto& d = dims.dims[i];
        const double x_hi = ext.right() - d.width;
        const double y_hi = ext.top() - d.height;
        // Component 0's y is overwritten by the anchor, so only its x range matters.
        if (x_hi < ext.x - kEps || (i > 0 && y_hi < ext.y - kEps))
            throw Error("component " + std::to_string(i + 1) + " of set '" + dims.id +
                        "' has no legal position");
        const double x = rng.uniform(ext.x, std::max(ext.x, x_hi));
        const double y = rng.uniform(ext.y, std::max(ext.y, y_hi));
        out.push_back({x, y});
    }
    return out;
}

std::vector<ComponentPos> random_placement(const DesignSpace& space, const DimensionSet& dims,
                                           std::uint64_t seed)
{
    Rng rng(seed);
    return random_placement(space, dims, rng);
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json rect_to_json(const Rect& r) { return {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

Rect rect_from_json(const nlohmann::json& j)
{
    return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("w").get<double>(),
            j.at("h").get<double>()};
}

}  // namespace

nlohmann::json space_to_json(const DesignSpace& s)
{
    nlohmann::json j{{"w", s.width},
                     {"h", s.height},
                     {"margin", s.extension_margin},
                     {"top_margin", s.top_margin},
                     {"anchor_y", s.anchor_y},
                     {"anchor_mode", s.anchor_mode == AnchorMode::Center ? "center" : "lower_edge"},
                     {"min_port_h", s.min_port_height},
                     {"port_w", s.port_width}};
    j["port_h"] = s.port_height ? nlohmann::json(*s.port_height) : nlohmann::json(nullptr);
    j["keepouts"] = nlohmann::json::array();
    for (const auto& k : s.keepouts)
        j["keepouts"].push_back(rect_to_json(k));
    return j;
}

DesignSpace space_from_json(const nlohmann::json& j)
{
    DesignSpace s;
    s.width = j.at("w").get<double>();
    s.height = j.at("h").get<double>();
    s.extension_margin = j.value("margin", s.extension_margin);
    s.top_margin = j.value("top_margin", s.top_margin);
    s.anchor_y = j.value("anchor_y", s.anchor_y);
    const std::string mode = j.value("anchor_mode", std::string("center"));
    if (mode == "center")
        s.anchor_mode = AnchorMode::Center;
    else if (mode == "lower_edge")
        s.anchor_mode = AnchorMode::LowerEdge;
    else
        throw Error("unknown anchor_mode '" + mode + "'");
    if (j.contains("port_h") && !j.at("port_h").is_null())
        s.port_height = j.at("port_h").get<double>();
    s.min_port_height = j.value("min_port_h", s.min_port_height);
    s.port_width = j.value("port_w", s.port_width);
    if (j.contains("keepouts"))
        for (const auto& k : j.at("keepouts"))
            s.keepouts.push_back(rect_from_json(k));
    validate(s);
    return s;
}

nlohmann::json dims_to_json(const DimensionSet& d)
{
    nlohmann::json j{{"id", d.id}, {"dims", nlohmann::json::array()}};
    for (const auto& c : d.dims)
        j["dims"].push_back({{"w", c.width}, {"h", c.height}});
    return j;
}

DimensionSet dims_from_json(const nlohmann::json& j)
{
    DimensionSet d;
    d.id = j.value("id", std::string("set"));
    for (const auto& c : j.at("dims"))
        d.dims.push_back({c.at("w").get<double>(), c.at("h").get<double>()});
    if (d.dims.empty())
        throw Error("dimension set '" + d.id + "' is empty");
    return d;
}

nlohmann::json model_to_json(const AntennaModel& m)
{
    nlohmann::json j{{"space", space_to_json(m.space)}, {"dims_id", m.dims.id}};
    j["components"] = nlohmann::json::array();
    for (std::size_t i = 0; i < m.dims.size(); ++i) {
        j["components"].push_back({{"w", m.dims.dims[i].width},
                                   {"h", m.dims.dims[i].height},
                                   {"x", m.positions[i].x},
                                   {"y", m.positions[i].y}});
    }
    return j;
}

AntennaModel model_from_json(const nlohmann::json& j)
{
    DesignSpace space = space_from_json(j.at("space"));
    DimensionSet dims;
    dims.id = j.value("dims_id", std::string("model"));
    std::vector<ComponentPos> pos;
    for (const auto& c : j.at("components")) {
        dims.dims.push_back({c.at("w").get<double>(), c.at("h").get<double>()});
        pos.push_back({c.at("x").get<double>(), c.at("y").get<double>()});
    }
    return assemble_model(space, dims, pos);
}

void save_model(const AntennaModel& model, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << model_to_json(model).dump(2) << '\n';
}

AntennaModel load_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read " + path);
    return model_from_json(nlohmann::json::parse(in));
}

}  // namespace antgen
