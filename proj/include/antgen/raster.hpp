#pragma once

#include "antgen/geometry.hpp"

#include <string>
#include <vector>

namespace antgen {

/// Three-plane image fed to the score classifier.
///   plane 0: 0 substrate, 0.5 port, 1 metal
///   plane 1: normalized x, 0 at the left column, 1 at the right
///   plane 2: normalized y, 0 at the top row, 1 at the bottom
/// Row 0 is the top of the design space (y = height).
struct GeometryImage {
    int width_px = 0;
    int height_px = 0;
    double resolution = 0.0;
    std::vector<float> data;  ///< plane-major, 3 * height_px * width_px

    std::size_t plane_size() const { return static_cast<std::size_t>(width_px) * height_px; }
    float at(int plane, int row, int col) const
    {
        return data[plane * plane_size() + static_cast<std::size_t>(row) * width_px + col];
    }
    const float* plane(int p) const { return data.data() + p * plane_size(); }
    float* plane(int p) { return data.data() + p * plane_size(); }

    friend bool operator==(const GeometryImage&, const GeometryImage&) = default;
};

inline constexpr float kSubstrate = 0.0f;
inline constexpr float kPort = 0.5f;
inline constexpr float kMetal = 1.0f;

/// Pixel count along a design-space edge; throws unless extent/resolution is whole.
int pixel_count(double extent, double resolution);

/// Center of pixel (row, col) in millimeters.
double pixel_center_x(int col, double resolution);
double pixel_center_y(int row, int height_px, double resolution);

/// Half-open membership test used for every pixel-center decision.
inline bool contains_point(const Rect& r, double x, double y)
{
    return x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h;
}

GeometryImage rasterize(const MetalLayout& layout, double resolution);
GeometryImage rasterize(const AntennaModel& model, double resolution);

/// Blank image of the right shape with the coordinate planes filled in.
GeometryImage blank_image(int width_px, int height_px, double resolution);

/// Digest of the geometry plane only; the coordinate planes depend on shape alone.
std::string image_digest(const GeometryImage& img);

/// Binary PGM (P5, maxval 255) of the geometry plane: 0 -> 0, 0.5 -> 128, 1 -> 255.
void write_pgm(const GeometryImage& img, const std::string& path);
GeometryImage read_pgm(const std::string& path, double resolution);

}  // namespace antgen
