#include "antgen/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace antgen {

int pixel_count(double extent, double resolution)
{
    if (!(resolution > 0.0))
        throw Error("raster resolution must be positive");
    const double cells = extent / resolution;
    const double n = std::round(cells);
    if (n < 1.0 || std::abs(cells - n) > 1e-9 * std::max(1.0, n))
        throw Error("extent " + format_double(extent) + " mm is not a whole number of " +
                    format_double(resolution) + " mm pixels");
    return static_cast<int>(n);
}

double pixel_center_x(int col, double resolution) { return (col + 0.5) * resolution; }

double pixel_center_y(int row, int height_px, double resolution)
{
    return (height_px - row - 0.5) * resolution;
}

GeometryImage blank_image(int width_px, int height_px, double resolution)
{
    GeometryImage img;
    img.width_px = width_px;
    img.height_px = height_px;
    img.resolution = resolution;
    img.data.assign(3 * img.plane_size(), 0.0f);
    float* xs = img.plane(1);
    float* ys = img.plane(2);
    const float dx = width_px > 1 ? 1.0f / static_cast<float>(width_px - 1) : 0.0f;
    const float dy = height_px > 1 ? 1.0f / static_cast<float>(height_px - 1) : 0.0f;
    for (int r = 0; r < height_px; ++r) {
        for (int c = 0; c < width_px; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * width_px + c;
            xs[i] = c == width_px - 1 && width_px > 1 ? 1.0f : static_cast<float>(c) * dx;
            ys[i] = r == height_px - 1 && height_px > 1 ? 1.0f : static_cast<float>(r) * dy;
        }
    }
    return img;
}

namespace {

void paint(GeometryImage& img, const Rect& rect, float value)
{
    if (rect.empty())
        return;
    const double res = img.resolution;
    // Candidate ranges with one pixel of slack; the exact test decides.
    const int c0 = std::max(0, static_cast<int>(std::floor(rect.x / res - 0.5)) - 1);
    const int c1 = std::min(img.width_px - 1, static_cast<int>(std::ceil(rect.right() / res)) + 1);
    const int r0 = std::max(0, static_cast<int>(std::floor(img.height_px - rect.top() / res)) - 1);
    const int r1 = std::min(img.height_px - 1,
                            static_cast<int>(std::ceil(img.height_px - rect.y / res)) + 1);
    float* g = img.plane(0);
    for (int r = r0; r <= r1; ++r) {
        const double y = pixel_center_y(r, img.height_px, res);
        if (!(y >= rect.y && y < rect.top()))
            continue;
        for (int c = c0; c <= c1; ++c) {
            const double x = pixel_center_x(c, res);
            if (x >= rect.x && x < rect.right())
                g[static_cast<std::size_t>(r) * img.width_px + c] = value;
        }
    }
}

}  // namespace

GeometryImage rasterize(const MetalLayout& layout, double resolution)
{
    const int w = pixel_count(layout.width, resolution);
    const int h = pixel_count(layout.height, resolution);
    GeometryImage img = blank_image(w, h, resolution);
    for (const auto& m : layout.metal)
        paint(img, m, kMetal);
    for (const auto& k : layout.keepouts)
        paint(img, k, kMetal);
    paint(img, layout.port, kPort);
    return img;
}

GeometryImage rasterize(const AntennaModel& model, double resolution)
{
    return rasterize(clip_to_space(model), resolution);
}

namespace {

unsigned char to_gray(float v)
{
    if (v == kMetal)
        return 255;
    if (v == kPort)
        return 128;
    return 0;
}

}  // namespace

std::string image_digest(const GeometryImage& img)
{
    std::string bytes = std::to_string(img.width_px) + "x" + std::to_string(img.height_px) + ":";
    bytes.reserve(bytes.size() + img.plane_size());
    const float* g = img.plane(0);
    for (std::size_t i = 0; i < img.plane_size(); ++i)
        bytes.push_back(static_cast<char>(to_gray(g[i])));
    return to_hex64(fnv1a64(bytes));
}

void write_pgm(const GeometryImage& img, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot write " + path);
    out << "P5\n" << img.width_px << ' ' << img.height_px << "\n255\n";
    const float* g = img.plane(0);
    std::string row(img.plane_size(), '\0');
    for (std::size_t i = 0; i < img.plane_size(); ++i)
        row[i] = static_cast<char>(to_gray(g[i]));
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
}

GeometryImage read_pgm(const std::string& path, double resolution)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255)
        throw Error(path + ": not an 8-bit binary PGM");
    in.get();
    std::string bytes(static_cast<std::size_t>(w) * h, '\0');
    in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
        throw Error(path + ": truncated pixel data");
    GeometryImage img = blank_image(w, h, resolution);
    float* g = img.plane(0);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        const auto v = static_cast<unsigned char>(bytes[i]);
        g[i] = v == 255 ? kMetal : (v == 128 ? kPort : kSubstrate);
    }
    return img;
}

}  // namespace antgen
