#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ptosis/geometry.hpp"

namespace ptosis::imaging {

/// 8-bit single-channel raster, row-major. Pixel (x, y) sits at coordinate
/// (x, y) in landmark space (y grows downward).
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    bool operator==(const GrayImage&) const = default;
};

/// Binary PGM (P5, maxval 255). Reads throw SchemaError on malformed headers
/// and IoError on filesystem failures; writes are atomic (tmp file + rename).
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

struct CropResult {
    GrayImage image;
    // Offset of the crop origin in the source image; subtract from full-image
    // landmark coordinates to get crop-space coordinates.
    int x0 = 0;
    int y0 = 0;
};

/// Axis-aligned bounding box of the six points, expanded by
/// margin * max(box width, box height) on every side and clamped to the
/// image. Throws RegionError when the expanded box misses the image.
CropResult crop_eye_region(const GrayImage& img, std::span<const geom::Point2> six_points,
                           double margin);

/// Column j maps to column width-1-j.
GrayImage mirror_horizontal(const GrayImage& img);

}  // namespace ptosis::imaging
