#include "ptosis/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ptosis/errors.hpp"

namespace ptosis::imaging {

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
    if (w <= 0 || h <= 0) {
        throw ParameterError("GrayImage: dimensions must be positive");
    }
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

namespace {

// Skips whitespace and '#' comments between PGM header tokens.
int next_header_int(std::istream& in, const char* what) {
    for (;;) {
        const int c = in.peek();
        if (c == EOF) {
            throw SchemaError(std::string("pgm: unexpected end of header while reading ") + what);
        }
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        break;
    }
    int value = 0;
    if (!(in >> value)) {
        throw SchemaError(std::string("pgm: malformed ") + what);
    }
    return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("pgm: cannot open " + path.string());
    }
    std::string magic;
    in >> magic;
    if (magic != "P5") {
        throw SchemaError("pgm: " + path.string() + ": expected P5 magic, got '" + magic + "'");
    }
    const int w = next_header_int(in, "width");
    const int h = next_header_int(in, "height");
    const int maxval = next_header_int(in, "maxval");
    if (w <= 0 || h <= 0) {
        throw SchemaError("pgm: " + path.string() + ": non-positive dimensions");
    }
    if (maxval != 255) {
        throw SchemaError("pgm: " + path.string() + ": unsupported maxval " + std::to_string(maxval));
    }
    in.get();  // single whitespace byte after maxval
    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
        throw SchemaError("pgm: " + path.string() + ": truncated pixel data");
    }
    return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("pgm: cannot open " + tmp.string() + " for writing");
        }
        out << "P5\n" << img.width << " " << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.data.data()),
                  static_cast<std::streamsize>(img.data.size()));
        if (!out) {
            throw IoError("pgm: write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("pgm: rename to " + path.string() + " failed: " + ec.message());
    }
}

CropResult crop_eye_region(const GrayImage& img, std::span<const geom::Point2> six_points,
                           double margin) {
    if (six_points.size() != 6) {
        throw ParameterError("crop_eye_region: expected 6 points");
    }
    if (margin < 0.0) {
        throw ParameterError("crop_eye_region: margin must be >= 0");
    }
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = std::numeric_limits<double>::infinity();
    double max_x = -std::numeric_limits<double>::infinity();
    double max_y = -std::numeric_limits<double>::infinity();
    for (const auto& p : six_points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double pad = margin * std::max(max_x - min_x, max_y - min_y);
    int x0 = static_cast<int>(std::floor(min_x - pad));
    int y0 = static_cast<int>(std::floor(min_y - pad));
    int x1 = static_cast<int>(std::ceil(max_x + pad));
    int y1 = static_cast<int>(std::ceil(max_y + pad));
    x0 = std::max(x0, 0);
    y0 = std::max(y0, 0);
    x1 = std::min(x1, img.width - 1);
    y1 = std::min(y1, img.height - 1);
    if (x0 > x1 || y0 > y1) {
        throw RegionError("crop_eye_region: crop rectangle does not intersect the image");
    }
    GrayImage out(x1 - x0 + 1, y1 - y0 + 1);
    for (int y = y0; y <= y1; ++y) {
        const std::uint8_t* src = &img.data[static_cast<std::size_t>(y) * img.width + x0];
        std::copy(src, src + out.width, &out.data[static_cast<std::size_t>(y - y0) * out.width]);
    }
    return CropResult{std::move(out), x0, y0};
}

GrayImage mirror_horizontal(const GrayImage& img) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t* src = &img.data[static_cast<std::size_t>(y) * img.width];
        std::uint8_t* dst = &out.data[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) {
            dst[x] = src[img.width - 1 - x];
        }
    }
    return out;
}

}  // namespace ptosis::imaging
