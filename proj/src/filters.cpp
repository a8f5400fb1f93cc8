#include "ptosis/filters.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <fstream>
#include <numbers>
#include <vector>

#include "ptosis/errors.hpp"

namespace ptosis::imaging {

namespace {

std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

std::vector<float> to_float(const GrayImage& img) {
    std::vector<float> out(img.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>(img.data[i]);
    }
    return out;
}

// Separable Gaussian with replicate-edge padding; radius = ceil(3*sigma).
std::vector<float> gaussian_blur(const std::vector<float>& src, int w, int h, double sigma) {
    if (sigma <= 0.0) {
        return src;
    }
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<float> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(i * i) / (2.0 * sigma * sigma));
        kernel[i + radius] = static_cast<float>(v);
        sum += v;
    }
    for (float& k : kernel) {
        k = static_cast<float>(k / sum);
    }

    std::vector<float> tmp(src.size());
    std::vector<float> dst(src.size());
    for (int y = 0; y < h; ++y) {
        const float* row = &src[static_cast<std::size_t>(y) * w];
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -radius; i <= radius; ++i) {
                const int xi = std::clamp(x + i, 0, w - 1);
                acc += row[xi] * kernel[i + radius];
            }
            tmp[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            float acc = 0.0f;
            for (int i = -radius; i <= radius; ++i) {
                const int yi = std::clamp(y + i, 0, h - 1);
                acc += tmp[static_cast<std::size_t>(yi) * w + x] * kernel[i + radius];
            }
            dst[static_cast<std::size_t>(y) * w + x] = acc;
        }
    }
    return dst;
}

// Sobel gradients with replicate-edge padding.
void sobel(const std::vector<float>& src, int w, int h, std::vector<float>& gx,
           std::vector<float>& gy) {
    gx.assign(src.size(), 0.0f);
    gy.assign(src.size(), 0.0f);
    auto at = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return src[static_cast<std::size_t>(y) * w + x];
    };
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float tl = at(x - 1, y - 1), t = at(x, y - 1), tr = at(x + 1, y - 1);
            const float l = at(x - 1, y), r = at(x + 1, y);
            const float bl = at(x - 1, y + 1), b = at(x, y + 1), br = at(x + 1, y + 1);
            gx[static_cast<std::size_t>(y) * w + x] = (tr + 2 * r + br) - (tl + 2 * l + bl);
            gy[static_cast<std::size_t>(y) * w + x] = (bl + 2 * b + br) - (tl + 2 * t + tr);
        }
    }
}

}  // namespace

GrayImage gamma_correct(const GrayImage& img, double gamma) {
    if (!(gamma > 0.0)) {
        throw ParameterError("gamma_correct: gamma must be positive");
    }
    std::array<std::uint8_t, 256> lut;
    for (int v = 0; v < 256; ++v) {
        lut[v] = clamp_u8(std::round(255.0 * std::pow(v / 255.0, gamma)));
    }
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = lut[img.data[i]];
    }
    return out;
}

GrayImage hist_equalize(const GrayImage& img) {
    std::array<std::size_t, 256> hist{};
    for (std::uint8_t v : img.data) {
        hist[v]++;
    }
    std::array<std::size_t, 256> cdf{};
    std::size_t running = 0;
    std::size_t cdf_min = 0;
    for (int v = 0; v < 256; ++v) {
        running += hist[v];
        cdf[v] = running;
        if (cdf_min == 0 && running > 0) {
            cdf_min = running;
        }
    }
    const std::size_t n = img.pixel_count();
    if (cdf_min == n) {
        return img;  // constant image: remap formula degenerates to 0/0
    }
    std::array<std::uint8_t, 256> lut{};
    const double denom = static_cast<double>(n - cdf_min);
    for (int v = 0; v < 256; ++v) {
        if (hist[v] == 0) {
            continue;
        }
        lut[v] = clamp_u8(std::round(static_cast<double>(cdf[v] - cdf_min) / denom * 255.0));
    }
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        out.data[i] = lut[img.data[i]];
    }
    return out;
}

GrayImage canny_edges(const GrayImage& img, double sigma, double lo, double hi) {
    if (lo < 0.0 || lo > hi) {
        throw ParameterError("canny_edges: thresholds must satisfy 0 <= lo <= hi");
    }
    const int w = img.width;
    const int h = img.height;
    const std::vector<float> blurred = gaussian_blur(to_float(img), w, h, sigma);
    std::vector<float> gx;
    std::vector<float> gy;
    sobel(blurred, w, h, gx, gy);

    // Normalize so an ideal step of height H peaks at magnitude H for any
    // blur sigma; lo/hi then live on the 8-bit intensity scale. The peak
    // Sobel/4 response of a blurred unit step is K[0] + K[1] of the blur
    // kernel.
    double step_response = 1.0;
    if (sigma > 0.0) {
        const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
        double z = 1.0;
        for (int i = 1; i <= radius; ++i) {
            z += 2.0 * std::exp(-(i * i) / (2.0 * sigma * sigma));
        }
        step_response = (1.0 + std::exp(-1.0 / (2.0 * sigma * sigma))) / z;
    }
    const float scale = static_cast<float>(0.25 / step_response);
    std::vector<float> mag(img.pixel_count());
    for (std::size_t i = 0; i < mag.size(); ++i) {
        mag[i] = scale * std::hypot(gx[i], gy[i]);
    }

    auto mag_at = [&](int x, int y) -> float {
        if (x < 0 || x >= w || y < 0 || y >= h) {
            return 0.0f;
        }
        return mag[static_cast<std::size_t>(y) * w + x];
    };

    // Non-maximum suppression along the quantized gradient direction.
    std::vector<std::uint8_t> state(img.pixel_count(), 0);  // 0 none, 1 weak, 2 strong
    std::deque<std::size_t> queue;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t idx = static_cast<std::size_t>(y) * w + x;
            const float m = mag[idx];
            if (m <= 0.0f || m < lo) {
                continue;
            }
            const double angle = std::atan2(gy[idx], gx[idx]);
            double deg = angle * 180.0 / std::numbers::pi;
            if (deg < 0.0) {
                deg += 180.0;
            }
            int dx = 1, dy = 0;
            if (deg >= 22.5 && deg < 67.5) {
                dx = 1;
                dy = 1;
            } else if (deg >= 67.5 && deg < 112.5) {
                dx = 0;
                dy = 1;
            } else if (deg >= 112.5 && deg < 157.5) {
                dx = -1;
                dy = 1;
            }
            if (m < mag_at(x + dx, y + dy) || m < mag_at(x - dx, y - dy)) {
                continue;
            }
            if (m >= hi) {
                state[idx] = 2;
                queue.push_back(idx);
            } else {
                state[idx] = 1;
            }
        }
    }

    // Hysteresis: promote weak pixels 8-connected to a strong one.
    GrayImage out(w, h, 0);
    while (!queue.empty()) {
        const std::size_t idx = queue.front();
        queue.pop_front();
        const int x = static_cast<int>(idx % w);
        const int y = static_cast<int>(idx / w);
        out.data[idx] = 255;
        for (int ny = y - 1; ny <= y + 1; ++ny) {
            for (int nx = x - 1; nx <= x + 1; ++nx) {
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) {
                    continue;
                }
                const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                if (state[nidx] == 1) {
                    state[nidx] = 2;
                    queue.push_back(nidx);
                }
            }
        }
    }
    return out;
}

GrayImage harris_response(const GrayImage& img, double k, double sigma) {
    const int w = img.width;
    const int h = img.height;
    const std::vector<float> src = to_float(img);
    std::vector<float> gx;
    std::vector<float> gy;
    sobel(src, w, h, gx, gy);

    std::vector<float> xx(img.pixel_count());
    std::vector<float> yy(img.pixel_count());
    std::vector<float> xy(img.pixel_count());
    for (std::size_t i = 0; i < xx.size(); ++i) {
        xx[i] = gx[i] * gx[i];
        yy[i] = gy[i] * gy[i];
        xy[i] = gx[i] * gy[i];
    }
    const std::vector<float> sxx = gaussian_blur(xx, w, h, sigma);
    const std::vector<float> syy = gaussian_blur(yy, w, h, sigma);
    const std::vector<float> sxy = gaussian_blur(xy, w, h, sigma);

    std::vector<double> response(img.pixel_count());
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < response.size(); ++i) {
        const double a = sxx[i];
        const double b = syy[i];
        const double c = sxy[i];
        const double r = a * b - c * c - k * (a + b) * (a + b);
        response[i] = r;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }

    GrayImage out(w, h, 0);
    const double range = hi - lo;
    if (range < 1e-12) {
        return out;  // flat response (constant input)
    }
    for (std::size_t i = 0; i < response.size(); ++i) {
        out.data[i] = clamp_u8(std::round((response[i] - lo) / range * 255.0));
    }
    return out;
}

GrayImage difference_of_gaussians(const GrayImage& img, double sigma1, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma1 < sigma2)) {
        throw ParameterError("difference_of_gaussians: requires 0 < sigma1 < sigma2");
    }
    const std::vector<float> src = to_float(img);
    const std::vector<float> a = gaussian_blur(src, img.width, img.height, sigma1);
    const std::vector<float> b = gaussian_blur(src, img.width, img.height, sigma2);
    GrayImage out(img.width, img.height);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = clamp_u8(std::round(static_cast<double>(a[i]) - b[i] + 128.0));
    }
    return out;
}

FeatureStack build_feature_stack(const GrayImage& img, const FilterParams& params) {
    FeatureStack stack;
    stack.width = img.width;
    stack.height = img.height;
    stack.channels[0] = img;
    stack.channels[1] = gamma_correct(img, params.gamma_hi);
    stack.channels[2] = gamma_correct(img, 1.0 / params.gamma_hi);
    stack.channels[3] = hist_equalize(img);
    stack.channels[4] = canny_edges(img, params.canny_sigma, params.canny_lo, params.canny_hi);
    stack.channels[5] = harris_response(img, params.harris_k, params.harris_sigma);
    stack.channels[6] = difference_of_gaussians(img, params.dog_sigma1, params.dog_sigma2);
    return stack;
}

void write_feature_stack(const FeatureStack& stack, const std::filesystem::path& path,
                         StackFormat format) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("feature stack: cannot open " + tmp.string() + " for writing");
        }
        if (format == StackFormat::raw) {
            out << "FSTACK " << stack.width << " " << stack.height << " "
                << FeatureStack::kChannels << "\n";
            for (const GrayImage& ch : stack.channels) {
                out.write(reinterpret_cast<const char*>(ch.data.data()),
                          static_cast<std::streamsize>(ch.data.size()));
            }
        } else {
            for (const GrayImage& ch : stack.channels) {
                out << "P5\n" << ch.width << " " << ch.height << "\n255\n";
                out.write(reinterpret_cast<const char*>(ch.data.data()),
                          static_cast<std::streamsize>(ch.data.size()));
            }
        }
        if (!out) {
            throw IoError("feature stack: write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw IoError("feature stack: rename to " + path.string() + " failed: " + ec.message());
    }
}

FeatureStack read_feature_stack(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("feature stack: cannot open " + path.string());
    }
    std::string magic;
    in >> magic;
    FeatureStack stack;
    if (magic == "FSTACK") {
        int w = 0, h = 0, c = 0;
        if (!(in >> w >> h >> c)) {
            throw SchemaError("feature stack: malformed header in " + path.string());
        }
        if (c != FeatureStack::kChannels || w <= 0 || h <= 0) {
            throw SchemaError("feature stack: unsupported layout in " + path.string());
        }
        in.get();
        stack.width = w;
        stack.height = h;
        for (GrayImage& ch : stack.channels) {
            ch = GrayImage(w, h);
            in.read(reinterpret_cast<char*>(ch.data.data()),
                    static_cast<std::streamsize>(ch.data.size()));
            if (in.gcount() != static_cast<std::streamsize>(ch.data.size())) {
                throw SchemaError("feature stack: truncated plane in " + path.string());
            }
        }
        return stack;
    }
    if (magic == "P5") {
        // 7 concatenated PGMs; rewind and reuse the PGM reader per plane.
        in.seekg(0);
        for (int i = 0; i < FeatureStack::kChannels; ++i) {
            std::string m;
            in >> m;
            if (m != "P5") {
                throw SchemaError("feature stack: expected 7 concatenated P5 images in " +
                                  path.string());
            }
            int w = 0, h = 0, maxval = 0;
            if (!(in >> w >> h >> maxval) || maxval != 255 || w <= 0 || h <= 0) {
                throw SchemaError("feature stack: malformed P5 header in " + path.string());
            }
            in.get();
            GrayImage ch(w, h);
            in.read(reinterpret_cast<char*>(ch.data.data()),
                    static_cast<std::streamsize>(ch.data.size()));
            if (in.gcount() != static_cast<std::streamsize>(ch.data.size())) {
                throw SchemaError("feature stack: truncated plane in " + path.string());
            }
            if (i == 0) {
                stack.width = w;
                stack.height = h;
            } else if (w != stack.width || h != stack.height) {
                throw SchemaError("feature stack: plane dimensions disagree in " + path.string());
            }
            stack.channels[i] = std::move(ch);
        }
        return stack;
    }
    throw SchemaError("feature stack: unrecognized magic '" + magic + "' in " + path.string());
}

}  // namespace ptosis::imaging
