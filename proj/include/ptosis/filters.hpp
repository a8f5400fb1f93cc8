#pragma once

#include <array>
#include <filesystem>
#include <string_view>

#include "ptosis/image.hpp"

namespace ptosis::imaging {

/// out = round(255 * (in/255)^gamma). Throws ParameterError for gamma <= 0.
GrayImage gamma_correct(const GrayImage& img, double gamma);

/// CDF remap: out(v) = round((cdf(v) - cdf_min) / (N - cdf_min) * 255).
/// A constant image is returned unchanged (the formula is 0/0 there).
GrayImage hist_equalize(const GrayImage& img);

/// Binary edge map (255 = edge). Gaussian blur, Sobel gradients, non-maximum
/// suppression, double threshold with hysteresis. Gradient magnitudes are
/// normalized so an ideal intensity step of height H peaks at magnitude H
/// regardless of sigma, which keeps lo/hi on the 8-bit intensity scale.
GrayImage canny_edges(const GrayImage& img, double sigma, double lo, double hi);

/// Harris response R = det(M) - k*trace(M)^2 on the Gaussian-weighted
/// structure tensor, min-max rescaled to [0,255] (all zero when flat).
GrayImage harris_response(const GrayImage& img, double k, double sigma);

/// blur(sigma1) - blur(sigma2) + 128, clamped. Requires 0 < sigma1 < sigma2.
GrayImage difference_of_gaussians(const GrayImage& img, double sigma1, double sigma2);

struct FilterParams {
    double gamma_hi = 1.5;          // second channel; third uses 1/gamma_hi
    double canny_sigma = 1.0;
    double canny_lo = 50.0;
    double canny_hi = 100.0;
    double harris_k = 0.04;
    double harris_sigma = 1.0;
    double dog_sigma1 = 1.0;
    double dog_sigma2 = 2.0;
};

/// 7-plane channel stack fed to an external deep-model trainer.
struct FeatureStack {
    static constexpr int kChannels = 7;
    static constexpr std::array<std::string_view, kChannels> kChannelNames = {
        "grayscale", "gamma_1.5", "gamma_1/1.5", "histeq", "canny", "harris", "dog"};

    int width = 0;
    int height = 0;
    std::array<GrayImage, kChannels> channels;
};

/// Channel order fixed: [grayscale, gamma(1.5), gamma(1/1.5), histeq, canny,
/// harris, dog].
FeatureStack build_feature_stack(const GrayImage& img, const FilterParams& params = {});

enum class StackFormat {
    raw,   // single binary file, see docs/FORMATS.md
    pgms,  // 7 concatenated P5 images in one file
};

void write_feature_stack(const FeatureStack& stack, const std::filesystem::path& path,
                         StackFormat format = StackFormat::raw);
FeatureStack read_feature_stack(const std::filesystem::path& path);

}  // namespace ptosis::imaging
