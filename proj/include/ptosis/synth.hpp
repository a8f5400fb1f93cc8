#pragma once

#include <cstdint>
#include <vector>

#include "ptosis/clinical.hpp"
#include "ptosis/image.hpp"

namespace ptosis::synth {

using imaging::GrayImage;

/// Analytic eye scene. Lid margins are the parabolas
/// y(x) = apex_y + curvature * (x - lid_center_x)^2; the open-eye region is
/// upper(x) < y < lower(x) (y grows downward, so the upper lid needs
/// curvature > 0 and the lower lid curvature < 0). The curves must intersect
/// at two canthi.
struct EyeSceneSpec {
    int width = 320;
    int height = 240;
    geom::Point2 iris_center{160.0, 120.0};
    double iris_radius = 55.0;
    double pupil_radius = 22.0;
    double lid_center_x = 160.0;
    double upper_apex_y = 60.0;
    double upper_curvature = 0.004;
    double lower_apex_y = 180.0;
    double lower_curvature = -0.004;
    double clr_dx = 0.0;  // CLR offset from the iris center
    double clr_dy = 0.0;
    std::uint8_t skin_intensity = 170;
    std::uint8_t sclera_intensity = 225;
    std::uint8_t iris_intensity = 90;
    std::uint8_t pupil_intensity = 25;
    std::uint8_t clr_intensity = 252;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    clinical::EyeSide side = clinical::EyeSide::left;
};

/// Synthetic "ptosis" labelling convention for generated training suites.
inline constexpr double kLabelThresholdMm = 2.0;

/// Radius of the rendered corneal-reflex dot.
inline constexpr double kClrDotRadius = 2.0;

struct GroundTruth {
    double mrd1_px = 0.0;  // signed; negative when the lid covers the reference point
    double mrd1_mm = 0.0;
    double mm_per_px = 0.0;
    double iris_ratio_pct = 0.0;
    geom::Point2 clr;        // intended reflex location (iris center + offset)
    bool clr_visible = false;
    clinical::EyeLandmarks landmarks;  // sampled from the analytic curves
    int ptosis_label = 0;    // mrd1_mm < kLabelThresholdMm
};

struct RenderResult {
    GrayImage image;
    GroundTruth truth;
};

/// Renders the scene and derives its analytic ground truth. MRD1 comes from
/// dense sampling (1e4 points) of the upper-lid curve; the iris ratio uses
/// the closed-form circular-segment formula for flat (zero-curvature) lids
/// and seeded 1e6-sample Monte Carlo otherwise. When the upper lid covers the
/// reflex location the dot is omitted from the render and the ground-truth
/// MRD1 reference falls back to the iris center, matching the measurement
/// protocol.
RenderResult render_eye(const EyeSceneSpec& spec);

/// Visible iris fraction for flat lids (horizontal chords) in percent.
double analytic_flat_lid_iris_ratio(const geom::Circle& iris, double upper_y, double lower_y);

/// Monte Carlo iris fraction for arbitrary lid curves, in percent.
double monte_carlo_iris_ratio(const EyeSceneSpec& spec, long long n_samples, std::uint64_t seed);

struct SuiteOptions {
    double droop_min = 0.0;  // 0 = wide open
    double droop_max = 1.0;  // 1 = severe droop
    double sigma_min = 0.0;
    double sigma_max = 8.0;
};

/// Deterministic per-item scene derivation: same (options, seed, index) gives
/// the same spec regardless of suite size or worker count.
EyeSceneSpec suite_spec(int index, const SuiteOptions& options, std::uint64_t seed);

/// Renders n scenes; jobs > 1 renders in parallel without changing content.
std::vector<RenderResult> generate_suite(int n, const SuiteOptions& options, std::uint64_t seed,
                                         int jobs = 1);

}  // namespace ptosis::synth
