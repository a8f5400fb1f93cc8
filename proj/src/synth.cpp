#include "ptosis/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "ptosis/errors.hpp"
#include "ptosis/rand.hpp"

namespace ptosis::synth {

namespace {

constexpr long long kMrd1CurveSamples = 10000;
constexpr long long kIrisRatioMcSamples = 1000000;

double parabola(double apex_y, double curvature, double center_x, double x) {
    const double d = x - center_x;
    return apex_y + curvature * d * d;
}

struct Scene {
    const EyeSceneSpec& spec;
    double canthus_half_span;  // canthi at lid_center_x +/- this
    double canthus_y;

    double upper(double x) const {
        return parabola(spec.upper_apex_y, spec.upper_curvature, spec.lid_center_x, x);
    }
    double lower(double x) const {
        return parabola(spec.lower_apex_y, spec.lower_curvature, spec.lid_center_x, x);
    }
    bool open(double x, double y) const { return upper(x) < y && y < lower(x); }
};

// need_canthi: rendering and landmark sampling require the lid curves to
// intersect; the Monte Carlo area helper only needs the open-region test.
Scene validate(const EyeSceneSpec& spec, bool need_canthi = true) {
    if (spec.width <= 0 || spec.height <= 0) {
        throw ParameterError("eye scene: image dimensions must be positive");
    }
    if (!(spec.iris_radius > 0.0) || !(spec.pupil_radius > 0.0) ||
        !(spec.pupil_radius < spec.iris_radius)) {
        throw ParameterError("eye scene: requires 0 < pupil radius < iris radius");
    }
    if (!(spec.upper_apex_y < spec.lower_apex_y)) {
        throw ParameterError("eye scene: upper-lid apex must be above the lower-lid apex");
    }
    if (std::hypot(spec.clr_dx, spec.clr_dy) >= spec.iris_radius) {
        throw ParameterError("eye scene: CLR offset magnitude must stay inside the iris");
    }
    if (spec.noise_sigma < 0.0) {
        throw ParameterError("eye scene: noise sigma must be >= 0");
    }
    Scene s{spec, 0.0, 0.0};
    if (need_canthi) {
        if (!(spec.upper_curvature > spec.lower_curvature)) {
            throw ParameterError("eye scene: lid curves never intersect");
        }
        s.canthus_half_span = std::sqrt((spec.lower_apex_y - spec.upper_apex_y) /
                                        (spec.upper_curvature - spec.lower_curvature));
        s.canthus_y = s.upper(spec.lid_center_x + s.canthus_half_span);
    }
    return s;
}

clinical::EyeLandmarks sample_landmarks(const Scene& scene) {
    const EyeSceneSpec& spec = scene.spec;
    clinical::EyeLandmarks lm;
    lm.side = spec.side;

    const double x_temporal = spec.side == clinical::EyeSide::left
                                  ? spec.lid_center_x - scene.canthus_half_span
                                  : spec.lid_center_x + scene.canthus_half_span;
    const double x_nasal = 2.0 * spec.lid_center_x - x_temporal;

    // 0..8: upper lid temporal->nasal (canthi included).
    for (int i = 0; i <= 8; ++i) {
        const double x = x_temporal + (x_nasal - x_temporal) * i / 8.0;
        lm.contour[i] = {x, scene.upper(x)};
    }
    // 9..15: lower lid nasal->temporal (canthi excluded).
    for (int j = 1; j <= 7; ++j) {
        const double x = x_nasal + (x_temporal - x_nasal) * j / 8.0;
        lm.contour[8 + j] = {x, scene.lower(x)};
    }

    const geom::Point2 c = spec.iris_center;
    const double r = spec.iris_radius;
    const double temporal_sign = spec.side == clinical::EyeSide::left ? -1.0 : 1.0;
    lm.iris[geom::kIrisCenter] = c;
    lm.iris[geom::kIrisTemporal] = {c.x + temporal_sign * r, c.y};
    lm.iris[geom::kIrisSuperior] = {c.x, c.y - r};
    lm.iris[geom::kIrisNasal] = {c.x - temporal_sign * r, c.y};
    lm.iris[geom::kIrisInferior] = {c.x, c.y + r};
    return lm;
}

// Signed distance from the reference point to the densely sampled upper-lid
// curve, negative when the nearest curve point lies below the reference.
double ground_truth_mrd1(const Scene& scene, geom::Point2 reference) {
    const double x0 = scene.spec.lid_center_x - scene.canthus_half_span;
    const double x1 = scene.spec.lid_center_x + scene.canthus_half_span;
    double best = std::numeric_limits<double>::infinity();
    geom::Point2 closest{x0, scene.upper(x0)};
    for (long long i = 0; i <= kMrd1CurveSamples; ++i) {
        const double x = x0 + (x1 - x0) * static_cast<double>(i) / kMrd1CurveSamples;
        const geom::Point2 p{x, scene.upper(x)};
        const double d = geom::distance(p, reference);
        if (d < best) {
            best = d;
            closest = p;
        }
    }
    return closest.y > reference.y ? -best : best;
}

// Area of the disc below the horizontal line y = line_y.
double disc_area_below(const geom::Circle& disc, double line_y) {
    const double r = disc.radius;
    const double u = std::clamp(line_y - disc.center.y, -r, r);
    return u * std::sqrt(r * r - u * u) + r * r * std::acos(-u / r);
}

bool flat_lids_apply(const Scene& scene, double& upper_y, double& lower_y) {
    const EyeSceneSpec& spec = scene.spec;
    const geom::Circle iris{spec.iris_center, spec.iris_radius};
    const double span_lo = iris.center.x - iris.radius;
    const double span_hi = iris.center.x + iris.radius;

    const bool upper_flat = spec.upper_curvature == 0.0;
    const bool lower_flat = spec.lower_curvature == 0.0;
    // Convex/concave curves reach their span extrema at the interval ends.
    const double upper_max = std::max(scene.upper(span_lo), scene.upper(span_hi));
    const double lower_min = std::min(scene.lower(span_lo), scene.lower(span_hi));
    const bool upper_clear = upper_max <= iris.center.y - iris.radius;
    const bool lower_clear = lower_min >= iris.center.y + iris.radius;

    if ((upper_flat || upper_clear) && (lower_flat || lower_clear)) {
        upper_y = upper_flat ? spec.upper_apex_y : iris.center.y - iris.radius;
        lower_y = lower_flat ? spec.lower_apex_y : iris.center.y + iris.radius;
        return true;
    }
    return false;
}

}  // namespace

double analytic_flat_lid_iris_ratio(const geom::Circle& iris, double upper_y, double lower_y) {
    if (!(iris.radius > 0.0)) {
        throw ParameterError("iris ratio: radius must be positive");
    }
    const double visible = disc_area_below(iris, lower_y) - disc_area_below(iris, upper_y);
    const double disc = std::numbers::pi * iris.radius * iris.radius;
    return std::clamp(100.0 * visible / disc, 0.0, 100.0);
}

double monte_carlo_iris_ratio(const EyeSceneSpec& spec, long long n_samples, std::uint64_t seed) {
    const Scene scene = validate(spec, /*need_canthi=*/false);
    SplitMix64 rng(seed);
    long long hits = 0;
    const double two_pi = 2.0 * std::numbers::pi;
    for (long long i = 0; i < n_samples; ++i) {
        const double rr = spec.iris_radius * std::sqrt(rng.next_double());
        const double theta = two_pi * rng.next_double();
        const double x = spec.iris_center.x + rr * std::cos(theta);
        const double y = spec.iris_center.y + rr * std::sin(theta);
        hits += scene.open(x, y) ? 1 : 0;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(n_samples);
}

RenderResult render_eye(const EyeSceneSpec& spec) {
    const Scene scene = validate(spec);

    RenderResult out;
    out.image = GrayImage(spec.width, spec.height, spec.skin_intensity);
    GrayImage& img = out.image;

    const geom::Point2 clr{spec.iris_center.x + spec.clr_dx, spec.iris_center.y + spec.clr_dy};
    const bool clr_visible = scene.open(clr.x, clr.y);
    const double iris_r2 = spec.iris_radius * spec.iris_radius;
    const double pupil_r2 = spec.pupil_radius * spec.pupil_radius;
    const double dot_r2 = kClrDotRadius * kClrDotRadius;

    for (int x = 0; x < spec.width; ++x) {
        const double yu = scene.upper(x);
        const double yl = scene.lower(x);
        const int y_begin =
            static_cast<int>(std::clamp(std::floor(yu), 0.0, static_cast<double>(spec.height - 1)));
        const int y_end =
            static_cast<int>(std::clamp(std::ceil(yl), 0.0, static_cast<double>(spec.height - 1)));
        for (int y = y_begin; y <= y_end; ++y) {
            if (!(yu < y && y < yl)) {
                continue;
            }
            const double dx = x - spec.iris_center.x;
            const double dy = y - spec.iris_center.y;
            const double d2 = dx * dx + dy * dy;
            std::uint8_t v = spec.sclera_intensity;
            if (d2 <= pupil_r2) {
                v = spec.pupil_intensity;
            } else if (d2 <= iris_r2) {
                v = spec.iris_intensity;
            }
            if (clr_visible) {
                const double cx = x - clr.x;
                const double cy = y - clr.y;
                if (cx * cx + cy * cy <= dot_r2) {
                    v = spec.clr_intensity;
                }
            }
            img.at(x, y) = v;
        }
    }

    if (spec.noise_sigma > 0.0) {
        SplitMix64 rng(spec.seed);
        for (std::uint8_t& v : img.data) {
            const double noisy = v + spec.noise_sigma * rng.next_normal();
            v = static_cast<std::uint8_t>(std::clamp(std::round(noisy), 0.0, 255.0));
        }
    }

    GroundTruth& truth = out.truth;
    truth.landmarks = sample_landmarks(scene);
    truth.clr = clr;
    truth.clr_visible = clr_visible;

    // Covered reflex: the measurement protocol falls back to the iris center,
    // so the ground truth adopts the same reference point.
    const geom::Point2 reference = clr_visible ? clr : spec.iris_center;
    truth.mrd1_px = ground_truth_mrd1(scene, reference);
    truth.mm_per_px = clinical::CalibrationModel{}.iris_diameter_mm / (2.0 * spec.iris_radius);
    truth.mrd1_mm = truth.mrd1_px * truth.mm_per_px;

    double flat_upper = 0.0;
    double flat_lower = 0.0;
    if (flat_lids_apply(scene, flat_upper, flat_lower)) {
        truth.iris_ratio_pct = analytic_flat_lid_iris_ratio({spec.iris_center, spec.iris_radius},
                                                            flat_upper, flat_lower);
    } else {
        truth.iris_ratio_pct =
            monte_carlo_iris_ratio(spec, kIrisRatioMcSamples, derive_seed(spec.seed, 0x49524953));
    }
    truth.ptosis_label = truth.mrd1_mm < kLabelThresholdMm ? 1 : 0;
    return out;
}

EyeSceneSpec suite_spec(int index, const SuiteOptions& options, std::uint64_t seed) {
    if (!(options.droop_min <= options.droop_max) || !(options.sigma_min <= options.sigma_max) ||
        options.sigma_min < 0.0) {
        throw ParameterError("suite options: invalid droop or sigma range");
    }
    SplitMix64 rng(derive_seed(seed, static_cast<std::uint64_t>(index)));

    // Draw order is fixed; it is part of the determinism contract.
    const double r = rng.next_uniform(40.0, 80.0);
    const double droop = rng.next_uniform(options.droop_min, options.droop_max);
    const double canthus_drop = rng.next_uniform(0.08, 0.22);   // canthus height below center, in r
    const double lower_reach = rng.next_uniform(0.80, 1.05);    // lower apex below center, in r
    const double half_span = rng.next_uniform(1.6, 2.0) * r;
    const double pupil = rng.next_uniform(0.30, 0.45) * r;
    const double clr_dx = rng.next_uniform(-0.15, 0.15) * r;
    const double clr_dy = rng.next_uniform(-0.15, 0.15) * r;
    const double skin = rng.next_uniform(140.0, 190.0);
    const double sclera = rng.next_uniform(200.0, 235.0);
    const double iris = rng.next_uniform(60.0, 120.0);
    const double pupil_tone = rng.next_uniform(10.0, 40.0);
    const double sigma = rng.next_uniform(options.sigma_min, options.sigma_max);
    const std::uint64_t noise_seed = rng.next_u64();

    // Upper apex height above center in iris radii: droop 0 -> wide open,
    // droop 1 -> apex well below center. Clamped so the lid curves keep a
    // positive upper curvature.
    const double lift_max = 1.05;
    const double lift_min = -0.45;
    const double lift = std::max(lift_max - droop * (lift_max - lift_min), -canthus_drop + 0.06);

    EyeSceneSpec spec;
    spec.width = static_cast<int>(std::ceil(2.0 * half_span)) + 60;
    spec.height = static_cast<int>(std::ceil(2.7 * r)) + 40;
    spec.iris_center = {spec.width / 2.0, spec.height / 2.0};
    spec.lid_center_x = spec.iris_center.x;
    spec.iris_radius = r;
    spec.pupil_radius = pupil;
    spec.upper_apex_y = spec.iris_center.y - lift * r;
    spec.lower_apex_y = spec.iris_center.y + lower_reach * r;
    const double canthus_y = spec.iris_center.y + canthus_drop * r;
    spec.upper_curvature = (canthus_y - spec.upper_apex_y) / (half_span * half_span);
    spec.lower_curvature = (canthus_y - spec.lower_apex_y) / (half_span * half_span);
    spec.clr_dx = clr_dx;
    spec.clr_dy = clr_dy;
    spec.skin_intensity = static_cast<std::uint8_t>(skin);
    spec.sclera_intensity = static_cast<std::uint8_t>(sclera);
    spec.iris_intensity = static_cast<std::uint8_t>(iris);
    spec.pupil_intensity = static_cast<std::uint8_t>(pupil_tone);
    spec.noise_sigma = sigma;
    spec.seed = noise_seed;
    spec.side = index % 2 == 0 ? clinical::EyeSide::left : clinical::EyeSide::right;
    return spec;
}

std::vector<RenderResult> generate_suite(int n, const SuiteOptions& options, std::uint64_t seed,
                                         int jobs) {
    if (n <= 0) {
        throw ParameterError("generate_suite: n must be positive");
    }
    std::vector<RenderResult> out(static_cast<std::size_t>(n));
    const int workers = std::clamp(jobs, 1, n);

    if (workers == 1) {
        for (int i = 0; i < n; ++i) {
            out[i] = render_eye(suite_spec(i, options, seed));
        }
        return out;
    }

    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (int i = w; i < n; i += workers) {
                    out[i] = render_eye(suite_spec(i, options, seed));
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) {
        t.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

}  // namespace ptosis::synth
