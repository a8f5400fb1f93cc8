#include "ptosis/clinical.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <vector>

#include "ptosis/errors.hpp"

namespace ptosis::clinical {

std::string to_string(EyeSide side) {
    return side == EyeSide::left ? "left" : "right";
}

EyeSide eye_side_from_string(const std::string& s) {
    if (s == "left") {
        return EyeSide::left;
    }
    if (s == "right") {
        return EyeSide::right;
    }
    throw SchemaError("unknown eye side '" + s + "' (expected left or right)");
}

void validate_landmarks(const EyeLandmarks& lm) {
    for (const auto& p : lm.contour) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ParameterError("landmarks: non-finite contour coordinate");
        }
    }
    for (const auto& p : lm.iris) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ParameterError("landmarks: non-finite iris coordinate");
        }
    }
}

ClrResult detect_clr(const GrayImage& img, const geom::Circle& iris, const ClrParams& params) {
    if (!(iris.radius > 0.0)) {
        throw ParameterError("detect_clr: iris radius must be positive");
    }
    // Overlap test: distance from the center to the image rectangle.
    const double cx = std::clamp(iris.center.x, 0.0, static_cast<double>(img.width - 1));
    const double cy = std::clamp(iris.center.y, 0.0, static_cast<double>(img.height - 1));
    if (geom::distance({cx, cy}, iris.center) > iris.radius) {
        throw ParameterError("detect_clr: iris circle lies outside the image");
    }

    const int x0 = std::max(0, static_cast<int>(std::floor(iris.center.x - iris.radius)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(iris.center.x + iris.radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(iris.center.y - iris.radius)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(iris.center.y + iris.radius)));
    const double r2 = iris.radius * iris.radius;

    auto inside = [&](int x, int y) {
        const double dx = x - iris.center.x;
        const double dy = y - iris.center.y;
        return dx * dx + dy * dy <= r2;
    };

    int iris_max = -1;
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            if (inside(x, y)) {
                iris_max = std::max(iris_max, static_cast<int>(img.at(x, y)));
            }
        }
    }
    if (iris_max < 0) {
        // Disc overlaps the raster but covers no pixel center.
        return ClrResult{iris.center, false};
    }

    const double threshold = std::max(params.absolute_floor, iris_max - params.relative_delta);
    auto candidate = [&](int x, int y) {
        return inside(x, y) && static_cast<double>(img.at(x, y)) >= threshold;
    };

    // 8-connected component labelling over the candidate set; track centroids.
    const int bw = x1 - x0 + 1;
    const int bh = y1 - y0 + 1;
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(bw) * bh, 0);
    struct Component {
        double sum_x = 0.0, sum_y = 0.0;
        int count = 0;
    };
    std::vector<Component> components;

    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const std::size_t v = static_cast<std::size_t>(y - y0) * bw + (x - x0);
            if (visited[v] || !candidate(x, y)) {
                continue;
            }
            Component comp;
            std::deque<std::pair<int, int>> queue{{x, y}};
            visited[v] = 1;
            while (!queue.empty()) {
                const auto [px, py] = queue.front();
                queue.pop_front();
                comp.sum_x += px;
                comp.sum_y += py;
                comp.count++;
                for (int ny = py - 1; ny <= py + 1; ++ny) {
                    for (int nx = px - 1; nx <= px + 1; ++nx) {
                        if (nx < x0 || nx > x1 || ny < y0 || ny > y1) {
                            continue;
                        }
                        const std::size_t nv = static_cast<std::size_t>(ny - y0) * bw + (nx - x0);
                        if (!visited[nv] && candidate(nx, ny)) {
                            visited[nv] = 1;
                            queue.emplace_back(nx, ny);
                        }
                    }
                }
            }
            components.push_back(comp);
        }
    }

    if (components.empty()) {
        return ClrResult{iris.center, false};
    }

    // "Closest to the pupil": pick the component centroid nearest the center.
    ClrResult best{iris.center, false};
    double best_dist = std::numeric_limits<double>::infinity();
    for (const Component& comp : components) {
        const geom::Point2 centroid{comp.sum_x / comp.count, comp.sum_y / comp.count};
        const double dist = geom::distance(centroid, iris.center);
        if (dist < best_dist) {
            best_dist = dist;
            best = ClrResult{centroid, true};
        }
    }
    return best;
}

double measure_mrd1(const EyeLandmarks& lm, geom::Point2 clr, Mrd1Mode mode) {
    const auto chain = lm.upper_lid();
    const geom::ClosestPoint cp = mode == Mrd1Mode::segment
                                      ? geom::point_to_polyline_distance(clr, chain)
                                      : geom::point_to_polyline_vertex_distance(clr, chain);
    // Lid point below the reflex means the lid covers it.
    const double sign = cp.point.y > clr.y ? -1.0 : 1.0;
    return sign * cp.distance;
}

double measure_iris_ratio(const EyeLandmarks& lm) {
    const geom::Circle iris = geom::circle_from_iris_landmarks(lm.iris);
    const double inter = geom::circle_polygon_intersection_area(
        iris, std::span<const geom::Point2>(lm.contour.data(), lm.contour.size()));
    const double disc = std::numbers::pi * iris.radius * iris.radius;
    return std::clamp(100.0 * inter / disc, 0.0, 100.0);
}

MmConversion px_to_mm(double mrd1_px, const geom::Circle& iris, const CalibrationModel& cal) {
    if (!(iris.radius > 0.0)) {
        throw ParameterError("px_to_mm: iris radius must be positive");
    }
    if (!(cal.iris_diameter_mm > 0.0)) {
        throw ParameterError("px_to_mm: assumed iris diameter must be positive");
    }
    const double mm_per_px = cal.iris_diameter_mm / (2.0 * iris.radius);
    return MmConversion{mrd1_px * mm_per_px, mm_per_px};
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const MeasurementError&) {
        throw;
    } catch (const Error& e) {
        throw MeasurementError(name, e.what());
    }
}

}  // namespace

ClinicalMeasurements measure_eye(const GrayImage& img, const EyeLandmarks& lm,
                                 const MeasureOptions& options) {
    validate_landmarks(lm);
    const geom::Circle iris =
        stage("iris-fit", [&] { return geom::circle_from_iris_landmarks(lm.iris); });
    const ClrResult clr = stage("clr-detection", [&] { return detect_clr(img, iris, options.clr); });
    // Fallback per the protocol: when no reflex is visible, measure from the
    // iris center.
    const geom::Point2 reference = clr.found ? clr.location : iris.center;
    double mrd1_px = stage("mrd1", [&] { return measure_mrd1(lm, reference, options.mrd1_mode); });
    if (options.clamp_negative_mrd1) {
        mrd1_px = std::max(mrd1_px, 0.0);
    }
    const double ratio = stage("iris-ratio", [&] { return measure_iris_ratio(lm); });
    const MmConversion mm =
        stage("calibration", [&] { return px_to_mm(mrd1_px, iris, options.calibration); });

    ClinicalMeasurements out;
    out.mrd1_px = mrd1_px;
    out.mrd1_mm = mm.mrd1_mm;
    out.iris_ratio_pct = ratio;
    out.clr = clr.location;
    out.clr_found = clr.found;
    out.mm_per_px = mm.mm_per_px;
    return out;
}

}  // namespace ptosis::clinical
