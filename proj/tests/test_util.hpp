#pragma once

// Shared helpers for the test suites: deterministic random data generators
// and the independent geometry oracles (point-in-polygon, Monte Carlo area).

#include <cmath>
#include <numbers>
#include <vector>

#include "ptosis/geometry.hpp"
#include "ptosis/rand.hpp"

namespace test_util {

using ptosis::SplitMix64;
using ptosis::geom::Circle;
using ptosis::geom::Point2;

// Random convex polygon: sorted angles on a jittered ellipse.
inline std::vector<Point2> random_convex_polygon(SplitMix64& rng, Point2 center, double scale) {
    const int n = 3 + static_cast<int>(rng.next_u64() % 8);
    std::vector<double> angles(n);
    for (double& a : angles) {
        a = rng.next_uniform(0.0, 2.0 * std::numbers::pi);
    }
    std::sort(angles.begin(), angles.end());
    const double rx = scale * rng.next_uniform(0.5, 1.5);
    const double ry = scale * rng.next_uniform(0.5, 1.5);
    std::vector<Point2> poly;
    poly.reserve(angles.size());
    for (double a : angles) {
        poly.push_back({center.x + rx * std::cos(a), center.y + ry * std::sin(a)});
    }
    return poly;
}

// Ray-crossing point-in-polygon; independent of the library's edge walk.
inline bool point_in_polygon(Point2 p, const std::vector<Point2>& poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Point2& a = poly[i];
        const Point2& b = poly[j];
        if ((a.y > p.y) != (b.y > p.y) &&
            p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
            inside = !inside;
        }
    }
    return inside;
}

struct McEstimate {
    double area = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo circle-polygon intersection over the circle's bounding box.
inline McEstimate mc_circle_polygon_area(const Circle& c, const std::vector<Point2>& poly,
                                         long long samples, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const double box = 2.0 * c.radius;
    long long hits = 0;
    for (long long i = 0; i < samples; ++i) {
        const Point2 p{c.center.x - c.radius + box * rng.next_double(),
                       c.center.y - c.radius + box * rng.next_double()};
        const double dx = p.x - c.center.x;
        const double dy = p.y - c.center.y;
        if (dx * dx + dy * dy > c.radius * c.radius) {
            continue;
        }
        if (point_in_polygon(p, poly)) {
            hits++;
        }
    }
    const double box_area = box * box;
    const double ratio = static_cast<double>(hits) / static_cast<double>(samples);
    McEstimate est;
    est.area = box_area * ratio;
    est.stderr_ = box_area * std::sqrt(ratio * (1.0 - ratio) / static_cast<double>(samples));
    return est;
}

}  // namespace test_util
