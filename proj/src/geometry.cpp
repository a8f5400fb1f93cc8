#include "ptosis/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ptosis/errors.hpp"

namespace ptosis::geom {

double polygon_area(std::span<const Point2> poly) {
    if (poly.size() < 3) {
        throw ParameterError("polygon_area: polygon needs at least 3 vertices");
    }
    double twice = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2& a = poly[i];
        const Point2& b = poly[(i + 1) % poly.size()];
        twice += cross(a, b);
    }
    return std::abs(twice) * 0.5;
}

namespace {

// Signed area of disc(origin, r) ∩ triangle(origin, a, b), sign taken from
// cross(a, b). Both endpoints are expressed relative to the circle center.
double edge_disc_contribution(Point2 a, Point2 b, double r) {
    const double r2 = r * r;
    const bool a_in = dot(a, a) <= r2;
    const bool b_in = dot(b, b) <= r2;

    auto sector = [&](Point2 p, Point2 q) {
        // Circular sector between directions p and q; the subtended angle at
        // the center never exceeds pi for a straight segment seen from outside.
        return 0.5 * r2 * std::atan2(cross(p, q), dot(p, q));
    };
    auto triangle = [](Point2 p, Point2 q) { return 0.5 * cross(p, q); };

    if (a_in && b_in) {
        return triangle(a, b);
    }

    // Intersections of the segment a + t(b-a), t in [0,1], with the circle.
    const Point2 d = b - a;
    const double qa = dot(d, d);
    if (qa == 0.0) {
        return 0.0;  // degenerate edge
    }
    const double qb = 2.0 * dot(a, d);
    const double qc = dot(a, a) - r2;
    const double disc = qb * qb - 4.0 * qa * qc;

    if (a_in) {  // exits the disc at t1
        double t1 = (-qb + std::sqrt(std::max(disc, 0.0))) / (2.0 * qa);
        t1 = std::clamp(t1, 0.0, 1.0);
        const Point2 p1 = a + t1 * d;
        return triangle(a, p1) + sector(p1, b);
    }
    if (b_in) {  // enters the disc at t0
        double t0 = (-qb - std::sqrt(std::max(disc, 0.0))) / (2.0 * qa);
        t0 = std::clamp(t0, 0.0, 1.0);
        const Point2 p0 = a + t0 * d;
        return sector(a, p0) + triangle(p0, b);
    }

    if (disc <= 0.0) {
        return sector(a, b);  // chord misses the disc entirely
    }
    const double sq = std::sqrt(disc);
    double t0 = (-qb - sq) / (2.0 * qa);
    double t1 = (-qb + sq) / (2.0 * qa);
    if (t1 <= 0.0 || t0 >= 1.0) {
        return sector(a, b);  // intersections outside the segment
    }
    t0 = std::clamp(t0, 0.0, 1.0);
    t1 = std::clamp(t1, 0.0, 1.0);
    const Point2 p0 = a + t0 * d;
    const Point2 p1 = a + t1 * d;
    return sector(a, p0) + triangle(p0, p1) + sector(p1, b);
}

}  // namespace

double circle_polygon_intersection_area(const Circle& c, std::span<const Point2> poly) {
    if (poly.size() < 3) {
        throw ParameterError("circle_polygon_intersection_area: polygon needs at least 3 vertices");
    }
    if (!(c.radius > 0.0)) {
        throw ParameterError("circle_polygon_intersection_area: radius must be positive");
    }
    double area = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point2 a = poly[i] - c.center;
        const Point2 b = poly[(i + 1) % poly.size()] - c.center;
        area += edge_disc_contribution(a, b, c.radius);
    }
    return std::abs(area);
}

ClosestPoint point_to_polyline_distance(Point2 p, std::span<const Point2> chain) {
    if (chain.size() < 2) {
        throw ParameterError("point_to_polyline_distance: chain needs at least 2 points");
    }
    ClosestPoint best{std::numeric_limits<double>::infinity(), chain[0]};
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        const Point2 a = chain[i];
        const Point2 b = chain[i + 1];
        const Point2 d = b - a;
        const double len2 = dot(d, d);
        double t = 0.0;
        if (len2 > 0.0) {
            t = std::clamp(dot(p - a, d) / len2, 0.0, 1.0);
        }
        const Point2 foot = a + t * d;
        const double dist = distance(p, foot);
        if (dist < best.distance) {
            best = {dist, foot};
        }
    }
    return best;
}

ClosestPoint point_to_polyline_vertex_distance(Point2 p, std::span<const Point2> chain) {
    if (chain.size() < 2) {
        throw ParameterError("point_to_polyline_vertex_distance: chain needs at least 2 points");
    }
    ClosestPoint best{std::numeric_limits<double>::infinity(), chain[0]};
    for (const Point2& v : chain) {
        const double dist = distance(p, v);
        if (dist < best.distance) {
            best = {dist, v};
        }
    }
    return best;
}

Circle circle_from_iris_landmarks(std::span<const Point2> iris) {
    if (iris.size() != 5) {
        throw ParameterError("circle_from_iris_landmarks: expected 5 iris landmarks");
    }
    const double diameter = distance(iris[kIrisTemporal], iris[kIrisNasal]);
    if (diameter <= 0.0) {
        throw ParameterError("circle_from_iris_landmarks: degenerate iris, rim points coincide");
    }
    return Circle{iris[kIrisCenter], diameter * 0.5};
}

}  // namespace ptosis::geom
