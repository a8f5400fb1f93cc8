#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace ptosis::geom {

// Image convention throughout: x grows right, y grows DOWN.
struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 p) { return std::hypot(p.x, p.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

struct Circle {
    Point2 center;
    double radius = 0.0;
};

/// Vertices of an implicitly closed simple polygon.
using Polygon = std::vector<Point2>;

/// Absolute shoelace area. Throws ParameterError for fewer than 3 vertices.
double polygon_area(std::span<const Point2> poly);

/// Area of the region inside both the disc and the polygon.
///
/// Green's-theorem edge walk: the polygon is fanned into triangles from the
/// circle center and each directed edge contributes signed triangle and
/// circular-sector pieces, so circular arcs are handled exactly (no polygonal
/// approximation of the circle).
double circle_polygon_intersection_area(const Circle& c, std::span<const Point2> poly);

struct ClosestPoint {
    double distance = 0.0;
    Point2 point;
};

/// Minimum Euclidean distance from p to the open polyline, plus the realizing
/// point. Distance is measured to segments, not just vertices.
ClosestPoint point_to_polyline_distance(Point2 p, std::span<const Point2> chain);

/// Nearest-vertex variant, kept for comparison with the segment mode.
ClosestPoint point_to_polyline_vertex_distance(Point2 p, std::span<const Point2> chain);

// Iris landmark index convention: 0=center, 1=temporal rim, 2=superior rim,
// 3=nasal rim, 4=inferior rim.
inline constexpr int kIrisCenter = 0;
inline constexpr int kIrisTemporal = 1;
inline constexpr int kIrisSuperior = 2;
inline constexpr int kIrisNasal = 3;
inline constexpr int kIrisInferior = 4;

/// Circle from the 5-point iris landmark set: center = point 0, radius = half
/// the horizontal rim distance (points 1 and 3). Throws ParameterError when
/// the rim points coincide.
Circle circle_from_iris_landmarks(std::span<const Point2> iris);

}  // namespace ptosis::geom
