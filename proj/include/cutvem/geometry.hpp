#pragma once

#include <cmath>
#include <span>
#include <vector>

namespace cutvem {

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }

/// Twice the signed area of triangle (a, b, c); positive when CCW.
constexpr double orient2d(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

struct Rect {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
};

/// Shoelace signed area (positive for CCW cycles).
double signed_area(std::span<const Point2> poly);
double perimeter(std::span<const Point2> poly);
/// Largest pairwise vertex distance.
double diameter(std::span<const Point2> poly);
/// Arithmetic mean of the vertices.
Point2 vertex_centroid(std::span<const Point2> poly);
/// Centroid of the enclosed region (area-weighted).
Point2 area_centroid(std::span<const Point2> poly);

/// True when the closed cycle is a simple polygon with non-zero area.
/// Consecutive collinear vertices are allowed; edges folding back are not.
/// `rel_tol` scales with the polygon diameter.
bool is_simple_polygon(std::span<const Point2> poly, double rel_tol = 1e-12);

/// Closed-segment intersection test. `tol` applies to orientation values
/// (length squared), `len_tol` to the collinear overlap check.
bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d, double tol, double len_tol);

/// Point-in-triangle test including the boundary (within `tol` on orientation).
bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c, double tol);

/// Interior angles of the triangle in radians, ordered at a, b, c.
std::vector<double> triangle_angles(Point2 a, Point2 b, Point2 c);

} // namespace cutvem
