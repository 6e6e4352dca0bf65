#include "cutvem/geometry.hpp"

#include <algorithm>
#include <numbers>

namespace cutvem {

double signed_area(std::span<const Point2> poly)
{
    const std::size_t n = poly.size();
    double twice = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = poly[i];
        const Point2& q = poly[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

double perimeter(std::span<const Point2> poly)
{
    double total = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        total += distance(poly[i], poly[(i + 1) % poly.size()]);
    return total;
}

double diameter(std::span<const Point2> poly)
{
    double h = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i)
        for (std::size_t j = i + 1; j < poly.size(); ++j)
            h = std::max(h, distance(poly[i], poly[j]));
    return h;
}

Point2 vertex_centroid(std::span<const Point2> poly)
{
    Point2 c;
    for (const Point2& p : poly)
        c = c + p;
    return (1.0 / static_cast<double>(poly.size())) * c;
}

Point2 area_centroid(std::span<const Point2> poly)
{
    // Shift to the first vertex to limit cancellation on small, far-away polygons.
    const Point2 o = poly.front();
    const std::size_t n = poly.size();
    double a2 = 0.0;
    Point2 c;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 p = poly[i] - o;
        const Point2 q = poly[(i + 1) % n] - o;
        const double w = cross(p, q);
        a2 += w;
        c = c + w * (p + q);
    }
    return o + (1.0 / (3.0 * a2)) * c;
}

namespace {

int sign_with_tol(double v, double tol)
{
    if (v > tol)
        return 1;
    if (v < -tol)
        return -1;
    return 0;
}

bool on_segment(Point2 p, Point2 a, Point2 b, double tol)
{
    return std::min(a.x, b.x) - tol <= p.x && p.x <= std::max(a.x, b.x) + tol
           && std::min(a.y, b.y) - tol <= p.y && p.y <= std::max(a.y, b.y) + tol;
}

} // namespace

bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d, double tol, double len_tol)
{
    const int o1 = sign_with_tol(orient2d(a, b, c), tol);
    const int o2 = sign_with_tol(orient2d(a, b, d), tol);
    const int o3 = sign_with_tol(orient2d(c, d, a), tol);
    const int o4 = sign_with_tol(orient2d(c, d, b), tol);
    if (o1 * o2 < 0 && o3 * o4 < 0)
        return true;
    const double ltol = len_tol;
    if (o1 == 0 && on_segment(c, a, b, ltol))
        return true;
    if (o2 == 0 && on_segment(d, a, b, ltol))
        return true;
    if (o3 == 0 && on_segment(a, c, d, ltol))
        return true;
    if (o4 == 0 && on_segment(b, c, d, ltol))
        return true;
    return false;
}

bool is_simple_polygon(std::span<const Point2> poly, double rel_tol)
{
    const std::size_t n = poly.size();
    if (n < 3)
        return false;
    const double h = diameter(poly);
    if (h <= 0.0)
        return false;
    // Orientation values are products of two lengths.
    const double tol = rel_tol * h * h;
    if (std::abs(signed_area(poly)) <= tol)
        return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % n];
        const Point2 c = poly[(i + 2) % n];
        if (distance(a, b) <= rel_tol * h)
            return false;
        // Consecutive edges may be collinear but must not fold back.
        if (std::abs(orient2d(a, b, c)) <= tol && dot(b - a, c - b) < 0.0)
            return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = poly[i];
        const Point2 b = poly[(i + 1) % n];
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1)
                continue;
            const Point2 c = poly[j];
            const Point2 d = poly[(j + 1) % n];
            if (segments_intersect(a, b, c, d, tol, rel_tol * h))
                return false;
        }
    }
    return true;
}

bool point_in_triangle(Point2 p, Point2 a, Point2 b, Point2 c, double tol)
{
    const double d1 = orient2d(a, b, p);
    const double d2 = orient2d(b, c, p);
    const double d3 = orient2d(c, a, p);
    const bool has_neg = d1 < -tol || d2 < -tol || d3 < -tol;
    const bool has_pos = d1 > tol || d2 > tol || d3 > tol;
    return !(has_neg && has_pos);
}

std::vector<double> triangle_angles(Point2 a, Point2 b, Point2 c)
{
    auto angle_at = [](Point2 o, Point2 p, Point2 q) {
        const Point2 u = p - o;
        const Point2 v = q - o;
        return std::atan2(std::abs(cross(u, v)), dot(u, v));
    };
    return {angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)};
}

} // namespace cutvem
