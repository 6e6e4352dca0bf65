#include "cutvem/quadrature.hpp"

#include "cutvem/errors.hpp"

#include <cmath>

namespace cutvem {

std::vector<std::array<Point2, 3>> ear_clip(std::span<const Point2> poly)
{
    std::vector<Point2> ring(poly.begin(), poly.end());
    std::vector<std::array<Point2, 3>> tris;
    if (ring.size() < 3)
        throw EarClipFailure("polygon has fewer than three vertices");
    const double h = diameter(ring);
    const double tol = 1e-14 * h * h;

    auto is_ear = [&](std::size_t i, bool allow_flat) {
        const std::size_t n = ring.size();
        const Point2 a = ring[(i + n - 1) % n];
        const Point2 b = ring[i];
        const Point2 c = ring[(i + 1) % n];
        const double o = orient2d(a, b, c);
        if (o < -tol || (!allow_flat && o <= tol))
            return false;
        for (std::size_t k = 0; k < n; ++k) {
            if (k == i || k == (i + 1) % n || k == (i + n - 1) % n)
                continue;
            const Point2 p = ring[k];
            if (p == a || p == b || p == c)
                continue;
            if (o > tol && point_in_triangle(p, a, b, c, tol))
                return false;
        }
        return true;
    };

    while (ring.size() > 3) {
        const std::size_t n = ring.size();
        std::size_t chosen = n;
        for (std::size_t i = 0; i < n && chosen == n; ++i)
            if (is_ear(i, false))
                chosen = i;
        // Only collinear runs remain at this vertex set; drop a flat vertex.
        for (std::size_t i = 0; i < n && chosen == n; ++i)
            if (is_ear(i, true))
                chosen = i;
        if (chosen == n)
            throw EarClipFailure("no ear found; polygon is not simple");
        const Point2 a = ring[(chosen + n - 1) % n];
        const Point2 b = ring[chosen];
        const Point2 c = ring[(chosen + 1) % n];
        if (orient2d(a, b, c) > tol)
            tris.push_back({a, b, c});
        ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(chosen));
    }
    if (orient2d(ring[0], ring[1], ring[2]) > tol)
        tris.push_back({ring[0], ring[1], ring[2]});
    return tris;
}

std::vector<QuadPoint> triangle_rule(const std::array<Point2, 3>& tri)
{
    static constexpr double w1 = 0.223381589678011;
    static constexpr double a1 = 0.445948490915965;
    static constexpr double w2 = 0.109951743655322;
    static constexpr double a2 = 0.091576213509771;
    const double area = 0.5 * orient2d(tri[0], tri[1], tri[2]);
    std::vector<QuadPoint> pts;
    pts.reserve(6);
    auto add = [&](double l0, double l1, double w) {
        const double l2 = 1.0 - l0 - l1;
        pts.push_back({l0 * tri[0] + l1 * tri[1] + l2 * tri[2], w * area});
    };
    add(a1, a1, w1);
    add(a1, 1.0 - 2.0 * a1, w1);
    add(1.0 - 2.0 * a1, a1, w1);
    add(a2, a2, w2);
    add(a2, 1.0 - 2.0 * a2, w2);
    add(1.0 - 2.0 * a2, a2, w2);
    return pts;
}

std::vector<QuadPoint> polygon_rule(std::span<const Point2> poly, int levels)
{
    std::vector<std::array<Point2, 3>> tris = ear_clip(poly);
    for (int l = 0; l < levels; ++l) {
        std::vector<std::array<Point2, 3>> finer;
        finer.reserve(4 * tris.size());
        for (const auto& [a, b, c] : tris) {
            const Point2 ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
            finer.push_back({a, ab, ca});
            finer.push_back({ab, b, bc});
            finer.push_back({ca, bc, c});
            finer.push_back({ab, bc, ca});
        }
        tris = std::move(finer);
    }
    std::vector<QuadPoint> out;
    for (const auto& tri : tris) {
        const auto pts = triangle_rule(tri);
        out.insert(out.end(), pts.begin(), pts.end());
    }
    return out;
}

} // namespace cutvem
