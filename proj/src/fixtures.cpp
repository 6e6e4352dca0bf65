#include "cutvem/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cutvem {

PolyMesh sliver_fan_fixture(double eps)
{
    std::vector<Point2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, eps}};
    std::vector<std::vector<VertexId>> cycles{{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    return build_mesh(std::move(pts), cycles, std::vector<int>(cycles.size(), 0));
}

PolyMesh needle_fixture(double eps)
{
    std::vector<Point2> pts{{0, 0}, {2 * eps, 0}, {1, 0}, {1, 1}, {eps, 1}, {0, 1}};
    std::vector<std::vector<VertexId>> cycles{{0, 4, 5}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}};
    return build_mesh(std::move(pts), cycles, std::vector<int>(cycles.size(), 0));
}

PolyMesh anisotropic_fixture()
{
    return generate_anisotropic_tri(4, 36);
}

std::vector<Point2> random_convex_polygon(Xorshift64Star& rng, int n)
{
    std::vector<double> angles(static_cast<std::size_t>(n));
    // Angles separated enough that no three vertices are nearly collinear.
    for (int i = 0; i < n; ++i)
        angles[static_cast<std::size_t>(i)] =
            2.0 * std::numbers::pi * (i + rng.uniform(0.1, 0.9)) / static_cast<double>(n);
    const double a = rng.uniform(0.5, 2.0), b = rng.uniform(0.5, 2.0);
    const double rot = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const Point2 c{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    std::vector<Point2> pts;
    for (double t : angles) {
        const double x = a * std::cos(t), y = b * std::sin(t);
        pts.push_back({c.x + std::cos(rot) * x - std::sin(rot) * y, c.y + std::sin(rot) * x + std::cos(rot) * y});
    }
    return pts;
}

std::vector<Point2> random_star_polygon(Xorshift64Star& rng, int n)
{
    const Point2 c{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double scale = rng.uniform(0.1, 3.0);
    std::vector<Point2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * (i + rng.uniform(0.1, 0.9)) / static_cast<double>(n);
        const double r = scale * rng.uniform(0.3, 1.0);
        pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
    }
    return pts;
}

std::vector<Point2> random_triangle(Xorshift64Star& rng)
{
    for (;;) {
        std::vector<Point2> t{{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                              {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                              {rng.uniform(-1, 1), rng.uniform(-1, 1)}};
        const double a = 0.5 * orient2d(t[0], t[1], t[2]);
        if (std::abs(a) < 0.01)
            continue;
        if (a < 0)
            std::swap(t[1], t[2]);
        return t;
    }
}

} // namespace cutvem
