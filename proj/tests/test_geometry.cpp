#include "cutvem/errors.hpp"
#include "cutvem/fixtures.hpp"
#include "cutvem/geometry.hpp"
#include "cutvem/levelset.hpp"
#include "cutvem/quadrature.hpp"
#include "cutvem/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace cutvem;

TEST_CASE("polygon measures")
{
    const std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    CHECK(signed_area(square) == doctest::Approx(1.0));
    CHECK(diameter(square) == doctest::Approx(std::sqrt(2.0)));
    CHECK(vertex_centroid(square).x == doctest::Approx(0.5));
    CHECK(vertex_centroid(square).y == doctest::Approx(0.5));

    const std::vector<Point2> tri{{0, 0}, {1, 0}, {0, 1}};
    CHECK(signed_area(tri) == doctest::Approx(0.5));
    CHECK(diameter(tri) == doctest::Approx(std::sqrt(2.0)));
    CHECK(vertex_centroid(tri).x == doctest::Approx(1.0 / 3.0));
    CHECK(vertex_centroid(tri).y == doctest::Approx(1.0 / 3.0));

    const std::vector<Point2> rect{{0, 0}, {2, 0}, {2, 1}, {0, 1}};
    CHECK(signed_area(rect) == doctest::Approx(2.0));
    CHECK(diameter(rect) == doctest::Approx(std::sqrt(5.0)));
    CHECK(perimeter(rect) == doctest::Approx(6.0));

    const std::vector<Point2> cw{{0, 0}, {0, 1}, {1, 1}, {1, 0}};
    CHECK(signed_area(cw) == doctest::Approx(-1.0));
}

TEST_CASE("simplicity test")
{
    CHECK(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {1, 1}, {0, 1}}));
    CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 1}, {1, 0}, {0, 1}}));
    CHECK_FALSE(is_simple_polygon(std::vector<Point2>{{0, 0}, {1, 0}, {0, 0}}));
    // collinear vertices are allowed
    CHECK(is_simple_polygon(std::vector<Point2>{{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}}));
}

TEST_CASE("random polygons are simple and counter-clockwise")
{
    Xorshift64Star rng(7);
    for (int i = 0; i < 200; ++i) {
        const int n = 3 + i % 10;
        const auto convex = random_convex_polygon(rng, n);
        const auto star = random_star_polygon(rng, n);
        CHECK(convex.size() == static_cast<std::size_t>(n));
        CHECK(is_simple_polygon(convex));
        CHECK(signed_area(convex) > 0.0);
        CHECK(is_simple_polygon(star));
        CHECK(signed_area(star) > 0.0);
    }
}

TEST_CASE("vertex centroid lies in the bounding box and diameter bounds edges")
{
    Xorshift64Star rng(11);
    for (int i = 0; i < 100; ++i) {
        const auto poly = random_star_polygon(rng, 3 + i % 10);
        const Point2 c = vertex_centroid(poly);
        double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
        for (Point2 p : poly) {
            x0 = std::min(x0, p.x);
            x1 = std::max(x1, p.x);
            y0 = std::min(y0, p.y);
            y1 = std::max(y1, p.y);
        }
        CHECK(c.x >= x0);
        CHECK(c.x <= x1);
        CHECK(c.y >= y0);
        CHECK(c.y <= y1);
        const double h = diameter(poly);
        for (std::size_t k = 0; k < poly.size(); ++k)
            CHECK(distance(poly[k], poly[(k + 1) % poly.size()]) <= h + 1e-15);
    }
}

TEST_CASE("ear clipping preserves area")
{
    Xorshift64Star rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto poly = random_star_polygon(rng, 3 + i % 10);
        const auto tris = ear_clip(poly);
        double sum = 0.0;
        for (const auto& t : tris)
            sum += signed_area(t);
        CHECK(sum == doctest::Approx(signed_area(poly)).epsilon(1e-12));
        CHECK(tris.size() == poly.size() - 2);
    }
    const std::vector<Point2> with_collinear{{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0, 1}};
    double sum = 0.0;
    for (const auto& t : ear_clip(with_collinear))
        sum += signed_area(t);
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("triangle rule integrates quartics exactly")
{
    const std::array<Point2, 3> tri{Point2{0, 0}, Point2{1, 0}, Point2{0, 1}};
    double s0 = 0.0, s4 = 0.0, s22 = 0.0;
    for (const auto& q : triangle_rule(tri)) {
        s0 += q.weight;
        s4 += q.weight * std::pow(q.x.x, 4);
        s22 += q.weight * q.x.x * q.x.x * q.x.y * q.x.y;
    }
    // ∫ x^a y^b over the reference triangle = a! b! / (a + b + 2)!
    CHECK(s0 == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s4 == doctest::Approx(24.0 / 720.0).epsilon(1e-13));
    CHECK(s22 == doctest::Approx(4.0 / 720.0).epsilon(1e-13));
}

TEST_CASE("polygon rule on the unit square")
{
    const std::vector<Point2> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    double s = 0.0;
    for (const auto& q : polygon_rule(square))
        s += q.weight * q.x.x * q.x.x * q.x.y;
    CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-13));

    // refined rule: 4^levels times the points, still exact, and closer on e^x
    for (int levels : {1, 2}) {
        const auto rule = polygon_rule(square, levels);
        CHECK(rule.size() == polygon_rule(square).size() * (levels == 1 ? 4 : 16));
        double p = 0.0;
        for (const auto& q : rule)
            p += q.weight * q.x.x * q.x.x * q.x.y;
        CHECK(p == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    }
    auto err = [&](int levels) {
        double e = 0.0;
        for (const auto& q : polygon_rule(square, levels))
            e += q.weight * std::exp(3.0 * q.x.x);
        return std::abs(e - (std::exp(3.0) - 1.0) / 3.0);
    };
    CHECK(err(1) < err(0) / 16.0);
}

TEST_CASE("level set fields")
{
    const auto circle = LevelSetField::circle({0, 0}, 0.5);
    CHECK(circle(0.0, 0.0) == doctest::Approx(-0.5));
    const auto line = LevelSetField::line({0, 1}, 1.0);
    CHECK(line(0.3, 2.0) == doctest::Approx(1.0));
    const auto flower = LevelSetField::flower({0, 0}, 0.5, 0.1, 4);
    CHECK(flower(0.6, 0.0) == doctest::Approx(0.0));
    const auto u = LevelSetField::unite(circle, LevelSetField::circle({2, 0}, 0.5));
    CHECK(u(2.0, 0.0) == doctest::Approx(-0.5));
    const auto x = LevelSetField::intersect(circle, LevelSetField::line({1, 0}, 0.0));
    CHECK(x(-0.1, 0.0) == doctest::Approx(-0.1));
    CHECK(x(0.1, 0.0) == doctest::Approx(0.1));
}

TEST_CASE("level set grammar round trip")
{
    for (const char* text : {"circle 0.5 0.5 0.313", "line 0 1 1", "flower 0.5 0.5 0.3 0.05 5"}) {
        const auto phi = parse_levelset(text);
        const auto again = parse_levelset(phi.describe());
        for (double x : {0.1, 0.4, 0.77})
            CHECK(phi(x, 0.3) == again(x, 0.3));
    }
    CHECK_THROWS_AS(parse_levelset("ellipse 0 0 1"), ConfigError);
    CHECK_THROWS_AS(parse_levelset("circle 0 0"), ConfigError);
    CHECK_THROWS_AS(parse_levelset("circle 0 0 -1"), ConfigError);
}

TEST_CASE("generator streams")
{
    auto a = Xorshift64Star::stream(5, 17);
    auto b = Xorshift64Star::stream(5, 17);
    auto c = Xorshift64Star::stream(5, 18);
    const double ua = a.uniform01();
    CHECK(ua == b.uniform01());
    CHECK(ua != c.uniform01());
    Xorshift64Star r(1);
    double lo = 1.0, hi = 0.0, mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform01();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u;
    }
    CHECK(lo >= 0.0);
    CHECK(hi < 1.0);
    CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
