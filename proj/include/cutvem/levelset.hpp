#pragma once

#include "cutvem/geometry.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cutvem {

/// Analytic signed field; negative values are "inside".
class LevelSetField {
public:
    enum class Kind { Line, Circle, Flower, Union, Intersection };

    /// φ = n·x − c.
    static LevelSetField line(Point2 normal, double offset);
    /// φ = |x − center| − R.
    static LevelSetField circle(Point2 center, double radius);
    /// φ = |x − center| − (r0 + A cos(kθ)).
    static LevelSetField flower(Point2 center, double r0, double amplitude, int lobes);
    /// min(a, b).
    static LevelSetField unite(LevelSetField a, LevelSetField b);
    /// max(a, b).
    static LevelSetField intersect(LevelSetField a, LevelSetField b);

    double operator()(Point2 p) const;
    double operator()(double x, double y) const { return (*this)({x, y}); }

    Kind kind() const { return kind_; }
    /// Text form accepted by `parse_levelset`.
    std::string describe() const;

private:
    Kind kind_ = Kind::Line;
    Point2 point_;
    double a_ = 0.0;
    double b_ = 0.0;
    double c_ = 0.0;
    int k_ = 0;
    std::shared_ptr<const LevelSetField> lhs_;
    std::shared_ptr<const LevelSetField> rhs_;
};

/// Parses one shape: `line nx ny c`, `circle cx cy R`, or
/// `flower cx cy r0 A k`. Throws ConfigError.
LevelSetField parse_levelset(const std::string& text);

} // namespace cutvem
