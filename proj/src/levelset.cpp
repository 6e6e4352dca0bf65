#include "cutvem/levelset.hpp"

#include "cutvem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cutvem {

LevelSetField LevelSetField::line(Point2 normal, double offset)
{
    LevelSetField f;
    f.kind_ = Kind::Line;
    f.point_ = normal;
    f.a_ = offset;
    return f;
}

LevelSetField LevelSetField::circle(Point2 center, double radius)
{
    LevelSetField f;
    f.kind_ = Kind::Circle;
    f.point_ = center;
    f.a_ = radius;
    return f;
}

LevelSetField LevelSetField::flower(Point2 center, double r0, double amplitude, int lobes)
{
    LevelSetField f;
    f.kind_ = Kind::Flower;
    f.point_ = center;
    f.a_ = r0;
    f.b_ = amplitude;
    f.k_ = lobes;
    return f;
}

LevelSetField LevelSetField::unite(LevelSetField a, LevelSetField b)
{
    LevelSetField f;
    f.kind_ = Kind::Union;
    f.lhs_ = std::make_shared<const LevelSetField>(std::move(a));
    f.rhs_ = std::make_shared<const LevelSetField>(std::move(b));
    return f;
}

LevelSetField LevelSetField::intersect(LevelSetField a, LevelSetField b)
{
    LevelSetField f = unite(std::move(a), std::move(b));
    f.kind_ = Kind::Intersection;
    return f;
}

double LevelSetField::operator()(Point2 p) const
{
    switch (kind_) {
    case Kind::Line:
        return dot(point_, p) - a_;
    case Kind::Circle:
        return distance(point_, p) - a_;
    case Kind::Flower: {
        const Point2 d = p - point_;
        const double theta = std::atan2(d.y, d.x);
        return norm(d) - (a_ + b_ * std::cos(k_ * theta));
    }
    case Kind::Union:
        return std::min((*lhs_)(p), (*rhs_)(p));
    case Kind::Intersection:
        return std::max((*lhs_)(p), (*rhs_)(p));
    }
    return 0.0;
}

std::string LevelSetField::describe() const
{
    std::ostringstream s;
    s.precision(17);
    switch (kind_) {
    case Kind::Line:
        s << "line " << point_.x << ' ' << point_.y << ' ' << a_;
        break;
    case Kind::Circle:
        s << "circle " << point_.x << ' ' << point_.y << ' ' << a_;
        break;
    case Kind::Flower:
        s << "flower " << point_.x << ' ' << point_.y << ' ' << a_ << ' ' << b_ << ' ' << k_;
        break;
    case Kind::Union:
        s << "union(" << lhs_->describe() << "; " << rhs_->describe() << ')';
        break;
    case Kind::Intersection:
        s << "intersect(" << lhs_->describe() << "; " << rhs_->describe() << ')';
        break;
    }
    return s.str();
}

LevelSetField parse_levelset(const std::string& text)
{
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    auto need = [&](int count) {
        std::vector<double> v(static_cast<std::size_t>(count));
        for (double& x : v)
            if (!(in >> x))
                throw ConfigError("level set '" + text + "': expected " + std::to_string(count) + " numbers");
        std::string extra;
        if (in >> extra)
            throw ConfigError("level set '" + text + "': trailing token '" + extra + "'");
        return v;
    };
    if (kind == "line") {
        const auto v = need(3);
        return LevelSetField::line({v[0], v[1]}, v[2]);
    }
    if (kind == "circle") {
        const auto v = need(3);
        if (!(v[2] > 0.0))
            throw ConfigError("circle radius must be positive");
        return LevelSetField::circle({v[0], v[1]}, v[2]);
    }
    if (kind == "flower") {
        const auto v = need(5);
        if (!(v[2] > 0.0) || std::abs(v[3]) >= v[2])
            throw ConfigError("flower needs r0 > |A|");
        return LevelSetField::flower({v[0], v[1]}, v[2], v[3], static_cast<int>(std::lround(v[4])));
    }
    throw ConfigError("unknown level set kind '" + kind + "'");
}

} // namespace cutvem
