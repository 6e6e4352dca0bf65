#pragma once

#include "cutvem/geometry.hpp"

#include <array>
#include <span>
#include <vector>

namespace cutvem {

/// Triangulates a simple CCW polygon by ear clipping. Collinear vertices are
/// kept as triangle corners of zero-area ears only when no other ear exists.
/// Throws EarClipFailure.
std::vector<std::array<Point2, 3>> ear_clip(std::span<const Point2> poly);

struct QuadPoint {
    Point2 x;
    double weight; ///< includes the triangle area
};

/// Six-point symmetric rule exact for polynomials of degree 4.
std::vector<QuadPoint> triangle_rule(const std::array<Point2, 3>& tri);

/// Composite rule over the ear-clipped sub-triangles of the polygon, each
/// split `levels` times into four similar triangles at the edge midpoints.
std::vector<QuadPoint> polygon_rule(std::span<const Point2> poly, int levels = 0);

} // namespace cutvem
