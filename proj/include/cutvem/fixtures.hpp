#pragma once

#include "cutvem/mesh.hpp"
#include "cutvem/rng.hpp"

#include <vector>

namespace cutvem {

/// Unit square fanned from the apex v = (0.5, ε): face 0 is the sliver
/// (0,0), (1,0), v and the three others are well shaped.
PolyMesh sliver_fan_fixture(double eps);

/// Unit square with a needle strip along x = 0. Face 0 is the thinner
/// needle (0,0), (ε,1), (0,1), whose only neighbour is face 1, the second
/// needle (0,0), (2ε,0), (ε,1). Face 2 is the companion across the
/// needle strip and face 3 fills the remaining corner.
PolyMesh needle_fixture(double eps);

/// Anisotropic 4 × 36 node triangulation of the unit square (144 nodes).
PolyMesh anisotropic_fixture();

/// Convex polygon with n vertices on a randomly scaled, rotated ellipse.
std::vector<Point2> random_convex_polygon(Xorshift64Star& rng, int n);

/// Star-shaped polygon with n vertices at sorted random angles and radii
/// in [0.3, 1] around a random center.
std::vector<Point2> random_star_polygon(Xorshift64Star& rng, int n);

/// CCW triangle with vertices in [−1, 1]² and area at least 0.01.
std::vector<Point2> random_triangle(Xorshift64Star& rng);

} // namespace cutvem
