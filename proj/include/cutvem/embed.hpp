#pragma once

#include "cutvem/levelset.hpp"
#include "cutvem/mesh.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace cutvem {

/// Samples of a level set at the mesh vertices (the piecewise-linear
/// interpolant on a triangulation).
struct NodalLevelSet {
    std::vector<double> values;
};

/// φ at every vertex, snapped to exactly 0 when |φ| < snap_tol·h_local where
/// h_local is the longest edge incident to the vertex.
NodalLevelSet sample_levelset(const PolyMesh& mesh, const LevelSetField& phi, double snap_tol = 1e-10);

/// Random displacement of the vertices within `band·h` of the interface.
/// Each coordinate moves by a uniform draw in [−amplitude·h, amplitude·h]
/// from the stream (seed, vertex index). A move that inverts an incident
/// face is retried with half the amplitude up to 5 times, then dropped.
/// Mesh boundary vertices are left in place so the domain is preserved.
PolyMesh perturb_vertices(const PolyMesh& mesh, const LevelSetField& phi, double h, std::uint64_t seed,
                          double band = 1.25, double amplitude = 0.15);

struct CutOptions {
    /// OR'ed into the tag of every vertex lying on the cut interface.
    int interface_tag = 1;
    /// New domain id from (old domain id, side); side 0 is φ < 0, side 1 is
    /// φ > 0. Defaults to the side itself.
    std::function<int(int, int)> relabel;
};

/// Splits every face crossed by the zero set of the nodal interpolant along
/// the straight chord joining its edge zeros. Faces that must be split have
/// to be convex (triangles always are); otherwise NotATriangulation.
/// Inserted vertices are shared with the neighbouring face.
PolyMesh cut_mesh(const PolyMesh& mesh, const NodalLevelSet& nodal, const CutOptions& options = {});

/// Keeps the part of the mesh where sign(n·x − c) equals `keep_sign`
/// (−1 or +1). Vertices on the clip line receive `tag`.
PolyMesh clip_halfplane(const PolyMesh& mesh, Point2 normal, double offset, int keep_sign, int tag = 1);

struct DiscardResult {
    PolyMesh mesh;
    /// Old vertex id to new vertex id, kInvalidId for pruned vertices.
    std::vector<VertexId> old_to_new;
};

/// Drops every face whose domain id is listed and prunes unreferenced
/// vertices. Throws EmptyResult if no face survives.
DiscardResult discard_subdomains(const PolyMesh& mesh, const std::vector<int>& domain_ids);
inline DiscardResult discard_subdomain(const PolyMesh& mesh, int domain_id)
{
    return discard_subdomains(mesh, {domain_id});
}

} // namespace cutvem
