#pragma once

#include "cutvem/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cutvem {

using VertexId = std::int32_t;
using FaceId = std::int32_t;
using HalfEdgeId = std::int32_t;

inline constexpr std::int32_t kInvalidId = -1;

struct HalfEdge {
    VertexId origin = kInvalidId;
    HalfEdgeId twin = kInvalidId; // kInvalidId on the mesh boundary
    HalfEdgeId next = kInvalidId;
    HalfEdgeId prev = kInvalidId;
    FaceId face = kInvalidId;     // kInvalidId once removed by a merge
};

struct PolygonGeometry {
    double area = 0.0;
    double diameter = 0.0;
    Point2 vertex_centroid;
};

enum class MergeRejection { NotAdjacent, PinchVertex, MultipleChains, DomainMismatch };

const char* to_string(MergeRejection r);

class PolyMesh;

/// Planar mesh of simple CCW polygons stored as half-edges.
///
/// Face ids are stable slots: a merge keeps the first face's id and retires
/// the second one, so `face_ids()` may be non-contiguous until `compacted()`.
/// The vertex array is never modified by topological operations.
class PolyMesh {
public:
    PolyMesh() = default;

    std::size_t num_vertices() const { return vertices_.size(); }
    std::size_t num_faces() const { return alive_faces_; }
    /// Upper bound (exclusive) on face ids, including retired slots.
    std::size_t face_capacity() const { return faces_.size(); }

    std::span<const Point2> vertices() const { return vertices_; }
    Point2 vertex(VertexId v) const { return vertices_.at(static_cast<std::size_t>(v)); }

    std::span<const int> vertex_tags() const { return tags_; }
    int vertex_tag(VertexId v) const { return tags_.at(static_cast<std::size_t>(v)); }
    void set_vertex_tag(VertexId v, int tag) { tags_.at(static_cast<std::size_t>(v)) = tag; }

    bool is_face(FaceId f) const;
    /// Alive face ids in ascending order.
    std::vector<FaceId> face_ids() const;
    std::vector<VertexId> face_cycle(FaceId f) const;
    std::vector<Point2> face_points(FaceId f) const;
    std::size_t face_size(FaceId f) const;
    int domain_id(FaceId f) const;
    HalfEdgeId face_half_edge(FaceId f) const;

    const std::vector<HalfEdge>& half_edges() const { return half_edges_; }

    /// Directed boundary edges (origin, destination), CCW with respect to the mesh.
    std::vector<std::pair<VertexId, VertexId>> boundary_edges() const;
    /// Sorted, unique vertices lying on boundary edges.
    std::vector<VertexId> boundary_vertices() const;
    /// Vertices referenced by no face.
    std::vector<VertexId> dangling_vertices() const;

    double total_area() const;

    /// Checks the half-edge invariants and face geometry; throws InvalidMesh.
    void validate() const;

    /// Copy with retired face slots and dead half-edges dropped; faces keep
    /// their relative order.
    PolyMesh compacted() const;

    friend PolyMesh build_mesh(std::vector<Point2> points, const std::vector<std::vector<VertexId>>& cycles,
                               const std::vector<int>& domain_ids, std::vector<int> vertex_tags);
    friend std::optional<FaceId> commit_merge(PolyMesh& mesh, FaceId f1, FaceId f2);
    friend PolyMesh with_vertices(const PolyMesh& mesh, std::vector<Point2> points);

private:
    struct FaceRecord {
        HalfEdgeId start = kInvalidId;
        int domain_id = 0;
        bool alive = false;
    };

    std::vector<Point2> vertices_;
    std::vector<int> tags_;
    std::vector<HalfEdge> half_edges_;
    std::vector<FaceRecord> faces_;
    std::size_t alive_faces_ = 0;
};

/// Builds and validates a mesh. CW cycles are reoriented to CCW.
/// Throws NonSimplePolygon, NonManifoldEdge or IndexOutOfRange.
PolyMesh build_mesh(std::vector<Point2> points, const std::vector<std::vector<VertexId>>& cycles,
                    const std::vector<int>& domain_ids, std::vector<int> vertex_tags = {});

/// Same topology with new vertex coordinates (used by vertex perturbation).
PolyMesh with_vertices(const PolyMesh& mesh, std::vector<Point2> points);

PolygonGeometry polygon_geometry(const PolyMesh& mesh, FaceId f);

/// Faces sharing at least one full edge with `f`, ascending, without `f`.
std::vector<FaceId> edge_adjacent_neighbors(const PolyMesh& mesh, FaceId f);

/// Result of planning a merge without mutating the mesh.
struct MergePlan {
    std::optional<MergeRejection> rejection;
    std::vector<VertexId> cycle; ///< merged CCW boundary when accepted

    explicit operator bool() const { return !rejection.has_value(); }
};

/// Plans the union of two faces. Rejections follow the order: not adjacent,
/// shared edges in several chains, a shared vertex missing from (or repeated
/// on) the merged boundary, differing domain ids.
MergePlan plan_merge(const PolyMesh& mesh, FaceId f1, FaceId f2);

struct MergeOutcome {
    std::optional<FaceId> merged;
    std::optional<MergeRejection> rejection;

    explicit operator bool() const { return merged.has_value(); }
};

/// Replaces f1 and f2 by their union, which takes the id f1.
MergeOutcome merge_faces(PolyMesh& mesh, FaceId f1, FaceId f2);

/// Uniform nx-by-ny node grid; each cell split along its lower-left to
/// upper-right diagonal.
PolyMesh generate_structured_tri(int nx, int ny, Rect domain = {});

/// Uniform nx-by-ny node grid of quadrilateral cells.
PolyMesh generate_structured_quad(int nx, int ny, Rect domain = {});

/// Anisotropic nx-by-ny node grid tiled with a sheared stencil: inside each
/// row strip the diagonals skip one column, and the shear direction
/// alternates from strip to strip. Interior cells produce triangles whose
/// largest angle tends to 180 degrees as the vertical spacing shrinks
/// relative to the horizontal one. Strip ends are closed by right triangles.
PolyMesh generate_anisotropic_tri(int nx, int ny, Rect domain = {});

/// Empty-circumcircle test over every triangle and vertex (quadratic cost).
/// `rel_tol` relaxes the test for cocircular points.
bool is_delaunay(const PolyMesh& mesh, double rel_tol = 1e-9);

enum class MeshFormat { PolyMesh, TriangleNodeEle, Svg };

/// Reads the versioned polymesh text format or a Triangle .node/.ele pair
/// (`path` may name either file or their common stem).
PolyMesh import_mesh(const std::string& path, MeshFormat format);
void export_mesh(const PolyMesh& mesh, const std::string& path, MeshFormat format);

PolyMesh read_polymesh(std::istream& in);
void write_polymesh(const PolyMesh& mesh, std::ostream& out);

} // namespace cutvem
