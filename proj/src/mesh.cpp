#include "cutvem/mesh.hpp"

#include "cutvem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace cutvem {

const char* to_string(MergeRejection r)
{
    switch (r) {
    case MergeRejection::NotAdjacent:
        return "NotAdjacent";
    case MergeRejection::PinchVertex:
        return "PinchVertex";
    case MergeRejection::MultipleChains:
        return "MultipleChains";
    case MergeRejection::DomainMismatch:
        return "DomainMismatch";
    }
    return "Unknown";
}

namespace {

std::uint64_t edge_key(VertexId a, VertexId b)
{
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32)
           | static_cast<std::uint32_t>(b);
}

} // namespace

bool PolyMesh::is_face(FaceId f) const
{
    return f >= 0 && static_cast<std::size_t>(f) < faces_.size() && faces_[static_cast<std::size_t>(f)].alive;
}

std::vector<FaceId> PolyMesh::face_ids() const
{
    std::vector<FaceId> ids;
    ids.reserve(alive_faces_);
    for (std::size_t f = 0; f < faces_.size(); ++f)
        if (faces_[f].alive)
            ids.push_back(static_cast<FaceId>(f));
    return ids;
}

HalfEdgeId PolyMesh::face_half_edge(FaceId f) const
{
    if (!is_face(f))
        throw IndexOutOfRange("invalid face id " + std::to_string(f));
    return faces_[static_cast<std::size_t>(f)].start;
}

std::vector<VertexId> PolyMesh::face_cycle(FaceId f) const
{
    std::vector<VertexId> cycle;
    const HalfEdgeId start = face_half_edge(f);
    HalfEdgeId h = start;
    do {
        cycle.push_back(half_edges_[static_cast<std::size_t>(h)].origin);
        h = half_edges_[static_cast<std::size_t>(h)].next;
    } while (h != start);
    return cycle;
}

std::vector<Point2> PolyMesh::face_points(FaceId f) const
{
    std::vector<Point2> pts;
    for (VertexId v : face_cycle(f))
        pts.push_back(vertices_[static_cast<std::size_t>(v)]);
    return pts;
}

std::size_t PolyMesh::face_size(FaceId f) const
{
    std::size_t n = 0;
    const HalfEdgeId start = face_half_edge(f);
    HalfEdgeId h = start;
    do {
        ++n;
        h = half_edges_[static_cast<std::size_t>(h)].next;
    } while (h != start);
    return n;
}

int PolyMesh::domain_id(FaceId f) const
{
    if (!is_face(f))
        throw IndexOutOfRange("invalid face id " + std::to_string(f));
    return faces_[static_cast<std::size_t>(f)].domain_id;
}

std::vector<std::pair<VertexId, VertexId>> PolyMesh::boundary_edges() const
{
    std::vector<std::pair<VertexId, VertexId>> edges;
    for (const HalfEdge& he : half_edges_) {
        if (he.face == kInvalidId || he.twin != kInvalidId)
            continue;
        edges.emplace_back(he.origin, half_edges_[static_cast<std::size_t>(he.next)].origin);
    }
    return edges;
}

std::vector<VertexId> PolyMesh::boundary_vertices() const
{
    std::vector<VertexId> vs;
    for (auto [a, b] : boundary_edges()) {
        vs.push_back(a);
        vs.push_back(b);
    }
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
}

std::vector<VertexId> PolyMesh::dangling_vertices() const
{
    std::vector<char> used(vertices_.size(), 0);
    for (const HalfEdge& he : half_edges_)
        if (he.face != kInvalidId)
            used[static_cast<std::size_t>(he.origin)] = 1;
    std::vector<VertexId> out;
    for (std::size_t v = 0; v < used.size(); ++v)
        if (!used[v])
            out.push_back(static_cast<VertexId>(v));
    return out;
}

double PolyMesh::total_area() const
{
    double a = 0.0;
    for (FaceId f : face_ids())
        a += signed_area(face_points(f));
    return a;
}

void PolyMesh::validate() const
{
    std::size_t alive = 0;
    std::vector<char> seen(half_edges_.size(), 0);
    for (std::size_t fi = 0; fi < faces_.size(); ++fi) {
        if (!faces_[fi].alive)
            continue;
        ++alive;
        const auto f = static_cast<FaceId>(fi);
        const HalfEdgeId start = faces_[fi].start;
        HalfEdgeId h = start;
        std::size_t count = 0;
        do {
            if (h < 0 || static_cast<std::size_t>(h) >= half_edges_.size())
                throw InvalidMesh("half-edge index out of range in face " + std::to_string(f));
            const HalfEdge& he = half_edges_[static_cast<std::size_t>(h)];
            if (he.face != f)
                throw InvalidMesh("half-edge face link mismatch in face " + std::to_string(f));
            if (half_edges_[static_cast<std::size_t>(he.next)].prev != h)
                throw InvalidMesh("next/prev links disagree in face " + std::to_string(f));
            if (he.twin != kInvalidId) {
                const HalfEdge& tw = half_edges_[static_cast<std::size_t>(he.twin)];
                if (tw.twin != h)
                    throw InvalidMesh("twin links are not involutive");
                if (tw.face == kInvalidId || tw.face == f)
                    throw InvalidMesh("twin half-edge belongs to no face or the same face");
                if (tw.origin != half_edges_[static_cast<std::size_t>(he.next)].origin)
                    throw InvalidMesh("twin half-edge endpoints disagree");
            }
            if (seen[static_cast<std::size_t>(h)])
                throw InvalidMesh("half-edge visited twice");
            seen[static_cast<std::size_t>(h)] = 1;
            h = he.next;
            if (++count > half_edges_.size())
                throw InvalidMesh("face loop does not close");
        } while (h != start);
        if (count < 3)
            throw InvalidMesh("face with fewer than three vertices");
        const std::vector<Point2> pts = face_points(f);
        if (!(signed_area(pts) > 0.0))
            throw InvalidMesh("face " + std::to_string(f) + " is not counterclockwise");
        if (!is_simple_polygon(pts))
            throw InvalidMesh("face " + std::to_string(f) + " is not a simple polygon");
    }
    if (alive != alive_faces_)
        throw InvalidMesh("alive face count is stale");
    for (std::size_t h = 0; h < half_edges_.size(); ++h)
        if (half_edges_[h].face != kInvalidId && !seen[h])
            throw InvalidMesh("orphan half-edge");
}

PolyMesh PolyMesh::compacted() const
{
    std::vector<std::vector<VertexId>> cycles;
    std::vector<int> ids;
    for (FaceId f : face_ids()) {
        cycles.push_back(face_cycle(f));
        ids.push_back(domain_id(f));
    }
    return build_mesh(vertices_, cycles, ids, tags_);
}

PolyMesh build_mesh(std::vector<Point2> points, const std::vector<std::vector<VertexId>>& cycles,
                    const std::vector<int>& domain_ids, std::vector<int> vertex_tags)
{
    if (domain_ids.size() != cycles.size())
        throw IndexOutOfRange("domain id count differs from face count");
    if (vertex_tags.empty())
        vertex_tags.assign(points.size(), 0);
    if (vertex_tags.size() != points.size())
        throw IndexOutOfRange("vertex tag count differs from vertex count");

    PolyMesh mesh;
    mesh.vertices_ = std::move(points);
    mesh.tags_ = std::move(vertex_tags);
    const auto nv = static_cast<VertexId>(mesh.vertices_.size());

    std::unordered_map<std::uint64_t, HalfEdgeId> directed;
    directed.reserve(cycles.size() * 4);

    for (std::size_t fi = 0; fi < cycles.size(); ++fi) {
        std::vector<VertexId> cycle = cycles[fi];
        if (cycle.size() < 3)
            throw NonSimplePolygon("face " + std::to_string(fi) + " has fewer than three vertices");
        for (VertexId v : cycle)
            if (v < 0 || v >= nv)
                throw IndexOutOfRange("face " + std::to_string(fi) + " references vertex " + std::to_string(v));
        std::vector<VertexId> sorted = cycle;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw NonSimplePolygon("face " + std::to_string(fi) + " repeats a vertex");

        std::vector<Point2> pts;
        for (VertexId v : cycle)
            pts.push_back(mesh.vertices_[static_cast<std::size_t>(v)]);
        if (!is_simple_polygon(pts))
            throw NonSimplePolygon("face " + std::to_string(fi) + " is not a simple polygon");
        if (signed_area(pts) < 0.0)
            std::reverse(cycle.begin(), cycle.end());

        const auto base = static_cast<HalfEdgeId>(mesh.half_edges_.size());
        const auto n = static_cast<HalfEdgeId>(cycle.size());
        for (HalfEdgeId k = 0; k < n; ++k) {
            HalfEdge he;
            he.origin = cycle[static_cast<std::size_t>(k)];
            he.next = base + (k + 1) % n;
            he.prev = base + (k + n - 1) % n;
            he.face = static_cast<FaceId>(fi);
            mesh.half_edges_.push_back(he);
            const VertexId dest = cycle[static_cast<std::size_t>((k + 1) % n)];
            auto [it, inserted] = directed.emplace(edge_key(he.origin, dest), base + k);
            if (!inserted)
                throw NonManifoldEdge("edge (" + std::to_string(he.origin) + ", " + std::to_string(dest)
                                      + ") is used twice with the same orientation");
        }
        mesh.faces_.push_back({base, domain_ids[fi], true});
    }
    mesh.alive_faces_ = mesh.faces_.size();

    for (std::size_t h = 0; h < mesh.half_edges_.size(); ++h) {
        HalfEdge& he = mesh.half_edges_[h];
        const VertexId dest = mesh.half_edges_[static_cast<std::size_t>(he.next)].origin;
        auto it = directed.find(edge_key(dest, he.origin));
        if (it != directed.end())
            he.twin = it->second;
    }
    return mesh;
}

PolyMesh with_vertices(const PolyMesh& mesh, std::vector<Point2> points)
{
    if (points.size() != mesh.vertices_.size())
        throw IndexOutOfRange("vertex count mismatch");
    PolyMesh out = mesh;
    out.vertices_ = std::move(points);
    return out;
}

PolygonGeometry polygon_geometry(const PolyMesh& mesh, FaceId f)
{
    const std::vector<Point2> pts = mesh.face_points(f);
    return {signed_area(pts), diameter(pts), vertex_centroid(pts)};
}

std::vector<FaceId> edge_adjacent_neighbors(const PolyMesh& mesh, FaceId f)
{
    const auto& hes = mesh.half_edges();
    std::vector<FaceId> out;
    const HalfEdgeId start = mesh.face_half_edge(f);
    HalfEdgeId h = start;
    do {
        const HalfEdge& he = hes[static_cast<std::size_t>(h)];
        if (he.twin != kInvalidId)
            out.push_back(hes[static_cast<std::size_t>(he.twin)].face);
        h = he.next;
    } while (h != start);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

struct SharedChain {
    HalfEdgeId first = kInvalidId; ///< first shared half-edge of f1, in f1 order
    HalfEdgeId last = kInvalidId;
    std::optional<MergeRejection> rejection;
};

SharedChain find_shared_chain(const PolyMesh& mesh, FaceId f1, FaceId f2)
{
    const auto& hes = mesh.half_edges();
    auto shared = [&](HalfEdgeId h) {
        const HalfEdge& he = hes[static_cast<std::size_t>(h)];
        return he.twin != kInvalidId && hes[static_cast<std::size_t>(he.twin)].face == f2;
    };
    SharedChain chain;
    const HalfEdgeId start = mesh.face_half_edge(f1);
    int runs = 0;
    HalfEdgeId h = start;
    do {
        const HalfEdgeId prev = hes[static_cast<std::size_t>(h)].prev;
        if (shared(h) && !shared(prev)) {
            ++runs;
            chain.first = h;
        }
        h = hes[static_cast<std::size_t>(h)].next;
    } while (h != start);
    if (runs == 0) {
        // Either no shared edge or every edge is shared (not a valid partition).
        chain.rejection = shared(start) ? MergeRejection::MultipleChains : MergeRejection::NotAdjacent;
        return chain;
    }
    if (runs > 1) {
        chain.rejection = MergeRejection::MultipleChains;
        return chain;
    }
    h = chain.first;
    while (shared(hes[static_cast<std::size_t>(h)].next))
        h = hes[static_cast<std::size_t>(h)].next;
    chain.last = h;
    return chain;
}

} // namespace

MergePlan plan_merge(const PolyMesh& mesh, FaceId f1, FaceId f2)
{
    MergePlan plan;
    if (f1 == f2 || !mesh.is_face(f1) || !mesh.is_face(f2)) {
        plan.rejection = MergeRejection::NotAdjacent;
        return plan;
    }
    const SharedChain chain = find_shared_chain(mesh, f1, f2);
    if (chain.rejection) {
        plan.rejection = chain.rejection;
        return plan;
    }
    const auto& hes = mesh.half_edges();
    auto he = [&](HalfEdgeId h) -> const HalfEdge& { return hes[static_cast<std::size_t>(h)]; };

    // f1 from the chain's end vertex round to its start, then f2 back again.
    std::vector<VertexId> cycle;
    for (HalfEdgeId h = he(chain.last).next; h != chain.first; h = he(h).next)
        cycle.push_back(he(h).origin);
    const HalfEdgeId twin_first = he(chain.first).twin;
    const HalfEdgeId twin_last = he(chain.last).twin;
    for (HalfEdgeId h = he(twin_first).next; h != twin_last; h = he(h).next)
        cycle.push_back(he(h).origin);

    std::vector<VertexId> merged_sorted = cycle;
    std::sort(merged_sorted.begin(), merged_sorted.end());
    const bool repeats = std::adjacent_find(merged_sorted.begin(), merged_sorted.end()) != merged_sorted.end();

    std::vector<VertexId> all = mesh.face_cycle(f1);
    const std::vector<VertexId> c2 = mesh.face_cycle(f2);
    all.insert(all.end(), c2.begin(), c2.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());

    if (repeats || all != merged_sorted) {
        plan.rejection = MergeRejection::PinchVertex;
        return plan;
    }
    if (mesh.domain_id(f1) != mesh.domain_id(f2)) {
        plan.rejection = MergeRejection::DomainMismatch;
        return plan;
    }
    plan.cycle = std::move(cycle);
    return plan;
}

std::optional<FaceId> commit_merge(PolyMesh& mesh, FaceId f1, FaceId f2)
{
    const SharedChain chain = find_shared_chain(mesh, f1, f2);
    auto& hes = mesh.half_edges_;
    auto he = [&](HalfEdgeId h) -> HalfEdge& { return hes[static_cast<std::size_t>(h)]; };

    const HalfEdgeId twin_first = he(chain.first).twin;
    const HalfEdgeId twin_last = he(chain.last).twin;
    const HalfEdgeId before = he(chain.first).prev;
    const HalfEdgeId after = he(chain.last).next;
    const HalfEdgeId f2_after = he(twin_first).next;
    const HalfEdgeId f2_before = he(twin_last).prev;

    // Retire the chain on both sides.
    std::vector<HalfEdgeId> dead;
    for (HalfEdgeId h = chain.first;; h = he(h).next) {
        dead.push_back(h);
        dead.push_back(he(h).twin);
        if (h == chain.last)
            break;
    }
    for (HalfEdgeId h = f2_after; h != twin_last; h = he(h).next)
        he(h).face = f1;

    he(before).next = f2_after;
    he(f2_after).prev = before;
    he(f2_before).next = after;
    he(after).prev = f2_before;

    for (HalfEdgeId h : dead) {
        HalfEdge& d = he(h);
        d.face = kInvalidId;
        d.twin = kInvalidId;
        d.next = h;
        d.prev = h;
    }
    mesh.faces_[static_cast<std::size_t>(f1)].start = after;
    mesh.faces_[static_cast<std::size_t>(f2)].alive = false;
    mesh.faces_[static_cast<std::size_t>(f2)].start = kInvalidId;
    --mesh.alive_faces_;
    return f1;
}

MergeOutcome merge_faces(PolyMesh& mesh, FaceId f1, FaceId f2)
{
    MergeOutcome out;
    const MergePlan plan = plan_merge(mesh, f1, f2);
    if (!plan) {
        out.rejection = plan.rejection;
        return out;
    }
    out.merged = commit_merge(mesh, f1, f2);
    return out;
}

PolyMesh generate_structured_tri(int nx, int ny, Rect domain)
{
    if (nx < 2 || ny < 2)
        throw IndexOutOfRange("structured grids need at least 2 nodes per direction");
    std::vector<Point2> pts;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({domain.x0 + domain.width() * i / (nx - 1), domain.y0 + domain.height() * j / (ny - 1)});
    auto id = [nx](int i, int j) { return static_cast<VertexId>(j * nx + i); };
    std::vector<std::vector<VertexId>> cycles;
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            cycles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            cycles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    return build_mesh(std::move(pts), cycles, std::vector<int>(cycles.size(), 0));
}

PolyMesh generate_structured_quad(int nx, int ny, Rect domain)
{
    if (nx < 2 || ny < 2)
        throw IndexOutOfRange("structured grids need at least 2 nodes per direction");
    std::vector<Point2> pts;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({domain.x0 + domain.width() * i / (nx - 1), domain.y0 + domain.height() * j / (ny - 1)});
    auto id = [nx](int i, int j) { return static_cast<VertexId>(j * nx + i); };
    std::vector<std::vector<VertexId>> cycles;
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i)
            cycles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    return build_mesh(std::move(pts), cycles, std::vector<int>(cycles.size(), 0));
}

PolyMesh generate_anisotropic_tri(int nx, int ny, Rect domain)
{
    if (nx < 2 || ny < 2)
        throw IndexOutOfRange("structured grids need at least 2 nodes per direction");
    std::vector<Point2> pts;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            pts.push_back({domain.x0 + domain.width() * i / (nx - 1), domain.y0 + domain.height() * j / (ny - 1)});
    const int n = nx - 1;
    std::vector<std::vector<VertexId>> cycles;
    for (int j = 0; j + 1 < ny; ++j) {
        // Odd strips are the mirror image of even ones.
        const bool mirrored = (j % 2) == 1;
        auto col = [&](int i) { return mirrored ? n - i : i; };
        auto b = [&](int i) { return static_cast<VertexId>(j * nx + col(i)); };
        auto t = [&](int i) { return static_cast<VertexId>((j + 1) * nx + col(i)); };
        std::vector<std::vector<VertexId>> strip;
        strip.push_back({b(0), t(1), t(0)});
        for (int i = 0; i + 1 < n; ++i) {
            strip.push_back({b(i), b(i + 1), t(i + 2)});
            strip.push_back({b(i), t(i + 2), t(i + 1)});
        }
        strip.push_back({b(n - 1), b(n), t(n)});
        for (auto& c : strip) {
            if (mirrored)
                std::reverse(c.begin(), c.end());
            cycles.push_back(std::move(c));
        }
    }
    return build_mesh(std::move(pts), cycles, std::vector<int>(cycles.size(), 0));
}

bool is_delaunay(const PolyMesh& mesh, double rel_tol)
{
    const auto pts = mesh.vertices();
    for (FaceId f : mesh.face_ids()) {
        const std::vector<Point2> tri = mesh.face_points(f);
        if (tri.size() != 3)
            return false;
        const Point2 a = tri[0], b = tri[1], c = tri[2];
        const double d = 2.0 * orient2d(a, b, c);
        const double a2 = dot(a, a), b2 = dot(b, b), c2 = dot(c, c);
        const Point2 center{(a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                            (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d};
        const double r = distance(center, a);
        for (const Point2& p : pts) {
            if (p == a || p == b || p == c)
                continue;
            if (distance(center, p) < r * (1.0 - rel_tol))
                return false;
        }
    }
    return true;
}

} // namespace cutvem
