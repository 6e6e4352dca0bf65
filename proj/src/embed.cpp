#include "cutvem/embed.hpp"

#include "cutvem/errors.hpp"
#include "cutvem/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace cutvem {

namespace {

std::vector<double> longest_incident_edge(const PolyMesh& mesh)
{
    std::vector<double> h(mesh.num_vertices(), 0.0);
    const auto& hes = mesh.half_edges();
    for (const HalfEdge& he : hes) {
        if (he.face == kInvalidId)
            continue;
        const VertexId a = he.origin;
        const VertexId b = hes[static_cast<std::size_t>(he.next)].origin;
        const double len = distance(mesh.vertex(a), mesh.vertex(b));
        h[static_cast<std::size_t>(a)] = std::max(h[static_cast<std::size_t>(a)], len);
        h[static_cast<std::size_t>(b)] = std::max(h[static_cast<std::size_t>(b)], len);
    }
    return h;
}

std::vector<std::vector<FaceId>> incident_faces(const PolyMesh& mesh)
{
    std::vector<std::vector<FaceId>> out(mesh.num_vertices());
    for (FaceId f : mesh.face_ids())
        for (VertexId v : mesh.face_cycle(f))
            out[static_cast<std::size_t>(v)].push_back(f);
    return out;
}

int sign_of(double v)
{
    return (v > 0.0) - (v < 0.0);
}

bool is_convex_ccw(const std::vector<Point2>& pts)
{
    const std::size_t n = pts.size();
    const double h = diameter(pts);
    const double tol = 1e-12 * h * h;
    for (std::size_t i = 0; i < n; ++i)
        if (orient2d(pts[i], pts[(i + 1) % n], pts[(i + 2) % n]) < -tol)
            return false;
    return true;
}

constexpr int kDiscarded = std::numeric_limits<int>::min();

DiscardResult discard_impl(const PolyMesh& mesh, const std::vector<int>& domain_ids, bool allow_empty)
{
    DiscardResult result;
    result.old_to_new.assign(mesh.num_vertices(), kInvalidId);
    std::vector<std::vector<VertexId>> cycles;
    std::vector<int> domains;
    for (FaceId f : mesh.face_ids()) {
        const int d = mesh.domain_id(f);
        if (std::find(domain_ids.begin(), domain_ids.end(), d) != domain_ids.end())
            continue;
        cycles.push_back(mesh.face_cycle(f));
        domains.push_back(d);
        for (VertexId v : cycles.back())
            result.old_to_new[static_cast<std::size_t>(v)] = 0;
    }
    if (cycles.empty()) {
        if (!allow_empty)
            throw EmptyResult("no face survives the discard");
        std::fill(result.old_to_new.begin(), result.old_to_new.end(), kInvalidId);
        return result;
    }
    std::vector<Point2> pts;
    std::vector<int> tags;
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        if (result.old_to_new[v] == kInvalidId)
            continue;
        result.old_to_new[v] = static_cast<VertexId>(pts.size());
        pts.push_back(mesh.vertex(static_cast<VertexId>(v)));
        tags.push_back(mesh.vertex_tag(static_cast<VertexId>(v)));
    }
    for (auto& c : cycles)
        for (VertexId& v : c)
            v = result.old_to_new[static_cast<std::size_t>(v)];
    result.mesh = build_mesh(std::move(pts), cycles, domains, std::move(tags));
    return result;
}

} // namespace

NodalLevelSet sample_levelset(const PolyMesh& mesh, const LevelSetField& phi, double snap_tol)
{
    const std::vector<double> h = longest_incident_edge(mesh);
    NodalLevelSet nodal;
    nodal.values.resize(mesh.num_vertices());
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v) {
        const double value = phi(mesh.vertex(static_cast<VertexId>(v)));
        nodal.values[v] = std::abs(value) < snap_tol * h[v] ? 0.0 : value;
    }
    return nodal;
}

PolyMesh perturb_vertices(const PolyMesh& mesh, const LevelSetField& phi, double h, std::uint64_t seed,
                          double band, double amplitude)
{
    if (!(h > 0.0))
        throw Error("perturb_vertices needs h > 0");
    std::vector<Point2> pts(mesh.vertices().begin(), mesh.vertices().end());
    const auto faces = incident_faces(mesh);
    const auto boundary = mesh.boundary_vertices();

    auto faces_ok = [&](VertexId v) {
        for (FaceId f : faces[static_cast<std::size_t>(v)]) {
            std::vector<Point2> poly;
            for (VertexId w : mesh.face_cycle(f))
                poly.push_back(pts[static_cast<std::size_t>(w)]);
            if (!(signed_area(poly) > 0.0))
                return false;
            if (poly.size() > 3 && !is_simple_polygon(poly))
                return false;
        }
        return true;
    };

    for (std::size_t v = 0; v < pts.size(); ++v) {
        const Point2 original = pts[v];
        if (!(std::abs(phi(original)) < band * h))
            continue;
        if (std::binary_search(boundary.begin(), boundary.end(), static_cast<VertexId>(v)))
            continue;
        auto rng = Xorshift64Star::stream(seed, v);
        const double d1 = rng.uniform(-1.0, 1.0);
        const double d2 = rng.uniform(-1.0, 1.0);
        double amp = amplitude * h;
        bool placed = false;
        for (int attempt = 0; attempt <= 5 && !placed; ++attempt, amp *= 0.5) {
            pts[v] = {original.x + amp * d1, original.y + amp * d2};
            placed = faces_ok(static_cast<VertexId>(v));
        }
        if (!placed)
            pts[v] = original;
    }
    return with_vertices(mesh, std::move(pts));
}

PolyMesh cut_mesh(const PolyMesh& mesh, const NodalLevelSet& nodal, const CutOptions& options)
{
    if (nodal.values.size() != mesh.num_vertices())
        throw IndexOutOfRange("nodal level set size differs from vertex count");
    const auto relabel = options.relabel ? options.relabel : [](int, int side) { return side; };

    std::vector<Point2> pts(mesh.vertices().begin(), mesh.vertices().end());
    std::vector<int> tags(mesh.vertex_tags().begin(), mesh.vertex_tags().end());
    std::vector<std::vector<VertexId>> cycles;
    std::vector<int> domains;
    std::vector<int> sides;
    std::map<std::pair<VertexId, VertexId>, VertexId> inserted;

    auto edge_zero = [&](VertexId a, VertexId b) {
        const auto key = std::minmax(a, b);
        auto it = inserted.find(key);
        if (it != inserted.end())
            return it->second;
        const double fa = nodal.values[static_cast<std::size_t>(key.first)];
        const double fb = nodal.values[static_cast<std::size_t>(key.second)];
        const double t = fa / (fa - fb);
        const Point2 pa = pts[static_cast<std::size_t>(key.first)];
        const Point2 pb = pts[static_cast<std::size_t>(key.second)];
        const auto id = static_cast<VertexId>(pts.size());
        pts.push_back(pa + t * (pb - pa));
        tags.push_back(0);
        inserted.emplace(key, id);
        return id;
    };

    for (FaceId f : mesh.face_ids()) {
        const std::vector<VertexId> cycle = mesh.face_cycle(f);
        const std::size_t n = cycle.size();
        std::vector<int> s(n);
        bool neg = false, pos = false;
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = sign_of(nodal.values[static_cast<std::size_t>(cycle[i])]);
            neg = neg || s[i] < 0;
            pos = pos || s[i] > 0;
        }
        const int old_id = mesh.domain_id(f);
        if (!(neg && pos)) {
            const int side = pos ? 1 : 0;
            cycles.push_back(cycle);
            domains.push_back(relabel(old_id, side));
            sides.push_back(side);
            continue;
        }
        const std::vector<Point2> poly = mesh.face_points(f);
        if (!is_convex_ccw(poly))
            throw NotATriangulation("face " + std::to_string(f) + " must be convex to be cut");

        int changes = 0;
        int last = 0;
        for (std::size_t k = 0; k < 2 * n; ++k) {
            const int sk = s[k % n];
            if (sk == 0)
                continue;
            if (last != 0 && sk != last && k >= n)
                ++changes;
            last = sk;
        }
        if (changes != 2)
            throw DegenerateCut("face " + std::to_string(f) + " is crossed more than once");

        std::vector<VertexId> lower, upper;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            if (s[i] <= 0)
                lower.push_back(cycle[i]);
            if (s[i] >= 0)
                upper.push_back(cycle[i]);
            if (s[i] * s[j] < 0) {
                const VertexId z = edge_zero(cycle[i], cycle[j]);
                lower.push_back(z);
                upper.push_back(z);
            }
        }
        auto area_of = [&](const std::vector<VertexId>& c) {
            std::vector<Point2> q;
            for (VertexId v : c)
                q.push_back(pts[static_cast<std::size_t>(v)]);
            return signed_area(q);
        };
        const double parent = signed_area(poly);
        if (lower.size() < 3 || upper.size() < 3
            || std::abs(area_of(lower) + area_of(upper) - parent) > 1e-9 * parent)
            throw DegenerateCut("face " + std::to_string(f) + " has an ambiguous zero pattern");
        cycles.push_back(std::move(lower));
        domains.push_back(relabel(old_id, 0));
        sides.push_back(0);
        cycles.push_back(std::move(upper));
        domains.push_back(relabel(old_id, 1));
        sides.push_back(1);
    }

    PolyMesh out = build_mesh(std::move(pts), cycles, domains, std::move(tags));
    const auto& hes = out.half_edges();
    for (const HalfEdge& he : hes) {
        if (he.face == kInvalidId || he.twin == kInvalidId)
            continue;
        const FaceId other = hes[static_cast<std::size_t>(he.twin)].face;
        if (sides[static_cast<std::size_t>(he.face)] == sides[static_cast<std::size_t>(other)])
            continue;
        for (VertexId v : {he.origin, hes[static_cast<std::size_t>(he.next)].origin})
            out.set_vertex_tag(v, out.vertex_tag(v) | options.interface_tag);
    }
    return out;
}

PolyMesh clip_halfplane(const PolyMesh& mesh, Point2 normal, double offset, int keep_sign, int tag)
{
    if (keep_sign != -1 && keep_sign != 1)
        throw Error("keep_sign must be -1 or +1");
    const int kept_side = keep_sign < 0 ? 0 : 1;
    CutOptions options;
    options.interface_tag = tag;
    options.relabel = [kept_side](int old_id, int side) { return side == kept_side ? old_id : kDiscarded; };
    const PolyMesh cut = cut_mesh(mesh, sample_levelset(mesh, LevelSetField::line(normal, offset)), options);
    return discard_impl(cut, {kDiscarded}, true).mesh;
}

DiscardResult discard_subdomains(const PolyMesh& mesh, const std::vector<int>& domain_ids)
{
    return discard_impl(mesh, domain_ids, false);
}

} // namespace cutvem
