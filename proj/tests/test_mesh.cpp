#include "cutvem/errors.hpp"
#include "cutvem/fixtures.hpp"
#include "cutvem/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace cutvem;

namespace {

PolyMesh two_triangle_square()
{
    return build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, {0, 0});
}

double min_angle_deg(const PolyMesh& mesh)
{
    double m = 180.0;
    for (FaceId f : mesh.face_ids()) {
        const auto p = mesh.face_points(f);
        for (double a : triangle_angles(p[0], p[1], p[2]))
            m = std::min(m, a * 180.0 / std::numbers::pi);
    }
    return m;
}

void check_half_edge_invariants(const PolyMesh& mesh)
{
    mesh.validate();
    const auto& hes = mesh.half_edges();
    for (std::size_t i = 0; i < hes.size(); ++i) {
        const HalfEdge& he = hes[i];
        if (he.face == kInvalidId)
            continue;
        CHECK(hes[static_cast<std::size_t>(he.next)].prev == static_cast<HalfEdgeId>(i));
        if (he.twin != kInvalidId) {
            CHECK(hes[static_cast<std::size_t>(he.twin)].twin == static_cast<HalfEdgeId>(i));
            CHECK(hes[static_cast<std::size_t>(he.twin)].face != he.face);
        }
    }
}

} // namespace

TEST_CASE("build_mesh on simple inputs")
{
    const PolyMesh square = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}}, {0});
    CHECK(square.num_vertices() == 4);
    CHECK(square.num_faces() == 1);
    CHECK(square.boundary_edges().size() == 4);

    const PolyMesh two = two_triangle_square();
    CHECK(two.num_vertices() == 4);
    CHECK(two.num_faces() == 2);
    CHECK(two.boundary_edges().size() == 4);
    int interior = 0;
    for (const HalfEdge& he : two.half_edges())
        interior += he.twin != kInvalidId;
    CHECK(interior == 2);

    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}}, {{0, 1, 0}}, {0}), NonSimplePolygon);
    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {1, 1}}, {{0, 1, 5}}, {0}), IndexOutOfRange);
}

TEST_CASE("clockwise cycles are reoriented")
{
    const PolyMesh m = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 3, 2, 1}}, {0});
    CHECK(signed_area(m.face_points(0)) == doctest::Approx(1.0));
}

TEST_CASE("edges shared by more than two faces are rejected")
{
    CHECK_THROWS_AS(build_mesh({{0, 0}, {1, 0}, {0.5, 1}, {0.5, -1}, {0.5, 2}},
                               {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}, {0, 0, 0}),
                    NonManifoldEdge);
}

TEST_CASE("dangling vertices are reported")
{
    const PolyMesh m = build_mesh({{0, 0}, {1, 0}, {0, 1}, {5, 5}}, {{0, 1, 2}}, {0});
    CHECK(m.dangling_vertices() == std::vector<VertexId>{3});
}

TEST_CASE("polygon geometry")
{
    const PolyMesh m = build_mesh({{0, 0}, {2, 0}, {2, 1}, {0, 1}}, {{0, 1, 2, 3}}, {0});
    const PolygonGeometry g = polygon_geometry(m, 0);
    CHECK(g.area == doctest::Approx(2.0));
    CHECK(g.diameter == doctest::Approx(std::sqrt(5.0)));
    CHECK(g.vertex_centroid.x == doctest::Approx(1.0));
    CHECK(g.vertex_centroid.y == doctest::Approx(0.5));
}

TEST_CASE("edge adjacency on a quad grid")
{
    const PolyMesh grid = generate_structured_quad(4, 4);
    CHECK(grid.num_faces() == 9);
    CHECK(edge_adjacent_neighbors(grid, 4) == std::vector<FaceId>{1, 3, 5, 7});
    CHECK(edge_adjacent_neighbors(grid, 0) == std::vector<FaceId>{1, 3});
    // diagonal neighbours touch at one vertex only
    const auto n0 = edge_adjacent_neighbors(grid, 0);
    CHECK(std::find(n0.begin(), n0.end(), 4) == n0.end());
}

TEST_CASE("edge adjacency is symmetric")
{
    const std::vector<PolyMesh> meshes{generate_structured_tri(5, 4), generate_anisotropic_tri(4, 12),
                                       needle_fixture(1e-3)};
    for (const PolyMesh& m : meshes)
        for (FaceId a : m.face_ids())
            for (FaceId b : edge_adjacent_neighbors(m, a)) {
                const auto back = edge_adjacent_neighbors(m, b);
                CHECK(std::find(back.begin(), back.end(), a) != back.end());
            }
}

TEST_CASE("merging two triangles across the diagonal")
{
    PolyMesh m = two_triangle_square();
    const auto out = merge_faces(m, 0, 1);
    REQUIRE(out);
    CHECK(*out.merged == 0);
    CHECK(m.num_faces() == 1);
    CHECK(m.face_size(0) == 4);
    CHECK(m.total_area() == doctest::Approx(1.0));
    CHECK(m.num_vertices() == 4);
    check_half_edge_invariants(m);
}

TEST_CASE("merge keeps collinear vertices")
{
    PolyMesh m = build_mesh({{0, 0}, {1, 0}, {0, 1}, {0, 2}}, {{0, 1, 2}, {1, 3, 2}}, {0, 0});
    REQUIRE(merge_faces(m, 0, 1));
    CHECK(m.face_size(0) == 4);
}

TEST_CASE("faces touching at a separate vertex form a pinch")
{
    // B shares the edge x = 1 with the unit square A and also touches it at (0, 1).
    const PolyMesh m = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {2, 0}, {2, 2}, {-1, 2}, {-1, 0.5}, {0.5, 1.5}},
                                  {{0, 1, 2, 3}, {1, 4, 5, 6, 7, 3, 8, 2}}, {0, 0});
    const MergePlan plan = plan_merge(m, 0, 1);
    REQUIRE(plan.rejection.has_value());
    CHECK(*plan.rejection == MergeRejection::PinchVertex);
    PolyMesh copy = m;
    const auto out = merge_faces(copy, 0, 1);
    CHECK_FALSE(out);
    CHECK(copy.num_faces() == 2);
}

TEST_CASE("merge rejections")
{
    const PolyMesh grid = generate_structured_quad(3, 3);
    CHECK(*plan_merge(grid, 0, 3).rejection == MergeRejection::NotAdjacent);
    PolyMesh split = build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, {0, 1});
    CHECK(*plan_merge(split, 0, 1).rejection == MergeRejection::DomainMismatch);

    // B plugs a notch of the cup above a third face C, touching the cup along
    // both notch walls but not in between.
    const PolyMesh cup = build_mesh({{0, 0}, {3, 0}, {3, 2}, {2, 2}, {2, 1.5}, {2, 1}, {1, 1}, {1, 1.5}, {1, 2},
                                     {0, 2}, {1.5, 3}},
                                    {{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, {6, 5, 4, 7}, {7, 4, 3, 10, 8}}, {0, 0, 0});
    CHECK(*plan_merge(cup, 0, 2).rejection == MergeRejection::MultipleChains);
    // merging the plug alone would bury the notch corners
    CHECK(plan_merge(cup, 0, 1).rejection.has_value());
    CHECK(plan_merge(cup, 1, 2));
}

TEST_CASE("merge invariants on random pairs of a structured mesh")
{
    PolyMesh m = generate_structured_tri(6, 6);
    const double area = m.total_area();
    const std::vector<Point2> verts(m.vertices().begin(), m.vertices().end());
    Xorshift64Star rng(9);
    int merges = 0;
    for (int attempt = 0; attempt < 60; ++attempt) {
        const auto ids = m.face_ids();
        const FaceId f = ids[static_cast<std::size_t>(rng.uniform01() * ids.size())];
        const auto nb = edge_adjacent_neighbors(m, f);
        if (nb.empty())
            continue;
        const FaceId g = nb[static_cast<std::size_t>(rng.uniform01() * nb.size())];
        const std::size_t before = m.num_faces();
        const double a1 = signed_area(m.face_points(f)), a2 = signed_area(m.face_points(g));
        if (const auto out = merge_faces(m, f, g)) {
            ++merges;
            CHECK(m.num_faces() == before - 1);
            CHECK(signed_area(m.face_points(*out.merged)) == doctest::Approx(a1 + a2).epsilon(1e-12));
            check_half_edge_invariants(m);
        } else {
            CHECK(m.num_faces() == before);
        }
    }
    CHECK(merges > 10);
    CHECK(m.total_area() == doctest::Approx(area).epsilon(1e-12));
    CHECK(std::equal(verts.begin(), verts.end(), m.vertices().begin(),
                     [](Point2 a, Point2 b) { return a.x == b.x && a.y == b.y; }));
    const PolyMesh c = m.compacted();
    CHECK(c.num_faces() == m.num_faces());
    CHECK(c.face_capacity() == c.num_faces());
    c.validate();
}

TEST_CASE("structured generators")
{
    CHECK(generate_structured_tri(2, 2).num_faces() == 2);
    CHECK(generate_structured_tri(2, 2).num_vertices() == 4);
    CHECK(generate_structured_tri(4, 4).num_vertices() == 16);
    CHECK(generate_structured_tri(4, 4).num_faces() == 18);
    CHECK(generate_structured_tri(4, 2).num_vertices() == 8);
    CHECK(generate_structured_tri(4, 2).num_faces() == 6);
    CHECK(generate_structured_quad(3, 5).num_faces() == 8);
    CHECK(generate_structured_tri(7, 5).total_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(generate_structured_tri(5, 5, Rect{-1.2, -1.2, 1.2, 1.2}).total_area()
          == doctest::Approx(2.4 * 2.4).epsilon(1e-12));
    CHECK(is_delaunay(generate_structured_tri(6, 6)));
}

TEST_CASE("anisotropic generator")
{
    const PolyMesh coarse = generate_anisotropic_tri(2, 10);
    CHECK(coarse.num_vertices() == 20);
    CHECK(coarse.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_angle_deg(coarse) < 15.0);
    const PolyMesh fine = generate_anisotropic_tri(4, 40);
    CHECK(fine.num_vertices() == 160);
    CHECK(fine.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(min_angle_deg(fine) < min_angle_deg(coarse));
    fine.validate();
    // isotropic spacing keeps the angles bounded
    CHECK(min_angle_deg(generate_anisotropic_tri(6, 6)) > 15.0);
    // the sheared stencil is deliberately not Delaunay
    CHECK_FALSE(is_delaunay(generate_anisotropic_tri(4, 36)));
    CHECK(anisotropic_fixture().num_vertices() == 144);
}

TEST_CASE("polymesh round trip")
{
    PolyMesh m = two_triangle_square();
    m.set_vertex_tag(2, 5);
    std::stringstream buf;
    write_polymesh(m, buf);
    const PolyMesh back = read_polymesh(buf);
    CHECK(back.num_vertices() == m.num_vertices());
    CHECK(back.num_faces() == m.num_faces());
    for (FaceId f : m.face_ids()) {
        CHECK(back.face_cycle(f) == m.face_cycle(f));
        CHECK(back.domain_id(f) == m.domain_id(f));
    }
    for (VertexId v = 0; v < 4; ++v) {
        CHECK(back.vertex(v).x == m.vertex(v).x);
        CHECK(back.vertex_tag(v) == m.vertex_tag(v));
    }
}

TEST_CASE("truncated polymesh names the line")
{
    std::stringstream buf("polymesh 1\n4 2\n0 0\n1 0\n1 1\n");
    try {
        read_polymesh(buf);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() >= 5);
    }
    std::stringstream bad("polygons 1\n");
    CHECK_THROWS_AS(read_polymesh(bad), ParseError);
}

TEST_CASE("triangle format with 1-based numbering")
{
    const auto dir = std::filesystem::temp_directory_path() / "cutvem_test_triangle";
    std::filesystem::create_directories(dir);
    {
        std::ofstream node(dir / "box.node");
        node << "# three triangles\n5 2 0 1\n1 0 0 1\n2 1 0 1\n3 1 1 1\n4 0 1 1\n5 0.5 0.5 0\n";
        std::ofstream ele(dir / "box.ele");
        ele << "4 3 1\n1 1 2 5 0\n2 2 3 5 0\n3 3 4 5 1\n4 4 1 5 1\n";
    }
    const PolyMesh m = import_mesh((dir / "box").string(), MeshFormat::TriangleNodeEle);
    CHECK(m.num_vertices() == 5);
    CHECK(m.num_faces() == 4);
    CHECK(m.face_cycle(0) == std::vector<VertexId>{0, 1, 4});
    CHECK(m.domain_id(3) == 1);
    CHECK(m.vertex_tag(0) == 1);
    CHECK(m.vertex_tag(4) == 0);
    CHECK(m.total_area() == doctest::Approx(1.0));
}

TEST_CASE("svg export writes one polygon per face")
{
    const auto path = std::filesystem::temp_directory_path() / "cutvem_test_mesh.svg";
    export_mesh(generate_structured_tri(3, 3), path.string(), MeshFormat::Svg);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    std::size_t count = 0;
    for (auto pos = s.find("<polygon"); pos != std::string::npos; pos = s.find("<polygon", pos + 1))
        ++count;
    CHECK(count == 8);
}
