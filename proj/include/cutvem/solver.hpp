#pragma once

#include "cutvem/agglomeration.hpp"
#include "cutvem/element.hpp"
#include "cutvem/linalg.hpp"
#include "cutvem/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace cutvem {

/// Vertex tag bits written by the geometry pipelines.
inline constexpr int kClipTag = 1;
inline constexpr int kInnerCircleTag = 2;
inline constexpr int kOuterCircleTag = 4;

/// Domain ids used by the immersed-disc pipelines.
inline constexpr int kMatrixDomain = 0;
inline constexpr int kInclusionDomain = 1;
inline constexpr int kExteriorDomain = 9;

enum class Method { Vem, Fem };

const char* to_string(Method m);

/// Field that may depend on the subdomain of the face it is evaluated in.
using DomainField = std::function<double(Point2, int)>;
using DomainGradient = std::function<Point2(Point2, int)>;

struct ProblemSpec {
    std::string name;
    ScalarField source;
    /// Selects Dirichlet boundary vertices from their position and tag.
    std::function<bool(Point2, int)> is_dirichlet;
    ScalarField dirichlet;
    /// Normal flux on the remaining boundary edges; empty means zero.
    ScalarField neumann;
    MaterialSpec material;
    DomainField exact;
    DomainGradient exact_gradient;
};

struct DiscreteSolution {
    Eigen::VectorXd u;
    /// Per face slot (indexed by face id); zero for retired slots.
    std::vector<Point2> gradient;
    std::vector<int> dirichlet_dofs;
    double residual = 0.0;
    int iterations = 0;
};

/// Assembled unconstrained stiffness of the mesh. FEM requires triangles or
/// quadrilaterals (FemOnPolygon otherwise).
SparseSymMatrix assemble_stiffness(const PolyMesh& mesh, const MaterialSpec& material, Method method);

/// Strong Dirichlet elimination, trapezoidal Neumann loads, SPD solve.
/// Throws NoDirichlet, NotConverged and FemOnPolygon.
DiscreteSolution solve_problem(const PolyMesh& mesh, const ProblemSpec& problem, Method method);

/// Constant gradient per face slot: the projected gradient for VEM, the
/// P1 gradient (Q1 at the centroid for quads) for FEM.
std::vector<Point2> gradient_field(const PolyMesh& mesh, const Eigen::VectorXd& values, Method method);

struct ErrorNorms {
    double l2_rel = 0.0;
    double h1_rel = 0.0;
};

/// Relative L² and H¹-seminorm errors of the per-face affine projection of
/// the discrete solution, integrated by ear clipping and a degree-4 rule.
ErrorNorms error_norms(const PolyMesh& mesh, const Eigen::VectorXd& values, const ProblemSpec& problem);

/// Presets: sinsin, clipped_dirichlet, clipped_mixed, annulus, bimaterial
/// (κ_inclusion = ratio, κ_matrix = 1). Throws UnknownPreset.
ProblemSpec preset_problem(const std::string& name, double ratio = 1.0);

} // namespace cutvem
