#pragma once

#include "cutvem/geometry.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

namespace cutvem {

using ScalarField = std::function<double(Point2)>;

/// First-order VEM matrices of one polygon. Monomials are scaled:
/// m1 = 1, m2 = (x − x_K)/h, m3 = (y − y_K)/h with x_K the vertex centroid.
struct ElementMatrices {
    Eigen::MatrixXd D;       ///< N×3
    Eigen::MatrixXd B;       ///< 3×N
    Eigen::Matrix3d G;       ///< B·D
    Eigen::Matrix3d G_tilde; ///< G with the first row zeroed
    Eigen::MatrixXd Pi_star; ///< 3×N, G⁻¹B
    Eigen::MatrixXd Pi;      ///< N×N, D·Π*
    Eigen::MatrixXd K_consis;
    Eigen::MatrixXd K_stab;
    Eigen::MatrixXd K;
    double area = 0.0;
    double diameter = 0.0;
    Point2 centroid;
};

/// K = κ Π*ᵀ G̃ Π* + τ (I − Π)ᵀ(I − Π), symmetrized. Throws SingularG.
ElementMatrices vem_matrices(std::span<const Point2> poly, double kappa, double tau);

/// f_i = |E| f(x_E) / N with x_E the vertex centroid.
Eigen::VectorXd vem_load(std::span<const Point2> poly, const ScalarField& f);

/// Exact P1 stiffness for triangles, 2×2 Gauss Q1 for quadrilaterals.
/// Throws FemOnPolygon for other sizes and NegativeJacobian for tangled quads.
Eigen::MatrixXd fem_stiffness(std::span<const Point2> poly, double kappa);

/// Consistent P1 / Q1 load vector (one-point rule at the centroid per
/// vertex share, matching the VEM load for triangles).
Eigen::VectorXd fem_load(std::span<const Point2> poly, const ScalarField& f);

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// ascending. Converged when every off-diagonal entry is below 1e-14‖A‖_F.
std::vector<double> jacobi_eigenvalues(const Eigen::MatrixXd& A);

/// λ_min/λ_max over the complement of the constant vector, which is
/// deflated exactly rather than by an eigenvalue threshold: the ratio of
/// needle elements falls far below any fixed relative cut-off.
/// Throws UnexpectedNullSpace when the constant vector is not in the kernel
/// or a second non-positive mode remains.
double stability_ratio(const Eigen::MatrixXd& K);

/// σ of the VEM matrix of a polygon.
double polygon_stability_ratio(std::span<const Point2> poly, double kappa = 1.0, double tau = 1.0);

/// 4n tan(π/n) |E| / perimeter².
double quality_metric(std::span<const Point2> poly);

} // namespace cutvem
