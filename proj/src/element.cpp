#include "cutvem/element.hpp"

#include "cutvem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cutvem {

ElementMatrices vem_matrices(std::span<const Point2> poly, double kappa, double tau)
{
    const auto n = static_cast<Eigen::Index>(poly.size());
    if (n < 3)
        throw NonSimplePolygon("VEM element needs at least three vertices");
    ElementMatrices em;
    em.area = signed_area(poly);
    em.diameter = diameter(poly);
    em.centroid = vertex_centroid(poly);
    const double h = em.diameter;
    const Point2 c = em.centroid;

    em.D.resize(n, 3);
    em.B.resize(3, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Point2 p = poly[static_cast<std::size_t>(i)];
        const Point2 next = poly[static_cast<std::size_t>((i + 1) % n)];
        const Point2 prev = poly[static_cast<std::size_t>((i + n - 1) % n)];
        em.D(i, 0) = 1.0;
        em.D(i, 1) = (p.x - c.x) / h;
        em.D(i, 2) = (p.y - c.y) / h;
        em.B(0, i) = 1.0 / static_cast<double>(n);
        em.B(1, i) = 0.5 * (next.y - prev.y) / h;
        em.B(2, i) = 0.5 * (prev.x - next.x) / h;
    }
    em.G = em.B * em.D;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(em.G);
    if (!lu.isInvertible() || std::abs(em.G.determinant()) < 1e-300)
        throw SingularG("G is singular; is the polygon degenerate?");
    em.Pi_star = lu.solve(em.B);
    em.Pi = em.D * em.Pi_star;
    em.G_tilde = em.G;
    em.G_tilde.row(0).setZero();

    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = I - em.Pi;
    em.K_consis = kappa * (em.Pi_star.transpose() * em.G_tilde * em.Pi_star);
    em.K_consis = 0.5 * (em.K_consis + em.K_consis.transpose()).eval();
    em.K_stab = tau * (R.transpose() * R);
    em.K_stab = 0.5 * (em.K_stab + em.K_stab.transpose()).eval();
    em.K = em.K_consis + em.K_stab;
    return em;
}

Eigen::VectorXd vem_load(std::span<const Point2> poly, const ScalarField& f)
{
    const auto n = static_cast<Eigen::Index>(poly.size());
    const double value = signed_area(poly) * f(vertex_centroid(poly)) / static_cast<double>(n);
    return Eigen::VectorXd::Constant(n, value);
}

Eigen::MatrixXd fem_stiffness(std::span<const Point2> poly, double kappa)
{
    if (poly.size() == 3) {
        const double area = signed_area(poly);
        Eigen::Matrix<double, 3, 2> grad;
        for (int i = 0; i < 3; ++i) {
            const Point2 a = poly[static_cast<std::size_t>((i + 1) % 3)];
            const Point2 b = poly[static_cast<std::size_t>((i + 2) % 3)];
            grad(i, 0) = (a.y - b.y) / (2.0 * area);
            grad(i, 1) = (b.x - a.x) / (2.0 * area);
        }
        return kappa * area * grad * grad.transpose();
    }
    if (poly.size() == 4) {
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(4, 4);
        const double g = 1.0 / std::sqrt(3.0);
        const double xi_n[4] = {-1, 1, 1, -1};
        const double eta_n[4] = {-1, -1, 1, 1};
        for (double xi : {-g, g})
            for (double eta : {-g, g}) {
                Eigen::Matrix<double, 4, 2> dN;
                for (int a = 0; a < 4; ++a) {
                    dN(a, 0) = 0.25 * xi_n[a] * (1.0 + eta_n[a] * eta);
                    dN(a, 1) = 0.25 * eta_n[a] * (1.0 + xi_n[a] * xi);
                }
                Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
                for (int a = 0; a < 4; ++a) {
                    J(0, 0) += dN(a, 0) * poly[static_cast<std::size_t>(a)].x;
                    J(0, 1) += dN(a, 0) * poly[static_cast<std::size_t>(a)].y;
                    J(1, 0) += dN(a, 1) * poly[static_cast<std::size_t>(a)].x;
                    J(1, 1) += dN(a, 1) * poly[static_cast<std::size_t>(a)].y;
                }
                const double det = J.determinant();
                if (!(det > 0.0))
                    throw NegativeJacobian("non-positive Jacobian in quadrilateral");
                const Eigen::Matrix<double, 4, 2> dX = dN * J.inverse().transpose();
                K += kappa * det * dX * dX.transpose();
            }
        return 0.5 * (K + K.transpose());
    }
    throw FemOnPolygon("FEM stiffness needs a triangle or quadrilateral, got " + std::to_string(poly.size())
                       + " vertices");
}

Eigen::VectorXd fem_load(std::span<const Point2> poly, const ScalarField& f)
{
    if (poly.size() != 3 && poly.size() != 4)
        throw FemOnPolygon("FEM load needs a triangle or quadrilateral");
    return vem_load(poly, f);
}

std::vector<double> jacobi_eigenvalues(const Eigen::MatrixXd& A_in)
{
    Eigen::MatrixXd A = A_in;
    const Eigen::Index n = A.rows();
    const double fro = A.norm();
    const double tol = 1e-14 * fro;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off = std::max(off, std::abs(A(p, q)));
        if (off <= tol)
            break;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= tol)
                    continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        ev[static_cast<std::size_t>(i)] = A(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

double stability_ratio(const Eigen::MatrixXd& K)
{
    const Eigen::Index n = K.rows();
    if (n < 2 || K.cols() != n)
        throw UnexpectedNullSpace("stability ratio needs a square matrix of size at least 2");
    const double scale = K.cwiseAbs().maxCoeff();
    if (!(scale > 0.0))
        throw UnexpectedNullSpace("element matrix is zero");
    if ((K * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() > 1e-8 * scale)
        throw UnexpectedNullSpace("constant vector is not in the kernel");
    // Orthonormal basis of the complement of the constant vector (Householder
    // reflector mapping e_0 to the normalized constant).
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    v[0] -= 1.0;
    const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - (2.0 / v.squaredNorm()) * v * v.transpose();
    const Eigen::MatrixXd Q = H.rightCols(n - 1);
    const Eigen::MatrixXd R = Q.transpose() * K * Q;
    const std::vector<double> ev = jacobi_eigenvalues(0.5 * (R + R.transpose()));
    const double lmax = ev.back();
    const double lmin = ev.front();
    if (!(lmin > 0.0))
        throw UnexpectedNullSpace("more than one null mode (smallest deflated eigenvalue " + std::to_string(lmin)
                                  + ")");
    return lmin / lmax;
}

double polygon_stability_ratio(std::span<const Point2> poly, double kappa, double tau)
{
    if (!(kappa > 0.0) || (poly.size() > 3 && !(tau > 0.0)))
        throw UnexpectedNullSpace("stabilization must be positive on polygons with more than three vertices");
    return stability_ratio(vem_matrices(poly, kappa, tau).K);
}

double quality_metric(std::span<const Point2> poly)
{
    const double n = static_cast<double>(poly.size());
    const double p = perimeter(poly);
    return 4.0 * n * std::tan(std::numbers::pi / n) * signed_area(poly) / (p * p);
}

} // namespace cutvem
