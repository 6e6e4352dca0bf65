// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include "cutvem/agglomeration.hpp"
#include "cutvem/element.hpp"
#include "cutvem/embed.hpp"
#include "cutvem/experiments.hpp"
#include "cutvem/fixtures.hpp"
#include "cutvem/linalg.hpp"
#include "cutvem/rng.hpp"
#include "cutvem/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

using namespace cutvem;
namespace fs = std::filesystem;

namespace {

class Criterion {
public:
    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            ok_ = false;
            failed_.push_back(what);
        }
    }
    template <class T>
    Criterion& operator<<(const T& v)
    {
        detail_ << v;
        return *this;
    }
    bool ok() const { return ok_; }
    std::string detail() const { return detail_.str(); }
    const std::vector<std::string>& failed() const { return failed_; }

private:
    bool ok_ = true;
    std::ostringstream detail_;
    std::vector<std::string> failed_;
};

double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

SparseSymMatrix dense_to_sparse(const Eigen::MatrixXd& A)
{
    Assembler asmb(static_cast<std::size_t>(A.rows()));
    std::vector<int> dofs(static_cast<std::size_t>(A.rows()));
    std::iota(dofs.begin(), dofs.end(), 0);
    asmb.add(dofs, A);
    return asmb.matrix();
}

Eigen::MatrixXd random_matrix(Xorshift64Star& rng, int rows, int cols)
{
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            M(i, j) = rng.uniform(-1, 1);
    return M;
}

Eigen::Matrix3d p1_oracle(const std::vector<Point2>& t)
{
    // K_ij = (e_i · e_j) / (4|T|) with e_i the edge opposite vertex i
    const double area = 0.5 * orient2d(t[0], t[1], t[2]);
    Eigen::Matrix3d K;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const Point2 ei = t[(i + 2) % 3] - t[(i + 1) % 3];
            const Point2 ej = t[(j + 2) % 3] - t[(j + 1) % 3];
            K(i, j) = dot(ei, ej) / (4.0 * area);
        }
    return K;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------

void kernel_exactness(Criterion& c)
{
    Xorshift64Star rng(1001);
    int count = 0;
    double worst_g = 0.0, worst_k1 = 0.0;
    for (int i = 0; i < 1200; ++i) {
        const int n = 3 + i % 10;
        const auto poly = (i % 2) ? random_star_polygon(rng, n) : random_convex_polygon(rng, n);
        const ElementMatrices e = vem_matrices(poly, 1.0, 1.0);
        worst_g = std::max(worst_g, rel_diff(e.G, e.B * e.D));
        // closed form with centroid-scaled monomials: mean row (1, 0, 0) and
        // |E|/h² on the gradient block
        Eigen::Matrix3d closed = Eigen::Matrix3d::Zero();
        closed(0, 0) = 1.0;
        closed(1, 1) = closed(2, 2) = std::abs(signed_area(poly)) / (e.diameter * e.diameter);
        worst_g = std::max(worst_g, (e.G - closed).norm() / closed.norm());
        const double scale = e.K.cwiseAbs().maxCoeff();
        worst_k1 = std::max(worst_k1, (e.K * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() / scale);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e.K);
        const Eigen::VectorXd lam = es.eigenvalues();
        const double top = lam(n - 1);
        int zero = 0;
        for (int k = 0; k < n; ++k) {
            c.require(lam(k) > -1e-12 * top, "K_E not PSD");
            zero += std::abs(lam(k)) <= 1e-12 * top;
        }
        c.require(zero == 1, "K_E zero-mode count != 1");

        Eigen::FullPivLU<Eigen::MatrixXd> lu(e.K_consis);
        lu.setThreshold(1e-10);
        c.require(lu.rank() == 2, "rank(K_consis) != 2");
        ++count;
    }
    c.require(worst_g < 1e-12, "G != B D");
    c.require(worst_k1 < 1e-12, "K 1 != 0");
    c << count << " polygons, max |G - BD|/|G| = " << worst_g << ", max |K1|/|K| = " << worst_k1;
}

void triangle_equivalence(Criterion& c)
{
    Xorshift64Star rng(2002);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto t = random_triangle(rng);
        worst = std::max(worst, rel_diff(vem_matrices(t, 1.0, 1.0).K, p1_oracle(t)));
    }
    Eigen::Matrix3d right;
    right << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    right *= 0.5;
    const std::vector<Point2> unit{{0, 0}, {1, 0}, {0, 1}};
    const double right_err = (vem_matrices(unit, 1.0, 1.0).K - right).cwiseAbs().maxCoeff();
    c.require(worst < 1e-12, "random triangles differ from P1");
    c.require(right_err < 1e-14, "right triangle differs");
    c << "max rel diff = " << worst << ", right triangle max diff = " << right_err;
}

void patch_test(Criterion& c)
{
    ProblemSpec p;
    p.name = "affine";
    p.source = [](Point2) { return 0.0; };
    p.exact = [](Point2 x, int) { return 1.0 + 2.0 * x.x - 3.0 * x.y; };
    p.exact_gradient = [](Point2, int) { return Point2{2.0, -3.0}; };
    p.is_dirichlet = [](Point2, int) { return true; };
    p.dirichlet = [](Point2 x) { return 1.0 + 2.0 * x.x - 3.0 * x.y; };

    const auto circle = LevelSetField::circle({0.5, 0.5}, 0.313);
    const PolyMesh structured = generate_structured_tri(16, 16);
    const PolyMesh perturbed = perturb_vertices(structured, circle, 1.0 / 15, 11);
    std::vector<std::pair<std::string, PolyMesh>> classes{
        {"structured", structured},
        {"perturbed", perturbed},
        {"cut", cut_mesh(perturbed, sample_levelset(perturbed, circle))},
        {"clipped", clipped_square_mesh(10, 11)}};
    const std::size_t base = classes.size();
    for (std::size_t i = 0; i < base; ++i) {
        PolyMesh agg = classes[i].second;
        agglomerate(agg, {}, MaterialSpec{});
        classes.emplace_back(classes[i].first + "+agg", agg);
    }
    double worst = 0.0;
    for (const auto& [name, mesh] : classes) {
        const DiscreteSolution s = solve_problem(mesh, p, Method::Vem);
        double e = 0.0;
        for (VertexId v = 0; v < static_cast<VertexId>(mesh.num_vertices()); ++v)
            e = std::max(e, std::abs(s.u[v] - p.exact(mesh.vertex(v), 0)));
        c.require(e < 1e-10, name + " nodal error " + std::to_string(e));
        worst = std::max(worst, e);
    }
    c << classes.size() << " mesh classes, max nodal error = " << worst;
}

void sliver_trend(Criterion& c)
{
    const MaterialSpec mat;
    std::vector<double> loge, logl, post_l, post_k;
    for (double eps : {1e-2, 1e-5, 1e-8}) {
        PolyMesh m = sliver_fan_fixture(eps);
        const SpectrumSummary before = stiffness_spectrum(m, mat, Method::Vem);
        agglomerate(m, {}, mat);
        const SpectrumSummary after = stiffness_spectrum(m, mat, Method::Vem);
        loge.push_back(std::log(eps));
        logl.push_back(std::log(before.lambda_max));
        post_l.push_back(after.lambda_max);
        post_k.push_back(after.condition);
    }
    const double slope = fit_slope(loge, logl);
    const double spread = *std::max_element(post_l.begin(), post_l.end()) / *std::min_element(post_l.begin(), post_l.end());
    const double worst_k = *std::max_element(post_k.begin(), post_k.end());
    c.require(std::abs(slope + 1.0) <= 0.1, "pre-agglomeration slope");
    c.require(spread < 2.0, "post-agglomeration lambda_max spread");
    c.require(worst_k < 100.0, "post-agglomeration condition");
    c << "slope = " << slope << ", lambda_max after in [" << *std::min_element(post_l.begin(), post_l.end()) << ", "
      << *std::max_element(post_l.begin(), post_l.end()) << "], max condition after = " << worst_k;
}

void needle_iterativity(Criterion& c)
{
    const MaterialSpec mat;
    double worst_one = 0.0, worst_two = 0.0;
    for (double eps : {1e-2, 1e-5, 1e-8}) {
        PolyMesh one = needle_fixture(eps);
        const AgglomerationReport r1 = agglomerate(one, {0.2, 1.2, 1}, mat);
        worst_one = std::max(worst_one, r1.profile_after.front().second);
        PolyMesh two = needle_fixture(eps);
        agglomerate(two, {0.2, 1.2, 2}, mat);
        worst_two = std::max(worst_two, stiffness_spectrum(two, mat, Method::Vem).condition);
    }
    c.require(worst_one < 0.2, "one sweep already reaches sigma_eps");
    c.require(worst_two < 100.0, "two sweeps leave a large condition number");
    c << "max min-sigma after 1 sweep = " << worst_one << ", max condition after 2 sweeps = " << worst_two;
}

void ensemble_improvement(Criterion& c)
{
    EnsembleSpec s; // 20 × 20 nodes, R = 0.313, N = 50, σ_ε = 0.2, β = 1.2, 5 sweeps
    const EnsembleResult r = run_ensemble(s);
    c.require(r.failures == 0, "failed realizations");
    c.require(r.agg.median <= 3.0 * r.kappa0, "median agg > 3 kappa0");
    c.require(r.agg.max < r.vem.min, "max agg >= min vem");
    c.require(r.agg.median < r.vem.median / 10.0, "median agg >= median vem / 10");
    c << "N = " << r.rows.size() << ", kappa0 = " << r.kappa0 << ", vem median/min = " << r.vem.median << "/" << r.vem.min
      << ", agg median/max = " << r.agg.median << "/" << r.agg.max
      << ", median ratio = " << r.vem.median / r.agg.median;
}

void refinement_scaling(Criterion& c)
{
    EnsembleSpec s;
    s.eigen.dense_limit = 800;
    const RefinementResult r = run_refinement(s, {10, 20, 40});
    c.require(std::abs(r.slope_vem + 2.0) <= 0.4, "vem slope");
    c.require(std::abs(r.slope_agg + 2.0) <= 0.4, "agg slope");
    c << "cells 10/20/40, N = " << s.realizations << ", slopes uncut " << r.slope_uncut << ", fem " << r.slope_fem
      << ", vem " << r.slope_vem << ", agg " << r.slope_agg;
}

ConvergenceResult converge(Sequence seq, const std::string& problem, double ratio, Method method, bool agg,
                           std::vector<int> levels, bool quad = false)
{
    ConvergenceSpec s;
    s.sequence = seq;
    s.problem = problem;
    s.ratio = ratio;
    s.method = method;
    s.agglomerate = agg;
    s.levels = std::move(levels);
    s.quad_background = quad;
    return run_convergence(s);
}

void convergence_rates(Criterion& c)
{
    auto optimal = [&](const std::string& label, const ConvergenceResult& r, double tol) {
        c.require(std::abs(r.l2_rate - 2.0) <= tol, label + " L2 rate");
        c.require(std::abs(r.h1_rate - 1.0) <= tol, label + " H1 rate");
        c << label << " " << r.l2_rate << "/" << r.h1_rate << "; ";
    };
    optimal("(a) uniform fem", converge(Sequence::Uniform, "sinsin", 1, Method::Fem, false, {8, 16, 32, 64}), 0.15);
    optimal("(a) uniform vem", converge(Sequence::Uniform, "sinsin", 1, Method::Vem, false, {8, 16, 32, 64}), 0.15);

    const ConvergenceResult fem = converge(Sequence::Anisotropic, "sinsin", 1, Method::Fem, false, {0, 1, 2, 3});
    const auto& lv = fem.levels;
    c.require(lv.back().h1 >= lv[lv.size() - 2].h1, "(b) anisotropic FEM H1 error decreased");
    c << "(b) anisotropic fem H1 " << lv[lv.size() - 2].h1 << " -> " << lv.back().h1 << "; ";

    const ConvergenceResult cut = converge(Sequence::Anisotropic, "sinsin", 1, Method::Vem, true, {0, 1, 2, 3});
    c.require(cut.l2_rate >= 0.4 && cut.h1_rate >= 0.4, "(c) anisotropic CutVEM rates");
    c << "(c) anisotropic cutvem " << cut.l2_rate << "/" << cut.h1_rate << "; ";

    optimal("(d) clipped dirichlet", converge(Sequence::Clipped, "clipped_dirichlet", 1, Method::Vem, true, {4, 8, 16, 32}), 0.2);
    optimal("(d) clipped mixed", converge(Sequence::Clipped, "clipped_mixed", 1, Method::Vem, true, {4, 8, 16, 32}), 0.2);
    optimal("(e) annulus tri", converge(Sequence::Annulus, "annulus", 1, Method::Vem, true, {16, 32, 64, 128}), 0.2);
    optimal("(e) annulus quad", converge(Sequence::Annulus, "annulus", 1, Method::Vem, true, {16, 32, 64, 128}, true), 0.2);
    optimal("(f) bimaterial 0.1", converge(Sequence::Bimaterial, "bimaterial", 0.1, Method::Vem, true, {16, 32, 64, 128}), 0.2);
    optimal("(f) bimaterial 10", converge(Sequence::Bimaterial, "bimaterial", 10, Method::Vem, true, {16, 32, 64, 128}), 0.2);
}

void conservation(Criterion& c)
{
    const MaterialSpec mat;
    std::vector<std::pair<std::string, PolyMesh>> fixtures{{"sliver_fan", sliver_fan_fixture(1e-5)},
                                                           {"needle", needle_fixture(1e-5)},
                                                           {"anisotropic144", anisotropic_fixture()},
                                                           {"clipped", clipped_square_mesh(8, 3)}};
    double worst_area = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto phi = LevelSetField::circle({0.5, 0.5}, 0.313);
        const PolyMesh back = perturb_vertices(generate_structured_tri(20, 20), phi, 1.0 / 19, seed);
        const PolyMesh cut = cut_mesh(back, sample_levelset(back, phi));
        worst_area = std::max(worst_area, std::abs(cut.total_area() - back.total_area()) / back.total_area());
        fixtures.emplace_back("cut seed " + std::to_string(seed), cut);
    }
    for (const auto& [name, mesh] : fixtures) {
        PolyMesh m = mesh;
        agglomerate(m, {}, mat);
        c.require(m.num_vertices() == mesh.num_vertices(), name + " vertex count changed");
        worst_area = std::max(worst_area, std::abs(m.total_area() - mesh.total_area()) / mesh.total_area());
    }
    c.require(worst_area < 1e-12, "area not conserved");

    // every seeded command twice
    const std::vector<std::pair<std::string, std::string>> commands{
        {"agglomerate", "levelset = circle 0.5 0.5 0.313\nnodes = 20\nseed = 4\n"},
        {"ensemble", "n = 4\nnodes = 12\nseed = 9\n"},
        {"refinement", "n = 2\nlevels = 6 12\nseed = 2\n"},
        {"convergence", "sequence = clipped\nproblem = clipped_mixed\nlevels = 3 6\nseed = 5\n"},
        {"quality", "resolution = 9\n"}};
    int compared = 0;
    std::ostringstream log;
    for (const auto& [command, text] : commands) {
        std::vector<fs::path> dirs;
        for (int run = 0; run < 2; ++run) {
            const fs::path out = fs::temp_directory_path() / ("cutvem_accept_" + command + std::to_string(run));
            fs::remove_all(out);
            std::istringstream in(text + "svg = off\n");
            ExperimentConfig config = parse_config(in);
            config.command = command;
            config.set("out", out.string());
            c.require(run_command(config, log) == 0, command + " failed: " + log.str());
            dirs.push_back(out);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            if (entry.path().extension() != ".csv")
                continue;
            c.require(slurp(entry.path()) == slurp(dirs[1] / entry.path().filename()),
                      command + "/" + entry.path().filename().string() + " differs on rerun");
            ++compared;
        }
    }
    c << fixtures.size() << " fixtures, max area drift = " << worst_area << ", " << compared
      << " CSVs identical on rerun";
}

void oracles(Criterion& c)
{
    // error norms against a 512 × 512 composite midpoint rule
    const ProblemSpec p = preset_problem("sinsin");
    const PolyMesh m = generate_structured_tri(5, 5);
    Eigen::VectorXd u(static_cast<Eigen::Index>(m.num_vertices()));
    for (VertexId v = 0; v < static_cast<VertexId>(m.num_vertices()); ++v)
        u[v] = p.exact(m.vertex(v), 0) + 0.01 * m.vertex(v).x;
    const ErrorNorms e = error_norms(m, u, p);
    const auto grads = gradient_field(m, u, Method::Fem);
    const int n = 512;
    double e0 = 0.0, u0 = 0.0, e1 = 0.0, u1 = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Point2 x{(i + 0.5) / n, (j + 0.5) / n};
            for (FaceId f : m.face_ids()) {
                const auto cyc = m.face_cycle(f);
                const Point2 a = m.vertex(cyc[0]), b = m.vertex(cyc[1]), d = m.vertex(cyc[2]);
                if (!point_in_triangle(x, a, b, d, 0.0))
                    continue;
                const double area = orient2d(a, b, d);
                const double la = orient2d(x, b, d) / area, lb = orient2d(a, x, d) / area;
                const double uh = la * u[cyc[0]] + lb * u[cyc[1]] + (1 - la - lb) * u[cyc[2]];
                const double ue = p.exact(x, 0);
                const Point2 ge = p.exact_gradient(x, 0);
                const Point2 gh = grads[static_cast<std::size_t>(f)];
                e0 += (uh - ue) * (uh - ue);
                u0 += ue * ue;
                e1 += dot(gh - ge, gh - ge);
                u1 += dot(ge, ge);
                break;
            }
        }
    const double dl2 = std::abs(e.l2_rel / std::sqrt(e0 / u0) - 1.0);
    const double dh1 = std::abs(e.h1_rel / std::sqrt(e1 / u1) - 1.0);
    c.require(dl2 < 1e-4 && dh1 < 1e-4, "error_norms differs from midpoint quadrature");

    Xorshift64Star rng(3003);
    double worst_cg = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int size = 20 + trial;
        const Eigen::MatrixXd M = random_matrix(rng, size, size);
        const Eigen::MatrixXd A = M.transpose() * M + 0.1 * Eigen::MatrixXd::Identity(size, size);
        const Eigen::VectorXd b = random_matrix(rng, size, 1);
        const Eigen::VectorXd oracle = A.llt().solve(b);
        const SolveResult r = solve_spd(dense_to_sparse(A), b);
        worst_cg = std::max(worst_cg, (r.x - oracle).norm() / oracle.norm());
    }
    c.require(worst_cg < 1e-8, "CG differs from Cholesky");

    double worst_eig = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int size = 40 + 10 * trial;
        const Eigen::MatrixXd M = random_matrix(rng, size, size);
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(size) / std::sqrt(static_cast<double>(size));
        const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(size, size) - one * one.transpose();
        Eigen::MatrixXd A = P * (M.transpose() * M) * P;
        A = (0.5 * (A + A.transpose())).eval();
        const SparseSymMatrix S = dense_to_sparse(A);
        EigenOptions iterative;
        iterative.dense_limit = 10;
        const double dense = extreme_nonzero_eigs(S, Eigen::VectorXd::Ones(size)).condition;
        const double iter = extreme_nonzero_eigs(S, Eigen::VectorXd::Ones(size), iterative).condition;
        worst_eig = std::max(worst_eig, std::abs(iter - dense) / dense);
    }
    c.require(worst_eig < 1e-6, "iterative condition differs from dense");
    c << "norm deviation " << std::max(dl2, dh1) << ", CG max rel " << worst_cg << ", eig max rel " << worst_eig;
}

} // namespace

int main()
{
    const std::vector<std::pair<int, std::function<void(Criterion&)>>> criteria{
        {1, kernel_exactness},    {2, triangle_equivalence}, {3, patch_test},         {4, sliver_trend},
        {5, needle_iterativity},  {6, ensemble_improvement}, {7, refinement_scaling}, {8, convergence_rates},
        {9, conservation},        {10, oracles}};
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        Criterion c;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            run(c);
        } catch (const std::exception& e) {
            c.require(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (c.ok() ? "PASS" : "FAIL") << " criterion " << id << ": " << c.detail() << " [" << secs << " s]";
        for (const auto& f : c.failed())
            std::cout << "\n    failed: " << f;
        std::cout << std::endl;
        failed += !c.ok();
    }
    std::cout << (failed ? "FAILED " : "ALL PASSED ") << 10 - failed << "/10" << std::endl;
    return failed ? 1 : 0;
}
