#include "cutvem/linalg.hpp"

#include "cutvem/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>

namespace cutvem {

SparseSymMatrix::SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<int> cols,
                                 std::vector<double> values)
    : n_(n), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values))
{
    if (row_ptr_.size() != n_ + 1 || cols_.size() != values_.size() || row_ptr_.back() != values_.size())
        throw IndexOutOfRange("inconsistent CSR arrays");
}

double SparseSymMatrix::at(std::size_t i, std::size_t j) const
{
    const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<int>(j));
    if (it == end || *it != static_cast<int>(j))
        return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

Eigen::VectorXd SparseSymMatrix::diagonal() const
{
    Eigen::VectorXd d(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        d[static_cast<Eigen::Index>(i)] = at(i, i);
    return d;
}

void SparseSymMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const
{
    y.resize(static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            s += values_[k] * x[cols_[k]];
        y[static_cast<Eigen::Index>(i)] = s;
    }
}

Eigen::VectorXd SparseSymMatrix::operator*(const Eigen::VectorXd& x) const
{
    Eigen::VectorXd y;
    multiply(x, y);
    return y;
}

Eigen::MatrixXd SparseSymMatrix::to_dense() const
{
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            A(static_cast<Eigen::Index>(i), cols_[k]) = values_[k];
    return A;
}

double SparseSymMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

SparseSymMatrix SparseSymMatrix::submatrix(const std::vector<int>& keep) const
{
    std::vector<int> new_index(n_, -1);
    for (std::size_t k = 0; k < keep.size(); ++k)
        new_index[static_cast<std::size_t>(keep[k])] = static_cast<int>(k);
    std::vector<std::size_t> rp{0};
    std::vector<int> cols;
    std::vector<double> vals;
    for (int i : keep) {
        for (std::size_t k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1];
             ++k) {
            const int j = new_index[static_cast<std::size_t>(cols_[k])];
            if (j < 0)
                continue;
            cols.push_back(j);
            vals.push_back(values_[k]);
        }
        rp.push_back(cols.size());
    }
    return SparseSymMatrix(keep.size(), std::move(rp), std::move(cols), std::move(vals));
}

void SparseSymMatrix::dump_coordinate(const std::string& path) const
{
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write " + path);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            out << i << ' ' << cols_[k] << ' ' << values_[k] << '\n';
}

void Assembler::add(const std::vector<int>& dofs, const Eigen::MatrixXd& Ke)
{
    const auto m = static_cast<Eigen::Index>(dofs.size());
    if (Ke.rows() != m || Ke.cols() != m)
        throw IndexOutOfRange("element matrix size differs from its dof map");
    for (int d : dofs)
        if (d < 0 || static_cast<std::size_t>(d) >= n_)
            throw IndexOutOfRange("dof " + std::to_string(d) + " out of range");
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = 0; b < m; ++b)
            triplets_.push_back({dofs[static_cast<std::size_t>(a)], dofs[static_cast<std::size_t>(b)], Ke(a, b)});
}

void Assembler::add(const std::vector<int>& dofs, const Eigen::MatrixXd& Ke, const Eigen::VectorXd& fe)
{
    add(dofs, Ke);
    if (fe.size() != static_cast<Eigen::Index>(dofs.size()))
        throw IndexOutOfRange("element load size differs from its dof map");
    for (std::size_t a = 0; a < dofs.size(); ++a)
        rhs_terms_.emplace_back(dofs[a], fe[static_cast<Eigen::Index>(a)]);
}

void Assembler::add_rhs(int dof, double value)
{
    if (dof < 0 || static_cast<std::size_t>(dof) >= n_)
        throw IndexOutOfRange("dof " + std::to_string(dof) + " out of range");
    rhs_terms_.emplace_back(dof, value);
}

SparseSymMatrix Assembler::matrix() const
{
    std::vector<Triplet> t = triplets_;
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        if (a.row != b.row)
            return a.row < b.row;
        if (a.col != b.col)
            return a.col < b.col;
        return a.value < b.value;
    });
    std::vector<std::size_t> rp(n_ + 1, 0);
    std::vector<int> cols;
    std::vector<double> vals;
    for (std::size_t k = 0; k < t.size();) {
        std::size_t e = k;
        double s = 0.0;
        while (e < t.size() && t[e].row == t[k].row && t[e].col == t[k].col)
            s += t[e++].value;
        cols.push_back(t[k].col);
        vals.push_back(s);
        ++rp[static_cast<std::size_t>(t[k].row) + 1];
        k = e;
    }
    for (std::size_t i = 0; i < n_; ++i)
        rp[i + 1] += rp[i];
    return SparseSymMatrix(n_, std::move(rp), std::move(cols), std::move(vals));
}

Eigen::VectorXd Assembler::rhs() const
{
    auto terms = rhs_terms_;
    std::sort(terms.begin(), terms.end());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
    for (auto [d, v] : terms)
        f[d] += v;
    return f;
}

namespace {

using Operator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct CgOutcome {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
};

/// Preconditioned CG on op with diagonal preconditioner `inv_diag`. When
/// `null` is nonempty, iterates stay orthogonal to it (singular systems
/// with b ⟂ null).
CgOutcome pcg(const Operator& op, const Eigen::VectorXd& inv_diag, const Eigen::VectorXd& b, double tol,
              int max_iter, const Eigen::VectorXd& null)
{
    const Eigen::Index n = b.size();
    auto project = [&](Eigen::VectorXd& v) {
        if (null.size() == n)
            v -= null.dot(v) * null;
    };
    CgOutcome out;
    out.x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = b;
    project(r);
    const double bnorm = r.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    project(z);
    Eigen::VectorXd p = z;
    Eigen::VectorXd Ap(n);
    double rz = r.dot(z);
    Eigen::VectorXd best = out.x;
    double best_res = 1.0;
    for (int it = 1; it <= max_iter; ++it) {
        op(p, Ap);
        project(Ap);
        const double pAp = p.dot(Ap);
        if (!(pAp > 0.0))
            break;
        const double alpha = rz / pAp;
        out.x += alpha * p;
        r -= alpha * Ap;
        out.iterations = it;
        const double res = r.norm() / bnorm;
        if (res < best_res) {
            best_res = res;
            best = out.x;
        }
        if (res <= tol) {
            // Confirm against the true residual to avoid drift.
            Eigen::VectorXd Ax(n);
            op(out.x, Ax);
            Eigen::VectorXd true_r = b - Ax;
            project(true_r);
            const double true_res = true_r.norm() / bnorm;
            if (true_res <= tol) {
                out.converged = true;
                out.relative_residual = true_res;
                return out;
            }
            r = true_r;
        }
        z = inv_diag.cwiseProduct(r);
        project(z);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
    }
    out.x = best;
    out.relative_residual = best_res;
    return out;
}

Eigen::VectorXd inverse_diagonal(const SparseSymMatrix& A)
{
    Eigen::VectorXd d = A.diagonal();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        d[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
    return d;
}

/// Largest eigenvalue of a symmetric operator restricted to the complement
/// of `null`, by Lanczos with full reorthogonalization.
double lanczos_max(const Operator& op, Eigen::Index n, const Eigen::VectorXd& null, double rel_tol)
{
    auto project = [&](Eigen::VectorXd& v) {
        if (null.size() == n)
            v -= null.dot(v) * null;
    };
    const Eigen::Index max_steps = std::min<Eigen::Index>(n, 600);
    Eigen::MatrixXd Q(n, max_steps);
    std::vector<double> alpha, beta;
    Eigen::VectorXd q(n);
    // Deterministic start vector with components on every mode.
    for (Eigen::Index i = 0; i < n; ++i)
        q[i] = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
    project(q);
    q.normalize();
    Eigen::VectorXd w(n);
    double estimate = 0.0;
    for (Eigen::Index k = 0; k < max_steps; ++k) {
        Q.col(k) = q;
        op(q, w);
        project(w);
        const double a = q.dot(w);
        alpha.push_back(a);
        w -= a * q;
        if (k > 0)
            w -= beta.back() * Q.col(k - 1);
        for (int pass = 0; pass < 2; ++pass)
            w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
        project(w);
        const double b = w.norm();

        const auto m = static_cast<Eigen::Index>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            T(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m)
                T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        estimate = es.eigenvalues()[m - 1];
        const double residual = std::abs(b * es.eigenvectors()(m - 1, m - 1));
        if (residual <= rel_tol * std::abs(estimate) || b <= 1e-14 * std::abs(estimate) || k + 1 == n)
            return estimate;
        beta.push_back(b);
        q = w / b;
    }
    return estimate;
}

} // namespace

SolveResult solve_spd(const SparseSymMatrix& A, const Eigen::VectorXd& b, double tol)
{
    const auto n = static_cast<Eigen::Index>(A.size());
    if (b.size() != n)
        throw IndexOutOfRange("right-hand side size differs from matrix size");
    SolveResult result;
    if (n == 0) {
        result.converged = true;
        return result;
    }
    const Operator op = [&A](const Eigen::VectorXd& x, Eigen::VectorXd& y) { A.multiply(x, y); };
    const CgOutcome cg = pcg(op, inverse_diagonal(A), b, tol, 20 * static_cast<int>(n), Eigen::VectorXd());
    result.x = cg.x;
    result.iterations = cg.iterations;
    result.relative_residual = cg.relative_residual;
    result.converged = cg.converged;
    if (cg.converged || n > 3000)
        return result;

    Eigen::LLT<Eigen::MatrixXd> llt(A.to_dense());
    if (llt.info() != Eigen::Success)
        throw NotSPD("Cholesky factorization failed");
    result.x = llt.solve(b);
    result.used_cholesky = true;
    const double bnorm = b.norm();
    result.relative_residual = bnorm > 0.0 ? (A * result.x - b).norm() / bnorm : 0.0;
    result.converged = result.relative_residual <= tol;
    return result;
}

SpectrumSummary extreme_nonzero_eigs(const SparseSymMatrix& A, const std::optional<Eigen::VectorXd>& known_null,
                                     const EigenOptions& options)
{
    const auto n = static_cast<Eigen::Index>(A.size());
    SpectrumSummary s;
    if (n == 0)
        throw Error("empty matrix");
    if (A.size() <= options.dense_limit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.to_dense(), Eigen::EigenvaluesOnly);
        const Eigen::VectorXd ev = es.eigenvalues();
        s.lambda_max = ev[n - 1];
        if (!(s.lambda_max > 0.0))
            throw TooManyNullModes("matrix has no positive eigenvalue");
        const double thr = 1e-10 * s.lambda_max;
        s.lambda_min_nonzero = s.lambda_max;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(ev[i]) < thr || ev[i] < 0.0)
                ++s.null_dimension;
            else
                s.lambda_min_nonzero = std::min(s.lambda_min_nonzero, ev[i]);
        }
    } else {
        Eigen::VectorXd null;
        if (known_null) {
            null = *known_null;
            null.normalize();
            s.null_dimension = 1;
        }
        const Operator op = [&A](const Eigen::VectorXd& x, Eigen::VectorXd& y) { A.multiply(x, y); };
        s.lambda_max = lanczos_max(op, n, null, options.rel_tol);
        const Eigen::VectorXd inv_diag = inverse_diagonal(A);
        bool solve_failed = false;
        const Operator inv = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
            CgOutcome cg = pcg(op, inv_diag, x, 1e-13, 20 * static_cast<int>(n), null);
            solve_failed = solve_failed || cg.relative_residual > 1e-8;
            y = cg.x;
        };
        const double inv_max = lanczos_max(inv, n, null, options.rel_tol);
        s.lambda_min_nonzero = 1.0 / inv_max;
        if (solve_failed || s.lambda_min_nonzero < 1e-10 * s.lambda_max)
            throw TooManyNullModes("operator is singular beyond the known null vector");
    }
    if (s.null_dimension > options.max_null)
        throw TooManyNullModes(std::to_string(s.null_dimension) + " null modes; is the mesh disconnected?");
    s.condition = s.lambda_max / s.lambda_min_nonzero;
    return s;
}

} // namespace cutvem
