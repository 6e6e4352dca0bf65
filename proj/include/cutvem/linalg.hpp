#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace cutvem {

/// Symmetric matrix in CSR form with both triangles stored.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<int> cols,
                    std::vector<double> values);

    std::size_t size() const { return n_; }
    std::size_t nonzeros() const { return values_.size(); }
    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }

    /// Entry (i, j), zero when not stored.
    double at(std::size_t i, std::size_t j) const;
    Eigen::VectorXd diagonal() const;
    void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    Eigen::VectorXd operator*(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd to_dense() const;
    double max_abs() const;

    /// Principal submatrix on the given sorted index set.
    SparseSymMatrix submatrix(const std::vector<int>& keep) const;

    /// Rows "i j value" with 0-based indices.
    void dump_coordinate(const std::string& path) const;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// Accumulates element contributions. Duplicates are summed in a fixed
/// order (sorted by value within each (row, col) slot) so the result does
/// not depend on the order in which elements were added.
class Assembler {
public:
    explicit Assembler(std::size_t n) : n_(n), rhs_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

    void add(const std::vector<int>& dofs, const Eigen::MatrixXd& Ke);
    void add(const std::vector<int>& dofs, const Eigen::MatrixXd& Ke, const Eigen::VectorXd& fe);
    void add_rhs(int dof, double value);

    SparseSymMatrix matrix() const;
    /// Load vector summed in a fixed order like the matrix.
    Eigen::VectorXd rhs() const;

private:
    struct Triplet {
        int row;
        int col;
        double value;
    };
    std::size_t n_;
    std::vector<Triplet> triplets_;
    std::vector<std::pair<int, double>> rhs_terms_;
    Eigen::VectorXd rhs_;
};

struct SolveResult {
    Eigen::VectorXd x;
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
    bool used_cholesky = false;
};

/// Jacobi-preconditioned CG (at most 20n iterations) with a dense Cholesky
/// fallback for n ≤ 3000. Returns the best iterate and converged = false
/// when neither path meets the tolerance; throws NotSPD when the fallback
/// factorization fails.
SolveResult solve_spd(const SparseSymMatrix& A, const Eigen::VectorXd& b, double tol = 1e-10);

struct SpectrumSummary {
    double lambda_min_nonzero = 0.0;
    double lambda_max = 0.0;
    double condition = 0.0;
    int null_dimension = 0;
};

struct EigenOptions {
    /// Dense eigensolve up to this size, iterative beyond it.
    std::size_t dense_limit = 3000;
    double rel_tol = 1e-8;
    /// Largest null dimension accepted before TooManyNullModes.
    int max_null = 1;
};

/// Extreme eigenvalues of the positive part of a symmetric PSD matrix.
SpectrumSummary extreme_nonzero_eigs(const SparseSymMatrix& A, const std::optional<Eigen::VectorXd>& known_null,
                                     const EigenOptions& options = {});

} // namespace cutvem
