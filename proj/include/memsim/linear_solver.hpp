#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace memsim {

/// Row-major dense square matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    explicit DenseMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    [[nodiscard]] std::size_t size() const { return n_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
    [[nodiscard]] double max_abs() const;

    /// y = A x
    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(std::size_t column, double pivot)
        : std::runtime_error("singular matrix at column " + std::to_string(column)),
          column_(column), pivot_(pivot) {}
    [[nodiscard]] std::size_t column() const { return column_; }
    [[nodiscard]] double pivot() const { return pivot_; }

private:
    std::size_t column_;
    double pivot_;
};

/// Relative pivot threshold below which a matrix is treated as singular.
inline constexpr double singular_pivot_ratio = 1e-13;

/// In-place LU factorization with partial pivoting (PA = LU).
class LuFactorization {
public:
    /// Throws SingularMatrixError when a pivot falls below
    /// singular_pivot_ratio * max|A|.
    explicit LuFactorization(DenseMatrix a);

    [[nodiscard]] std::vector<double> solve(std::span<const double> b) const;

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
};

/// Solves A x = b.
[[nodiscard]] std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b);

}  // namespace memsim
