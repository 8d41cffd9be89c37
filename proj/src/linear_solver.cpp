#include "memsim/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace memsim {

double DenseMatrix::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t r = 0; r < n_; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < n_; ++c) acc += (*this)(r, c) * x[c];
        y[r] = acc;
    }
    return y;
}

LuFactorization::LuFactorization(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.size()) {
    const std::size_t n = lu_.size();
    for (std::size_t k = 0; k < n; ++k) perm_[k] = k;
    const double threshold = singular_pivot_ratio * lu_.max_abs();

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot_row = k;
        double pivot_mag = std::abs(lu_(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double mag = std::abs(lu_(r, k));
            if (mag > pivot_mag) {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if (!(pivot_mag > threshold)) throw SingularMatrixError(k, pivot_mag);
        if (pivot_row != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(pivot_row, c));
            std::swap(perm_[k], perm_[pivot_row]);
        }
        const double inv_pivot = 1.0 / lu_(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const double factor = lu_(r, k) * inv_pivot;
            lu_(r, k) = factor;
            if (factor == 0.0) continue;
            for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= factor * lu_(k, c);
        }
    }
}

std::vector<double> LuFactorization::solve(std::span<const double> b) const {
    const std::size_t n = lu_.size();
    std::vector<double> x(n);
    for (std::size_t r = 0; r < n; ++r) {
        double acc = b[perm_[r]];
        for (std::size_t c = 0; c < r; ++c) acc -= lu_(r, c) * x[c];
        x[r] = acc;
    }
    for (std::size_t r = n; r-- > 0;) {
        double acc = x[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= lu_(r, c) * x[c];
        x[r] = acc / lu_(r, r);
    }
    return x;
}

std::vector<double> lu_solve(const DenseMatrix& a, std::span<const double> b) {
    return LuFactorization(a).solve(b);
}

}  // namespace memsim
