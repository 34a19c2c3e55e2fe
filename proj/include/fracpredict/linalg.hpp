#ifndef FRACPREDICT_LINALG_HPP
#define FRACPREDICT_LINALG_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "fracpredict/errors.hpp"

namespace fracpredict {

using Vector = std::vector<double>;

/// Dense row-major matrix.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);

/// Max-abs entry.
double max_abs(const Matrix& a);

/// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Lower-triangular L with L L^T = a. Throws NotPositiveDefiniteError with the
/// failing pivot index; the pivot tolerance scales with n * ulp * max|a|.
Matrix cholesky_factor(const Matrix& a);

/// Solve (L L^T) x = b given the lower factor L.
Vector cholesky_solve(const Matrix& chol_lower, std::span<const double> b);

/// Forward substitution only: solve L y = b.
Vector forward_substitute(const Matrix& chol_lower, std::span<const double> b);

}  // namespace fracpredict

#endif
