#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "softtarget/rng.hpp"

namespace softtarget {

/// Dense row-major matrix of 64-bit reals. Rows are samples everywhere in this
/// library. Matrices are plain values: copy freely, share const references
/// across threads.
class Matrix {
public:
    Matrix() = default;

    /// rows x cols, zero-filled.
    Matrix(std::size_t rows, std::size_t cols);

    /// Takes ownership of `data`; data.size() must equal rows * cols.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Literal construction for tests and fixtures; all rows must have equal length.
    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    /// n x n identity.
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) noexcept { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const noexcept { return data_.data() + r * cols_; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    Matrix transposed() const;

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const noexcept;

    /// "RxC" for error messages.
    std::string shape_str() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// True when shapes match and every entry is bit-identical (distinguishes -0.0
/// from 0.0 and never treats NaN as equal to itself being irrelevant here:
/// comparison is on the raw 64-bit patterns).
bool bitwise_equal(const Matrix& a, const Matrix& b) noexcept;

/// Max |a - b| over all entries; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Standard matrix product. Throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// Row-wise numerically stable softmax: exp(z - rowmax) / sum(exp(z - rowmax)).
Matrix row_softmax(const Matrix& z);

/// Applies one random permutation to the rows of both matrices, keeping row i of
/// `m` paired with row i of `paired`. Throws ShapeError on row-count mismatch.
std::pair<Matrix, Matrix> shuffle_rows(const Matrix& m, const Matrix& paired, Rng& rng);

/// New matrix holding the listed rows of `m`, in the listed order.
Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& indices);

}  // namespace softtarget
