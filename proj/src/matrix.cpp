#include "softtarget/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include "softtarget/errors.hpp"

namespace softtarget {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) +
                         " does not equal " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix out(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("Matrix::from_rows: ragged rows");
        std::copy(row.begin(), row.end(), out.row_ptr(i));
        ++i;
    }
    return out;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

bool Matrix::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

bool bitwise_equal(const Matrix& a, const Matrix& b) noexcept {
    if (!a.same_shape(b)) return false;
    if (a.size() == 0) return true;
    return std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("max_abs_diff: shapes differ: " + a.shape_str() + " vs " + b.shape_str());
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    }
    return m;
}

namespace {

// C[r0:r1) += A[r0:r1) * B, i-k-j order so the inner loop streams both B and C.
void matmul_rows(Matrix& c, const Matrix& a, const Matrix& b, std::size_t r0, std::size_t r1) {
    const std::size_t inner = a.cols();
    const std::size_t n = b.cols();
    for (std::size_t i = r0; i < r1; ++i) {
        const double* arow = a.row_ptr(i);
        double* crow = c.row_ptr(i);
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row_ptr(k);
            for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

// Splitting over output rows keeps every element's accumulation order fixed, so
// results are bit-identical to the single-threaded path.
constexpr std::size_t kParallelFlops = 4u << 20;

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ: lhs is " + a.shape_str() +
                         ", rhs is " + b.shape_str());
    }
    Matrix c(a.rows(), b.cols());
    const std::size_t work = a.rows() * a.cols() * b.cols();
    static const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t threads = std::min<std::size_t>(hw, a.rows());
    if (work < kParallelFlops || threads < 2) {
        matmul_rows(c, a, b, 0, a.rows());
        return c;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (a.rows() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t r0 = t * chunk;
        const std::size_t r1 = std::min(a.rows(), r0 + chunk);
        if (r0 >= r1) break;
        pool.emplace_back([&, r0, r1] { matmul_rows(c, a, b, r0, r1); });
    }
    for (auto& th : pool) th.join();
    return c;
}

Matrix row_softmax(const Matrix& z) {
    Matrix out(z.rows(), z.cols());
    for (std::size_t r = 0; r < z.rows(); ++r) {
        const double* in = z.row_ptr(r);
        double* o = out.row_ptr(r);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < z.cols(); ++c) mx = std::max(mx, in[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < z.cols(); ++c) {
            o[c] = std::exp(in[c] - mx);
            sum += o[c];
        }
        for (std::size_t c = 0; c < z.cols(); ++c) o[c] /= sum;
    }
    return out;
}

std::pair<Matrix, Matrix> shuffle_rows(const Matrix& m, const Matrix& paired, Rng& rng) {
    if (m.rows() != paired.rows()) {
        throw ShapeError("shuffle_rows: row counts differ: " + m.shape_str() + " vs " +
                         paired.shape_str());
    }
    const auto perm = random_permutation(m.rows(), rng);
    return {gather_rows(m, perm), gather_rows(paired, perm)};
}

Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& indices) {
    Matrix out(indices.size(), m.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= m.rows()) {
            throw ShapeError("gather_rows: index " + std::to_string(indices[i]) +
                             " out of range for " + m.shape_str());
        }
        std::memcpy(out.row_ptr(i), m.row_ptr(indices[i]), m.cols() * sizeof(double));
    }
    return out;
}

}  // namespace softtarget
