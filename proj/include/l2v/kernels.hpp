#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "l2v/graph.hpp"

namespace l2v {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }
    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<double> row_span(std::size_t i) { return {row(i), cols}; }
    std::span<const double> row_span(std::size_t i) const { return {row(i), cols}; }

    bool operator==(const Matrix&) const = default;
};

// Y = A_hat * X. Parallel variant splits over output rows; per-row
// accumulation order is identical to the serial one, so results are
// bit-identical.
void spmm_serial(const NormalizedGraph& a, const Matrix& x, Matrix& y);
void spmm_parallel(const NormalizedGraph& a, const Matrix& x, Matrix& y);

// Y = X * W (X: n x d, W: d x d).
void matmul_serial(const Matrix& x, const Matrix& w, Matrix& y);
void matmul_parallel(const Matrix& x, const Matrix& w, Matrix& y);

// out[j] = sum_k A_hat[row,k] * x[k][j]; the per-row gather behind lazy
// forward passes. x may be any matrix with a.n rows.
void spmv_row(const NormalizedGraph& a, const Matrix& x, std::size_t row,
              std::span<double> out);

}  // namespace l2v
