#include "l2v/kernels.hpp"

#include <stdexcept>

namespace l2v {

namespace {

void check_spmm(const NormalizedGraph& a, const Matrix& x, Matrix& y) {
    if (x.rows != a.n) throw std::invalid_argument("spmm: row count mismatch");
    if (y.rows != a.n || y.cols != x.cols) y = Matrix(a.n, x.cols);
}

inline void spmm_one_row(const NormalizedGraph& a, const Matrix& x, Matrix& y,
                         std::size_t i) {
    double* out = y.row(i);
    for (std::size_t j = 0; j < y.cols; ++j) out[j] = 0.0;
    for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
        const double w = a.weight[k];
        const double* src = x.row(a.col[k]);
        for (std::size_t j = 0; j < y.cols; ++j) out[j] += w * src[j];
    }
}

}  // namespace

void spmm_serial(const NormalizedGraph& a, const Matrix& x, Matrix& y) {
    check_spmm(a, x, y);
    for (std::size_t i = 0; i < a.n; ++i) spmm_one_row(a, x, y, i);
}

void spmm_parallel(const NormalizedGraph& a, const Matrix& x, Matrix& y) {
    check_spmm(a, x, y);
    #pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(a.n); ++i)
        spmm_one_row(a, x, y, static_cast<std::size_t>(i));
}

namespace {

void check_matmul(const Matrix& x, const Matrix& w, Matrix& y) {
    if (x.cols != w.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    if (y.rows != x.rows || y.cols != w.cols) y = Matrix(x.rows, w.cols);
}

inline void matmul_one_row(const Matrix& x, const Matrix& w, Matrix& y, std::size_t i) {
    double* out = y.row(i);
    const double* xi = x.row(i);
    for (std::size_t j = 0; j < w.cols; ++j) out[j] = 0.0;
    for (std::size_t k = 0; k < x.cols; ++k) {
        const double v = xi[k];
        const double* wk = w.row(k);
        for (std::size_t j = 0; j < w.cols; ++j) out[j] += v * wk[j];
    }
}

}  // namespace

void matmul_serial(const Matrix& x, const Matrix& w, Matrix& y) {
    check_matmul(x, w, y);
    for (std::size_t i = 0; i < x.rows; ++i) matmul_one_row(x, w, y, i);
}

void matmul_parallel(const Matrix& x, const Matrix& w, Matrix& y) {
    check_matmul(x, w, y);
    #pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(x.rows); ++i)
        matmul_one_row(x, w, y, static_cast<std::size_t>(i));
}

void spmv_row(const NormalizedGraph& a, const Matrix& x, std::size_t row,
              std::span<double> out) {
    if (row >= a.n) throw std::out_of_range("spmv_row: row out of range");
    if (x.rows != a.n || out.size() != x.cols)
        throw std::invalid_argument("spmv_row: dimension mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = 0.0;
    for (std::size_t k = a.row_ptr[row]; k < a.row_ptr[row + 1]; ++k) {
        const double w = a.weight[k];
        const double* src = x.row(a.col[k]);
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += w * src[j];
    }
}

}  // namespace l2v
