#include "lrt/kernels.hpp"

#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lrt::kern {

namespace {

// Row-block width used for the deterministic A^dag B reduction. Partial sums
// are formed per block and combined serially in block order afterwards.
constexpr std::size_t kReduceBlockRows = 1024;

// Below this work estimate the OpenMP setup overhead dominates; fall through
// to the serial reference implementation.
constexpr std::size_t kSerialWorkCutoff = 1 << 15;

void check_matmul_shapes(const CMat& A, const CMat& X, const CMat& Y) {
    if (A.cols() != X.rows() || Y.rows() != A.rows() || Y.cols() != X.cols())
        throw std::invalid_argument("kern::matmul: shape mismatch");
}

void check_adjoint_shapes(const CMat& A, const CMat& X, const CMat& Y) {
    if (A.rows() != X.rows() || Y.rows() != A.cols() || Y.cols() != X.cols())
        throw std::invalid_argument("kern::matmul_adjoint_left: shape mismatch");
}

}  // namespace

namespace ref {

void matmul(const CMat& A, const CMat& X, CMat& Y) {
    check_matmul_shapes(A, X, Y);
    const std::size_t m = A.rows(), k = A.cols(), n = X.cols();
    for (std::size_t i = 0; i < m; ++i) {
        complex* y = Y.row(i);
        for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
        const complex* a = A.row(i);
        for (std::size_t l = 0; l < k; ++l) {
            const complex al = a[l];
            const complex* x = X.row(l);
            for (std::size_t j = 0; j < n; ++j) y[j] += al * x[j];
        }
    }
}

void matmul_add(const CMat& A, const CMat& X, CMat& Y, complex alpha) {
    check_matmul_shapes(A, X, Y);
    const std::size_t m = A.rows(), k = A.cols(), n = X.cols();
    std::vector<complex> tmp(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) tmp[j] = 0.0;
        const complex* a = A.row(i);
        for (std::size_t l = 0; l < k; ++l) {
            const complex al = a[l];
            const complex* x = X.row(l);
            for (std::size_t j = 0; j < n; ++j) tmp[j] += al * x[j];
        }
        complex* y = Y.row(i);
        for (std::size_t j = 0; j < n; ++j) y[j] += alpha * tmp[j];
    }
}

void matmul_adjoint_left(const CMat& A, const CMat& X, CMat& Y) {
    check_adjoint_shapes(A, X, Y);
    const std::size_t n = A.rows(), m = A.cols(), k = X.cols();
    Y.set_zero();
    for (std::size_t r = 0; r < n; ++r) {
        const complex* a = A.row(r);
        const complex* x = X.row(r);
        for (std::size_t i = 0; i < m; ++i) {
            const complex ac = std::conj(a[i]);
            complex* y = Y.row(i);
            for (std::size_t j = 0; j < k; ++j) y[j] += ac * x[j];
        }
    }
}

void sparse_apply(std::size_t n_rows, const std::size_t* row_ptr, const std::size_t* col_idx,
                  const complex* vals, const CMat& X, CMat& Y) {
    const std::size_t n = X.cols();
    if (Y.rows() != n_rows || Y.cols() != n)
        throw std::invalid_argument("kern::sparse_apply: shape mismatch");
    for (std::size_t i = 0; i < n_rows; ++i) {
        complex* y = Y.row(i);
        for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            const complex v = vals[p];
            const complex* x = X.row(col_idx[p]);
            for (std::size_t j = 0; j < n; ++j) y[j] += v * x[j];
        }
    }
}

}  // namespace ref

void matmul(const CMat& A, const CMat& X, CMat& Y) {
    check_matmul_shapes(A, X, Y);
    const std::size_t m = A.rows(), k = A.cols(), n = X.cols();
    if (m * k * n < kSerialWorkCutoff) {
        ref::matmul(A, X, Y);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        complex* y = Y.row(i);
        for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
        const complex* a = A.row(i);
        for (std::size_t l = 0; l < k; ++l) {
            const complex al = a[l];
            const complex* x = X.row(l);
            for (std::size_t j = 0; j < n; ++j) y[j] += al * x[j];
        }
    }
}

void matmul_add(const CMat& A, const CMat& X, CMat& Y, complex alpha) {
    check_matmul_shapes(A, X, Y);
    const std::size_t m = A.rows(), k = A.cols(), n = X.cols();
    if (m * k * n < kSerialWorkCutoff) {
        ref::matmul_add(A, X, Y, alpha);
        return;
    }
#pragma omp parallel
    {
        std::vector<complex> tmp(n);
#pragma omp for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(m); ++ii) {
            const std::size_t i = static_cast<std::size_t>(ii);
            for (std::size_t j = 0; j < n; ++j) tmp[j] = 0.0;
            const complex* a = A.row(i);
            for (std::size_t l = 0; l < k; ++l) {
                const complex al = a[l];
                const complex* x = X.row(l);
                for (std::size_t j = 0; j < n; ++j) tmp[j] += al * x[j];
            }
            complex* y = Y.row(i);
            for (std::size_t j = 0; j < n; ++j) y[j] += alpha * tmp[j];
        }
    }
}

void matmul_adjoint_left(const CMat& A, const CMat& X, CMat& Y) {
    check_adjoint_shapes(A, X, Y);
    const std::size_t n = A.rows(), m = A.cols(), k = X.cols();
    if (n * m * k < kSerialWorkCutoff) {
        ref::matmul_adjoint_left(A, X, Y);
        return;
    }
    const std::size_t n_blocks = (n + kReduceBlockRows - 1) / kReduceBlockRows;
    std::vector<CMat> partial(n_blocks);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t bb = 0; bb < static_cast<std::ptrdiff_t>(n_blocks); ++bb) {
        const std::size_t b = static_cast<std::size_t>(bb);
        CMat& P = partial[b];
        P.resize(m, k);
        const std::size_t r0 = b * kReduceBlockRows;
        const std::size_t r1 = std::min(n, r0 + kReduceBlockRows);
        for (std::size_t r = r0; r < r1; ++r) {
            const complex* a = A.row(r);
            const complex* x = X.row(r);
            for (std::size_t i = 0; i < m; ++i) {
                const complex ac = std::conj(a[i]);
                complex* p = P.row(i);
                for (std::size_t j = 0; j < k; ++j) p[j] += ac * x[j];
            }
        }
    }
    // fixed-order combine keeps the result independent of the thread count
    Y.set_zero();
    for (std::size_t b = 0; b < n_blocks; ++b) Y += partial[b];
}

void sparse_apply(std::size_t n_rows, const std::size_t* row_ptr, const std::size_t* col_idx,
                  const complex* vals, const CMat& X, CMat& Y) {
    const std::size_t n = X.cols();
    if (Y.rows() != n_rows || Y.cols() != n)
        throw std::invalid_argument("kern::sparse_apply: shape mismatch");
    const std::size_t nnz = row_ptr[n_rows];
    if (nnz * n < kSerialWorkCutoff) {
        ref::sparse_apply(n_rows, row_ptr, col_idx, vals, X, Y);
        return;
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n_rows); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        complex* y = Y.row(i);
        for (std::size_t j = 0; j < n; ++j) y[j] = 0.0;
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            const complex v = vals[p];
            const complex* x = X.row(col_idx[p]);
            for (std::size_t j = 0; j < n; ++j) y[j] += v * x[j];
        }
    }
}

}  // namespace lrt::kern
