#ifndef LRT_KERNELS_HPP
#define LRT_KERNELS_HPP

#include <cstddef>

#include "lrt/cmat.hpp"

namespace lrt::kern {

// Dense product kernels for tall-times-small shapes (N_H x M times M x M)
// and Gram-type contractions (A^dag B with both factors tall). Parallel
// versions use OpenMP; reductions are blocked over a fixed row grid and the
// per-block partials are summed in block order, so results are bitwise
// independent of the thread count.

// Y = A * X
void matmul(const CMat& A, const CMat& X, CMat& Y);
// Y += alpha * (A * X)
void matmul_add(const CMat& A, const CMat& X, CMat& Y, complex alpha);
// Y = A^dag * X  (A: n x m, X: n x k, Y: m x k)
void matmul_adjoint_left(const CMat& A, const CMat& X, CMat& Y);

// Y = S * X for S in CSR form (row_ptr has n_rows+1 entries).
void sparse_apply(std::size_t n_rows, const std::size_t* row_ptr, const std::size_t* col_idx,
                  const complex* vals, const CMat& X, CMat& Y);

// Plain serial implementations, kept as the reference the parallel kernels
// are tested and benchmarked against.
namespace ref {
void matmul(const CMat& A, const CMat& X, CMat& Y);
void matmul_add(const CMat& A, const CMat& X, CMat& Y, complex alpha);
void matmul_adjoint_left(const CMat& A, const CMat& X, CMat& Y);
void sparse_apply(std::size_t n_rows, const std::size_t* row_ptr, const std::size_t* col_idx,
                  const complex* vals, const CMat& X, CMat& Y);
}  // namespace ref

}  // namespace lrt::kern

#endif
