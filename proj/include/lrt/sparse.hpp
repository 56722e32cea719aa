#ifndef LRT_SPARSE_HPP
#define LRT_SPARSE_HPP

#include <cstddef>
#include <vector>

#include "lrt/cmat.hpp"

namespace lrt {

// Sparse operator on the full Hilbert space, kept in CSR form (sorted rows,
// merged duplicates, exact zeros dropped). Construction goes through a
// triplet list; all arithmetic re-canonicalizes.
class SparseOperator {
public:
    struct Triplet {
        std::size_t row, col;
        complex val;
    };

    SparseOperator() = default;
    explicit SparseOperator(std::size_t dim);
    SparseOperator(std::size_t dim, std::vector<Triplet> triplets);

    static SparseOperator identity(std::size_t dim);
    static SparseOperator from_dense(const CMat& A, double drop_tol = 0.0);

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return vals_.size(); }

    // Y = this * X (X tall dense); Y is resized as needed.
    void apply(const CMat& X, CMat& Y) const;
    CMat apply(const CMat& X) const;

    SparseOperator adjoint() const;
    SparseOperator scaled(complex s) const;

    friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);
    friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b);
    friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b);

    // Kronecker product: index of (i_a, i_b) is i_a * b.dim() + i_b.
    friend SparseOperator kron(const SparseOperator& a, const SparseOperator& b);

    double hermiticity_defect() const;
    CMat to_dense() const;

    const std::vector<std::size_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::size_t>& col_idx() const { return col_idx_; }
    const std::vector<complex>& values() const { return vals_; }

private:
    void build_csr(std::vector<Triplet> triplets);

    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> col_idx_;
    std::vector<complex> vals_;
};

}  // namespace lrt

#endif
