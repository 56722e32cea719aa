#include "lrt/sparse.hpp"

#include <algorithm>
#include <stdexcept>

#include "lrt/kernels.hpp"

namespace lrt {

SparseOperator::SparseOperator(std::size_t dim) : dim_(dim) { row_ptr_.assign(dim + 1, 0); }

SparseOperator::SparseOperator(std::size_t dim, std::vector<Triplet> triplets) : dim_(dim) {
    build_csr(std::move(triplets));
}

void SparseOperator::build_csr(std::vector<Triplet> t) {
    for (const Triplet& e : t)
        if (e.row >= dim_ || e.col >= dim_)
            throw std::out_of_range("SparseOperator: triplet index out of range");
    std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(dim_ + 1, 0);
    col_idx_.clear();
    vals_.clear();
    std::size_t i = 0;
    while (i < t.size()) {
        std::size_t j = i;
        complex v = 0.0;
        while (j < t.size() && t[j].row == t[i].row && t[j].col == t[i].col) v += t[j++].val;
        if (v != complex(0.0, 0.0)) {
            col_idx_.push_back(t[i].col);
            vals_.push_back(v);
            ++row_ptr_[t[i].row + 1];
        }
        i = j;
    }
    for (std::size_t r = 0; r < dim_; ++r) row_ptr_[r + 1] += row_ptr_[r];
}

SparseOperator SparseOperator::identity(std::size_t dim) {
    std::vector<Triplet> t;
    t.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) t.push_back({i, i, 1.0});
    return SparseOperator(dim, std::move(t));
}

SparseOperator SparseOperator::from_dense(const CMat& A, double drop_tol) {
    if (A.rows() != A.cols()) throw std::invalid_argument("from_dense: matrix not square");
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j)
            if (std::abs(A(i, j)) > drop_tol) t.push_back({i, j, A(i, j)});
    return SparseOperator(A.rows(), std::move(t));
}

void SparseOperator::apply(const CMat& X, CMat& Y) const {
    if (X.rows() != dim_) throw std::invalid_argument("SparseOperator::apply: row mismatch");
    if (Y.rows() != dim_ || Y.cols() != X.cols()) Y.resize(dim_, X.cols());
    kern::sparse_apply(dim_, row_ptr_.data(), col_idx_.data(), vals_.data(), X, Y);
}

CMat SparseOperator::apply(const CMat& X) const {
    CMat Y(dim_, X.cols());
    apply(X, Y);
    return Y;
}

SparseOperator SparseOperator::adjoint() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
            t.push_back({col_idx_[p], r, std::conj(vals_[p])});
    return SparseOperator(dim_, std::move(t));
}

SparseOperator SparseOperator::scaled(complex s) const {
    SparseOperator r = *this;
    for (complex& v : r.vals_) v *= s;
    return r;
}

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("SparseOperator: dimension mismatch");
    std::vector<SparseOperator::Triplet> t;
    t.reserve(a.nnz() + b.nnz());
    for (std::size_t r = 0; r < a.dim_; ++r)
        for (std::size_t p = a.row_ptr_[r]; p < a.row_ptr_[r + 1]; ++p)
            t.push_back({r, a.col_idx_[p], a.vals_[p]});
    for (std::size_t r = 0; r < b.dim_; ++r)
        for (std::size_t p = b.row_ptr_[r]; p < b.row_ptr_[r + 1]; ++p)
            t.push_back({r, b.col_idx_[p], b.vals_[p]});
    return SparseOperator(a.dim_, std::move(t));
}

SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) {
    return a + b.scaled(-1.0);
}

SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("SparseOperator: dimension mismatch");
    std::vector<SparseOperator::Triplet> t;
    for (std::size_t r = 0; r < a.dim_; ++r) {
        for (std::size_t p = a.row_ptr_[r]; p < a.row_ptr_[r + 1]; ++p) {
            const std::size_t k = a.col_idx_[p];
            const complex av = a.vals_[p];
            for (std::size_t q = b.row_ptr_[k]; q < b.row_ptr_[k + 1]; ++q)
                t.push_back({r, b.col_idx_[q], av * b.vals_[q]});
        }
    }
    return SparseOperator(a.dim_, std::move(t));
}

SparseOperator kron(const SparseOperator& a, const SparseOperator& b) {
    std::vector<SparseOperator::Triplet> t;
    t.reserve(a.nnz() * b.nnz());
    const std::size_t db = b.dim_;
    for (std::size_t ra = 0; ra < a.dim_; ++ra)
        for (std::size_t pa = a.row_ptr_[ra]; pa < a.row_ptr_[ra + 1]; ++pa)
            for (std::size_t rb = 0; rb < b.dim_; ++rb)
                for (std::size_t pb = b.row_ptr_[rb]; pb < b.row_ptr_[rb + 1]; ++pb)
                    t.push_back({ra * db + rb, a.col_idx_[pa] * db + b.col_idx_[pb],
                                 a.vals_[pa] * b.vals_[pb]});
    return SparseOperator(a.dim_ * b.dim_, std::move(t));
}

double SparseOperator::hermiticity_defect() const {
    SparseOperator d = *this - adjoint();
    double m = 0.0;
    for (const complex& v : d.vals_) m = std::max(m, std::abs(v));
    return m;
}

CMat SparseOperator::to_dense() const {
    CMat A(dim_, dim_);
    for (std::size_t r = 0; r < dim_; ++r)
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) A(r, col_idx_[p]) = vals_[p];
    return A;
}

}  // namespace lrt
