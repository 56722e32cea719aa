#ifndef LRT_CMAT_HPP
#define LRT_CMAT_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace lrt {

using complex = std::complex<double>;

// Dense complex matrix, row-major. Row-major keeps the M columns of a
// tall N_H x M block contiguous per row, which is what the sparse-times-dense
// kernel streams over.
class CMat {
public:
    CMat() = default;
    CMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, complex(0.0, 0.0)) {}

    static CMat identity(std::size_t n) {
        CMat I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    complex* row(std::size_t i) { return data_.data() + i * cols_; }
    const complex* row(std::size_t i) const { return data_.data() + i * cols_; }
    complex* data() { return data_.data(); }
    const complex* data() const { return data_.data(); }

    void set_zero() { std::fill(data_.begin(), data_.end(), complex(0.0, 0.0)); }

    // keeps existing contents when the shape already matches (hot paths call
    // this unconditionally and then overwrite)
    void resize(std::size_t rows, std::size_t cols) {
        if (rows == rows_ && cols == cols_ && !data_.empty()) return;
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, complex(0.0, 0.0));
    }

    CMat adjoint() const {
        CMat R(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) R(j, i) = std::conj((*this)(i, j));
        return R;
    }

    CMat transpose() const {
        CMat R(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) R(j, i) = (*this)(i, j);
        return R;
    }

    CMat conj() const {
        CMat R(rows_, cols_);
        for (std::size_t k = 0; k < data_.size(); ++k) R.data_[k] = std::conj(data_[k]);
        return R;
    }

    complex trace() const {
        complex t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const complex& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const complex& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    CMat& operator+=(const CMat& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    CMat& operator-=(const CMat& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    CMat& operator*=(complex s) {
        for (complex& v : data_) v *= s;
        return *this;
    }

    friend CMat operator+(CMat a, const CMat& b) { return a += b; }
    friend CMat operator-(CMat a, const CMat& b) { return a -= b; }
    friend CMat operator*(complex s, CMat a) { return a *= s; }
    friend CMat operator*(CMat a, complex s) { return a *= s; }

    bool same_shape(const CMat& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    void check_same_shape(const CMat& o) const {
        if (!same_shape(o)) throw std::invalid_argument("CMat: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<complex> data_;
};

// max_ij |A_ij - B_ij|
inline double max_abs_diff(const CMat& a, const CMat& b) {
    if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

inline double hermiticity_defect(const CMat& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
    return m;
}

inline void symmetrize_hermitian(CMat& a) {
    for (std::size_t i = 0; i < a.rows(); ++i) {
        a(i, i) = complex(a(i, i).real(), 0.0);
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
}

}  // namespace lrt

#endif
