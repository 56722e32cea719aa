#ifndef LRT_TEXTIO_HPP
#define LRT_TEXTIO_HPP

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lrt/cmat.hpp"

namespace lrt {

// 17 significant digits: enough for binary64 to round-trip through text
// exactly, so re-reading a file reproduces the run bit for bit.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_cmat_text(std::ostream& os, const CMat& A) {
    for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < A.cols(); ++j) {
            const complex v = A(i, j);
            if (j) os << ' ';
            os << fmt17(v.real()) << ' ' << fmt17(v.imag());
        }
        os << '\n';
    }
}

inline CMat read_cmat_text(std::istream& is, std::size_t rows, std::size_t cols) {
    CMat A(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            double re = 0.0, im = 0.0;
            if (!(is >> re >> im)) throw std::runtime_error("read_cmat_text: truncated matrix");
            A(i, j) = complex(re, im);
        }
    return A;
}

}  // namespace lrt

#endif
