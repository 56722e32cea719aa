#include "lrt/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrt {

std::size_t composite_dim(const std::vector<std::size_t>& dims) {
    std::size_t d = 1;
    for (std::size_t x : dims) d *= x;
    return d;
}

std::size_t composite_index(const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& digits) {
    if (dims.size() != digits.size())
        throw std::invalid_argument("composite_index: digit count mismatch");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (digits[i] >= dims[i]) throw std::out_of_range("composite_index: digit out of range");
        idx = idx * dims[i] + digits[i];
    }
    return idx;
}

SparseOperator tensor_embed(const std::vector<std::size_t>& dims,
                            const std::vector<std::pair<std::size_t, CMat>>& factors) {
    std::vector<const CMat*> slot(dims.size(), nullptr);
    for (const auto& [pos, op] : factors) {
        if (pos >= dims.size()) throw std::out_of_range("tensor_embed: slot out of range");
        if (slot[pos]) throw std::invalid_argument("tensor_embed: slot listed twice");
        if (op.rows() != dims[pos] || op.cols() != dims[pos])
            throw std::invalid_argument("tensor_embed: local operator size mismatch");
        slot[pos] = &op;
    }
    SparseOperator acc = SparseOperator::identity(1);
    for (std::size_t i = 0; i < dims.size(); ++i) {
        SparseOperator local = slot[i] ? SparseOperator::from_dense(*slot[i])
                                       : SparseOperator::identity(dims[i]);
        acc = kron(acc, local);
    }
    return acc;
}

CMat pauli_matrix(Pauli p) {
    CMat m(2, 2);
    switch (p) {
        case Pauli::X:
            m(0, 1) = 1.0;
            m(1, 0) = 1.0;
            break;
        case Pauli::Y:
            m(0, 1) = complex(0.0, -1.0);
            m(1, 0) = complex(0.0, 1.0);
            break;
        case Pauli::Z:
            m(0, 0) = 1.0;
            m(1, 1) = -1.0;
            break;
        case Pauli::Plus:
            m(0, 1) = 1.0;
            break;
        case Pauli::Minus:
            m(1, 0) = 1.0;
            break;
    }
    return m;
}

SparseOperator pauli_site(std::size_t n_sites, std::size_t site, Pauli p) {
    std::vector<std::size_t> dims(n_sites, 2);
    return tensor_embed(dims, {{site, pauli_matrix(p)}});
}

CMat boson_annihilator(std::size_t cutoff) {
    CMat a(cutoff, cutoff);
    for (std::size_t n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

CMat boson_number(std::size_t cutoff) {
    CMat n(cutoff, cutoff);
    for (std::size_t k = 0; k < cutoff; ++k) n(k, k) = static_cast<double>(k);
    return n;
}

SparseOperator boson_mode_op(std::size_t n_modes, std::size_t cutoff, std::size_t mode,
                             const CMat& local) {
    std::vector<std::size_t> dims(n_modes, cutoff);
    return tensor_embed(dims, {{mode, local}});
}

std::vector<std::pair<std::size_t, std::size_t>> grid_edges(std::size_t Lx, std::size_t Ly) {
    if (Lx == 0 || Ly == 0) throw std::invalid_argument("grid_edges: empty grid");
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t r = 0; r < Ly; ++r) {
        for (std::size_t c = 0; c < Lx; ++c) {
            const std::size_t s = r * Lx + c;
            if (c + 1 < Lx) edges.emplace_back(s, s + 1);
            if (r + 1 < Ly) edges.emplace_back(s, s + Lx);
        }
    }
    return edges;
}

std::vector<complex> coherent_state(std::size_t cutoff, complex alpha) {
    // build unnormalized amplitudes alpha^n / sqrt(n!) and normalize inside
    // the truncated space, so the result is a unit vector even when the tail
    // of the Poisson distribution is clipped
    std::vector<complex> v(cutoff);
    complex amp = 1.0;
    v[0] = amp;
    for (std::size_t n = 1; n < cutoff; ++n) {
        amp *= alpha / std::sqrt(static_cast<double>(n));
        v[n] = amp;
    }
    double norm = 0.0;
    for (const complex& c : v) norm += std::norm(c);
    norm = std::sqrt(norm);
    for (complex& c : v) c /= norm;
    return v;
}

}  // namespace lrt
