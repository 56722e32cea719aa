#ifndef LRT_HILBERT_HPP
#define LRT_HILBERT_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "lrt/cmat.hpp"
#include "lrt/sparse.hpp"

namespace lrt {

// Composite-space conventions: factor 0 is the leftmost (most significant)
// slot, so the flat index of digits (i_0, ..., i_{n-1}) with local dimensions
// (d_0, ..., d_{n-1}) is i_0 * d_1 * ... * d_{n-1} + ... + i_{n-1}.
std::size_t composite_dim(const std::vector<std::size_t>& dims);
std::size_t composite_index(const std::vector<std::size_t>& dims,
                            const std::vector<std::size_t>& digits);

// Embed local operators into the full space: identity on every unlisted slot.
// Listing the same slot twice is rejected; factors may be given in any order.
SparseOperator tensor_embed(const std::vector<std::size_t>& dims,
                            const std::vector<std::pair<std::size_t, CMat>>& factors);

// Spin-1/2 local basis: index 0 is up, 1 is down. sigma_z = diag(1, -1),
// sigma_minus |up> = |down>.
enum class Pauli { X, Y, Z, Plus, Minus };
CMat pauli_matrix(Pauli p);
SparseOperator pauli_site(std::size_t n_sites, std::size_t site, Pauli p);

// Truncated bosonic mode: a |n> = sqrt(n) |n-1>, dimension = cutoff.
CMat boson_annihilator(std::size_t cutoff);
CMat boson_number(std::size_t cutoff);
SparseOperator boson_mode_op(std::size_t n_modes, std::size_t cutoff, std::size_t mode,
                             const CMat& local);

// Nearest-neighbour bonds of an open-boundary Lx x Ly grid, sites numbered
// row-major (site = r*Lx + c). Each undirected bond appears once.
std::vector<std::pair<std::size_t, std::size_t>> grid_edges(std::size_t Lx, std::size_t Ly);

// Normalized coherent state in a truncated Fock space.
std::vector<complex> coherent_state(std::size_t cutoff, complex alpha);

}  // namespace lrt

#endif
