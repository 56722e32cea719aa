#ifndef LRT_LOWRANK_HPP
#define LRT_LOWRANK_HPP

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "lrt/cmat.hpp"
#include "lrt/numerics.hpp"
#include "lrt/sparse.hpp"

namespace lrt {

// Factorized density operator rho = z B z^dag with z a dim x M frame and B
// an M x M Hermitian PSD weight matrix. S caches the Gram z^dag z; S_inv is
// its filtered inverse and is refreshed only at well-defined points (start,
// rank events, explicit Gram refresh), never inside the stepper loop.
struct LowRankState {
    CMat z;
    CMat B;
    CMat S;
    CMat S_inv;
    PinvConfig pinv;

    std::size_t dim() const { return z.rows(); }
    std::size_t rank() const { return z.cols(); }

    // recompute S = z^dag z and its filtered inverse from the current frame
    void refresh_gram();
    // max |(z^dag z) - S| against the cached Gram
    double gram_drift() const;
    // Tr rho = Tr(B S)
    double trace() const;
    // scale B so the trace is exactly one
    void normalize_trace();
};

LowRankState make_lowrank_state(CMat z, CMat B, const PinvConfig& pinv);

// <A> = Tr(B z^dag A z); the chain overload evaluates the operator product
// A = ops[0] * ops[1] * ... applied right-to-left, so mode-local factors of a
// tensor product can be applied one at a time.
complex expectation(const LowRankState& st, const SparseOperator& A);
complex expectation_chain(const LowRankState& st, const std::vector<SparseOperator>& ops);

// Eigenpairs of rho via the M x M matrix sigma = C^dag C, C = z sqrt(B);
// rho and sigma share their nonzero spectrum. Only eigenvalues above
// null_cutoff * p_max are kept, with their natural states eta_j = C v_j / sqrt(p_j).
struct SpectralForm {
    std::vector<double> p;
    CMat eta;  // dim x p.size(), orthonormal columns
};
SpectralForm diagonalize(const LowRankState& st, double null_cutoff = 1e-12);

double von_neumann_entropy(const LowRankState& st);

// Tr(A^dag B) / sqrt(Tr(A^dag A) Tr(B^dag B)); real for Hermitian inputs.
double overlap(const CMat& A, const CMat& B);
// Same quantity for two factorized states, via M x M Grams only.
double overlap(const LowRankState& a, const LowRankState& b);

// Dense rho = z B z^dag; guarded so nobody materializes a huge matrix by
// accident.
CMat reconstruct_dense(const LowRankState& st, std::size_t dense_limit = 4096);

// Plain-text state snapshot (17 significant digits, round-trips exactly).
void write_state_text(std::ostream& os, const LowRankState& st, double t);
double read_state_text(std::istream& is, LowRankState& st);

}  // namespace lrt

#endif
