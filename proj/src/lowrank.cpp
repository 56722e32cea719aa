#include "lrt/lowrank.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "lrt/kernels.hpp"
#include "lrt/textio.hpp"

namespace lrt {

void LowRankState::refresh_gram() {
    S.resize(rank(), rank());
    kern::matmul_adjoint_left(z, z, S);
    symmetrize_hermitian(S);
    S_inv = regularized_pinv(S, pinv);
}

double LowRankState::gram_drift() const {
    CMat G(rank(), rank());
    kern::matmul_adjoint_left(z, z, G);
    return max_abs_diff(G, S);
}

double LowRankState::trace() const {
    complex t = 0.0;
    for (std::size_t i = 0; i < rank(); ++i)
        for (std::size_t j = 0; j < rank(); ++j) t += B(i, j) * S(j, i);
    return t.real();
}

void LowRankState::normalize_trace() {
    const double tr = trace();
    if (tr <= 0.0) throw std::runtime_error("LowRankState: non-positive trace");
    B *= complex(1.0 / tr, 0.0);
}

LowRankState make_lowrank_state(CMat z, CMat B, const PinvConfig& pinv) {
    if (B.rows() != z.cols() || B.cols() != z.cols())
        throw std::invalid_argument("make_lowrank_state: B size must match frame rank");
    if (hermiticity_defect(B) > 1e-10 * std::max(1.0, B.max_abs()))
        throw std::invalid_argument("make_lowrank_state: B not Hermitian");
    LowRankState st;
    st.z = std::move(z);
    st.B = std::move(B);
    st.pinv = pinv;
    st.refresh_gram();
    return st;
}

complex expectation(const LowRankState& st, const SparseOperator& A) {
    return expectation_chain(st, {A});
}

// an empty product is the identity, so ops = {} evaluates the trace
complex expectation_chain(const LowRankState& st, const std::vector<SparseOperator>& ops) {
    const std::size_t M = st.rank();
    CMat w = st.z;
    CMat tmp;
    for (std::size_t k = ops.size(); k-- > 0;) {
        ops[k].apply(w, tmp);
        std::swap(w, tmp);
    }
    CMat G(M, M);
    kern::matmul_adjoint_left(st.z, w, G);  // z^dag (A z)
    complex val = 0.0;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) val += st.B(i, j) * G(j, i);
    return val;
}

SpectralForm diagonalize(const LowRankState& st, double null_cutoff) {
    const std::size_t M = st.rank();
    // integrated weights carry integrator-level negatives; clamp those, the
    // null cutoff below drops the affected directions anyway
    CMat sqrtB = matrix_sqrt_psd(st.B, 1e-6);
    CMat C(st.dim(), M);
    kern::matmul(st.z, sqrtB, C);
    CMat sigma(M, M);
    kern::matmul_adjoint_left(C, C, sigma);
    symmetrize_hermitian(sigma);
    EigenResult eig = hermitian_eigen(sigma);

    const double pmax = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    std::size_t keep = 0;
    while (keep < M && eig.values[keep] > null_cutoff * pmax && eig.values[keep] > 0.0) ++keep;

    SpectralForm sf;
    sf.p.assign(eig.values.begin(), eig.values.begin() + keep);
    CMat V(M, keep);
    for (std::size_t j = 0; j < keep; ++j) {
        const double inv = 1.0 / std::sqrt(eig.values[j]);
        for (std::size_t i = 0; i < M; ++i) V(i, j) = eig.vectors(i, j) * inv;
    }
    sf.eta.resize(st.dim(), keep);
    kern::matmul(C, V, sf.eta);
    return sf;
}

double von_neumann_entropy(const LowRankState& st) {
    SpectralForm sf = diagonalize(st);
    double s = 0.0;
    for (double p : sf.p)
        if (p > 0.0) s -= p * std::log(p);
    return s;
}

double overlap(const CMat& A, const CMat& B) {
    if (!A.same_shape(B)) throw std::invalid_argument("overlap: shape mismatch");
    complex num = 0.0;
    double na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) {
            num += std::conj(A(i, j)) * B(i, j);
            na += std::norm(A(i, j));
            nb += std::norm(B(i, j));
        }
    const double den = std::sqrt(na * nb);
    if (den == 0.0) throw std::invalid_argument("overlap: zero operator");
    return num.real() / den;
}

double overlap(const LowRankState& a, const LowRankState& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("overlap: dimension mismatch");
    CMat X(a.rank(), b.rank());
    kern::matmul_adjoint_left(a.z, b.z, X);  // z_a^dag z_b

    // Tr(rho_a rho_b) = Tr(B_a X B_b X^dag)
    auto cross = [](const CMat& Ba, const CMat& X_, const CMat& Bb) {
        CMat t1(Ba.rows(), X_.cols());
        kern::matmul(Ba, X_, t1);
        CMat t2(t1.rows(), Bb.cols());
        kern::matmul(t1, Bb, t2);
        CMat Xad = X_.adjoint();
        CMat t3(t2.rows(), Xad.cols());
        kern::matmul(t2, Xad, t3);
        return t3.trace().real();
    };
    const double num = cross(a.B, X, b.B);

    auto self = [](const LowRankState& s) {
        CMat t1(s.rank(), s.rank());
        kern::matmul(s.B, s.S, t1);
        CMat t2(s.rank(), s.rank());
        kern::matmul(t1, t1, t2);  // (B S)^2; Tr = Tr(B S B S) = Tr(rho^2)
        return t2.trace().real();
    };
    const double den = std::sqrt(self(a) * self(b));
    if (den == 0.0) throw std::invalid_argument("overlap: zero state");
    return num / den;
}

CMat reconstruct_dense(const LowRankState& st, std::size_t dense_limit) {
    if (st.dim() > dense_limit)
        throw std::invalid_argument("reconstruct_dense: dimension exceeds dense limit");
    CMat P(st.dim(), st.rank());
    kern::matmul(st.z, st.B, P);
    CMat zad = st.z.adjoint();
    CMat rho(st.dim(), st.dim());
    kern::matmul(P, zad, rho);
    return rho;
}

void write_state_text(std::ostream& os, const LowRankState& st, double t) {
    os << "lowrank-state 1\n";
    os << "t " << fmt17(t) << "\n";
    os << "dims " << st.dim() << " " << st.rank() << "\n";
    write_cmat_text(os, st.z);
    write_cmat_text(os, st.B);
}

double read_state_text(std::istream& is, LowRankState& st) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (!is || tag != "lowrank-state" || version != 1)
        throw std::runtime_error("read_state_text: bad header");
    double t = 0.0;
    std::size_t N = 0, M = 0;
    is >> tag >> t;
    if (!is || tag != "t") throw std::runtime_error("read_state_text: bad time record");
    is >> tag >> N >> M;
    if (!is || tag != "dims") throw std::runtime_error("read_state_text: bad dims record");
    st.z = read_cmat_text(is, N, M);
    st.B = read_cmat_text(is, M, M);
    symmetrize_hermitian(st.B);
    st.refresh_gram();
    return t;
}

}  // namespace lrt
