#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "lrt/hilbert.hpp"
#include "lrt/kernels.hpp"
#include "lrt/lowrank.hpp"

using lrt::CMat;
using lrt::complex;

namespace {

CMat random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMat A(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) A.data()[i] = complex(dist(rng), dist(rng));
    return A;
}

CMat matmul(const CMat& A, const CMat& B) {
    CMat C(A.rows(), B.cols());
    lrt::kern::ref::matmul(A, B, C);
    return C;
}

lrt::LowRankState random_state(std::size_t dim, std::size_t M, std::mt19937_64& rng) {
    const CMat z = random_matrix(dim, M, rng);
    CMat B = random_matrix(M, M, rng);
    B = matmul(B, B.adjoint());
    lrt::LowRankState st = lrt::make_lowrank_state(z, B, lrt::PinvConfig{});
    st.normalize_trace();
    return st;
}

}  // namespace

TEST_CASE("expectation matches the dense trace") {
    std::mt19937_64 rng(2);
    const std::size_t dim = 6, M = 3;
    lrt::LowRankState st = random_state(dim, M, rng);
    const CMat rho = lrt::reconstruct_dense(st);

    const CMat Ad = random_matrix(dim, dim, rng);
    const lrt::SparseOperator A = lrt::SparseOperator::from_dense(Ad, 0.0);
    const complex got = lrt::expectation(st, A);
    const complex expect = matmul(Ad, rho).trace();
    CHECK(std::abs(got - expect) < 1e-12 * std::max(1.0, std::abs(expect)));
}

TEST_CASE("expectation_chain multiplies left to right") {
    // <a adag> vs <adag a> on the Fock state |1>: 2 vs 1
    const std::size_t cutoff = 4;
    CMat z(cutoff, 1);
    z(1, 0) = 1.0;
    CMat B(1, 1);
    B(0, 0) = 1.0;
    lrt::LowRankState st = lrt::make_lowrank_state(z, B, lrt::PinvConfig{});

    const lrt::SparseOperator a =
        lrt::SparseOperator::from_dense(lrt::boson_annihilator(cutoff), 0.0);
    const lrt::SparseOperator ad = a.adjoint();

    CHECK(lrt::expectation_chain(st, {a, ad}).real() == doctest::Approx(2.0));
    CHECK(lrt::expectation_chain(st, {ad, a}).real() == doctest::Approx(1.0));
    CHECK(lrt::expectation_chain(st, {}).real() == doctest::Approx(1.0));  // trace
}

TEST_CASE("gram cache refresh and drift tracking") {
    std::mt19937_64 rng(8);
    lrt::LowRankState st = random_state(10, 4, rng);
    CHECK(st.gram_drift() < 1e-13);

    // perturb the frame behind the cache's back
    st.z(0, 0) += 0.5;
    CHECK(st.gram_drift() > 1e-3);
    st.refresh_gram();
    CHECK(st.gram_drift() < 1e-13);

    // S_inv acts as a true inverse for a well-conditioned Gram
    CMat SiS(st.rank(), st.rank());
    lrt::kern::ref::matmul(st.S_inv, st.S, SiS);
    CMat I(st.rank(), st.rank());
    for (std::size_t k = 0; k < st.rank(); ++k) I(k, k) = 1.0;
    CHECK(lrt::max_abs_diff(SiS, I) < 1e-8);
}

TEST_CASE("trace and normalize_trace") {
    std::mt19937_64 rng(14);
    lrt::LowRankState st = random_state(7, 3, rng);
    const CMat rho = lrt::reconstruct_dense(st);
    CHECK(st.trace() == doctest::Approx(rho.trace().real()).epsilon(1e-12));
    CHECK(st.trace() == doctest::Approx(1.0).epsilon(1e-12));

    st.B *= complex(3.0, 0.0);
    CHECK(st.trace() == doctest::Approx(3.0).epsilon(1e-12));
    st.normalize_trace();
    CHECK(st.trace() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("diagonalize recovers a known mixture") {
    // rho = 0.75 |0><0| + 0.25 |+><+| built from a non-orthogonal frame
    const std::size_t dim = 2;
    CMat z(dim, 2);
    z(0, 0) = 1.0;                      // |0>
    z(0, 1) = std::sqrt(0.5);           // |+>
    z(1, 1) = std::sqrt(0.5);
    CMat B(2, 2);
    B(0, 0) = 0.75;
    B(1, 1) = 0.25;
    lrt::LowRankState st = lrt::make_lowrank_state(z, B, lrt::PinvConfig{});

    const lrt::SpectralForm sf = lrt::diagonalize(st);
    REQUIRE(sf.p.size() == 2);
    // eigenvalues of the dense rho
    const CMat rho = lrt::reconstruct_dense(st);
    const double tr = rho.trace().real();
    const double det = (rho(0, 0) * rho(1, 1) - rho(0, 1) * rho(1, 0)).real();
    const double disc = std::sqrt(tr * tr - 4.0 * det);
    CHECK(sf.p[0] == doctest::Approx(0.5 * (tr + disc)).epsilon(1e-12));
    CHECK(sf.p[1] == doctest::Approx(0.5 * (tr - disc)).epsilon(1e-12));

    // natural states are orthonormal and reassemble rho
    CMat recon(dim, dim);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j)
                recon(i, j) += sf.p[a] * sf.eta(i, a) * std::conj(sf.eta(j, a));
    CHECK(lrt::max_abs_diff(recon, rho) < 1e-12);
    const CMat gram = matmul(sf.eta.adjoint(), sf.eta);
    CHECK(std::abs(gram(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(gram(1, 1) - 1.0) < 1e-12);
    CHECK(std::abs(gram(0, 1)) < 1e-12);
}

TEST_CASE("diagonalize drops numerically null directions") {
    std::mt19937_64 rng(20);
    const std::size_t dim = 6;
    CMat z = random_matrix(dim, 3, rng);
    for (std::size_t i = 0; i < dim; ++i) z(i, 2) = z(i, 0);  // redundant direction
    CMat B(3, 3);
    B(0, 0) = 0.5;
    B(1, 1) = 0.5;  // third natural weight is exactly zero
    lrt::LowRankState st = lrt::make_lowrank_state(z, B, lrt::PinvConfig{});
    const lrt::SpectralForm sf = lrt::diagonalize(st);
    CHECK(sf.p.size() == 2);
}

TEST_CASE("entropy endpoints") {
    std::mt19937_64 rng(26);
    // pure state: S = 0
    CMat z = random_matrix(5, 1, rng);
    CMat B(1, 1);
    B(0, 0) = 1.0;
    lrt::LowRankState pure = lrt::make_lowrank_state(z, B, lrt::PinvConfig{});
    pure.normalize_trace();
    CHECK(std::abs(lrt::von_neumann_entropy(pure)) < 1e-12);

    // maximally mixed on an orthonormal M-frame: S = ln M
    const std::size_t M = 4;
    CMat zo(8, M);
    for (std::size_t k = 0; k < M; ++k) zo(k, k) = 1.0;
    CMat Bm(M, M);
    for (std::size_t k = 0; k < M; ++k) Bm(k, k) = 1.0 / double(M);
    lrt::LowRankState mixed = lrt::make_lowrank_state(zo, Bm, lrt::PinvConfig{});
    CHECK(lrt::von_neumann_entropy(mixed) == doctest::Approx(std::log(double(M))).epsilon(1e-12));
}

TEST_CASE("overlap of factorized states matches the dense formula") {
    std::mt19937_64 rng(31);
    const std::size_t dim = 7;
    const lrt::LowRankState a = random_state(dim, 3, rng);
    const lrt::LowRankState b = random_state(dim, 4, rng);

    const double dense = lrt::overlap(lrt::reconstruct_dense(a), lrt::reconstruct_dense(b));
    const double fact = lrt::overlap(a, b);
    CHECK(fact == doctest::Approx(dense).epsilon(1e-10));

    CHECK(lrt::overlap(a, a) == doctest::Approx(1.0).epsilon(1e-12));

    // orthogonal supports: overlap 0
    CMat z1(4, 1), z2(4, 1), B1(1, 1);
    z1(0, 0) = 1.0;
    z2(2, 0) = 1.0;
    B1(0, 0) = 1.0;
    const lrt::LowRankState s1 = lrt::make_lowrank_state(z1, B1, lrt::PinvConfig{});
    const lrt::LowRankState s2 = lrt::make_lowrank_state(z2, B1, lrt::PinvConfig{});
    CHECK(std::abs(lrt::overlap(s1, s2)) < 1e-14);
}

TEST_CASE("state text io round-trips bit-exactly") {
    std::mt19937_64 rng(37);
    const lrt::LowRankState st = random_state(9, 3, rng);

    std::stringstream ss;
    lrt::write_state_text(ss, st, 1.25);

    lrt::LowRankState back;
    back.pinv = st.pinv;
    const double t = lrt::read_state_text(ss, back);
    CHECK(t == 1.25);
    REQUIRE(back.dim() == st.dim());
    REQUIRE(back.rank() == st.rank());
    CHECK(lrt::max_abs_diff(back.z, st.z) == 0.0);
    CHECK(lrt::max_abs_diff(back.B, st.B) == 0.0);
    CHECK(lrt::max_abs_diff(back.S, st.S) == 0.0);
}

TEST_CASE("reconstruct_dense refuses oversized systems") {
    std::mt19937_64 rng(41);
    const lrt::LowRankState st = random_state(64, 2, rng);
    CHECK_THROWS(lrt::reconstruct_dense(st, 32));
}
