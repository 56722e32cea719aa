#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "lrt/hilbert.hpp"

using lrt::CMat;
using lrt::complex;

namespace {

CMat dense_kron(const CMat& A, const CMat& B) {
    CMat K(A.rows() * B.rows(), A.cols() * B.cols());
    for (std::size_t ia = 0; ia < A.rows(); ++ia)
        for (std::size_t ja = 0; ja < A.cols(); ++ja)
            for (std::size_t ib = 0; ib < B.rows(); ++ib)
                for (std::size_t jb = 0; jb < B.cols(); ++jb)
                    K(ia * B.rows() + ib, ja * B.cols() + jb) = A(ia, ja) * B(ib, jb);
    return K;
}

CMat identity(std::size_t n) {
    CMat I(n, n);
    for (std::size_t k = 0; k < n; ++k) I(k, k) = 1.0;
    return I;
}

CMat random_matrix(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMat A(n, n);
    for (std::size_t i = 0; i < n * n; ++i) A.data()[i] = complex(dist(rng), dist(rng));
    return A;
}

}  // namespace

TEST_CASE("composite index puts factor 0 in the most significant position") {
    const std::vector<std::size_t> dims{3, 4, 2};
    CHECK(lrt::composite_dim(dims) == 24);
    CHECK(lrt::composite_index(dims, {0, 0, 0}) == 0);
    CHECK(lrt::composite_index(dims, {0, 0, 1}) == 1);
    CHECK(lrt::composite_index(dims, {0, 1, 0}) == 2);
    CHECK(lrt::composite_index(dims, {1, 0, 0}) == 8);
    CHECK(lrt::composite_index(dims, {2, 3, 1}) == 23);
}

TEST_CASE("tensor_embed matches the dense Kronecker product") {
    std::mt19937_64 rng(3);
    const std::vector<std::size_t> dims{2, 3, 2};
    const CMat A = random_matrix(2, rng);
    const CMat C = random_matrix(2, rng);

    SUBCASE("single factor in the middle slot") {
        const CMat B = random_matrix(3, rng);
        const CMat expect = dense_kron(dense_kron(identity(2), B), identity(2));
        const CMat got = lrt::tensor_embed(dims, {{1, B}}).to_dense();
        CHECK(lrt::max_abs_diff(expect, got) < 1e-14);
    }
    SUBCASE("two factors, listed out of order") {
        const CMat expect = dense_kron(dense_kron(A, identity(3)), C);
        const CMat got = lrt::tensor_embed(dims, {{2, C}, {0, A}}).to_dense();
        CHECK(lrt::max_abs_diff(expect, got) < 1e-14);
    }
    SUBCASE("duplicate slot is rejected") {
        CHECK_THROWS(lrt::tensor_embed(dims, {{0, A}, {0, A}}));
    }
}

TEST_CASE("pauli_site acts on the addressed spin only") {
    // 3 spins, sigma_z on site 1: basis index ordering has site 0 most significant
    const lrt::SparseOperator Z1 = lrt::pauli_site(3, 1, lrt::Pauli::Z);
    const CMat D = Z1.to_dense();
    for (std::size_t idx = 0; idx < 8; ++idx) {
        const int bit = int(idx >> 1) & 1;  // site 1 occupies the middle bit
        CHECK(D(idx, idx).real() == doctest::Approx(bit == 0 ? 1.0 : -1.0));
    }

    const CMat sm = lrt::pauli_matrix(lrt::Pauli::Minus);
    CHECK(sm(1, 0).real() == doctest::Approx(1.0));  // lowers up (index 0) to down (index 1)
    CHECK(sm(0, 1).real() == doctest::Approx(0.0));

    const CMat sx = lrt::pauli_matrix(lrt::Pauli::X);
    const CMat sy = lrt::pauli_matrix(lrt::Pauli::Y);
    const CMat sz = lrt::pauli_matrix(lrt::Pauli::Z);
    // commutation [X, Y] = 2iZ pins the sign conventions
    CMat xy(2, 2), yx(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) {
                xy(i, j) += sx(i, k) * sy(k, j);
                yx(i, j) += sy(i, k) * sx(k, j);
            }
    CHECK(lrt::max_abs_diff(xy - yx, sz * complex(0.0, 2.0)) < 1e-14);
}

TEST_CASE("grid_edges counts open-boundary bonds") {
    CHECK(lrt::grid_edges(2, 2).size() == 4);
    CHECK(lrt::grid_edges(3, 2).size() == 7);
    CHECK(lrt::grid_edges(3, 3).size() == 12);
    CHECK(lrt::grid_edges(6, 1).size() == 5);
    CHECK(lrt::grid_edges(1, 6).size() == 5);

    // every bond connects row/col neighbours exactly once
    const auto edges = lrt::grid_edges(3, 3);
    for (auto [a, b] : edges) {
        const std::size_t ra = a / 3, ca = a % 3, rb = b / 3, cb = b % 3;
        const std::size_t dist = (ra > rb ? ra - rb : rb - ra) + (ca > cb ? ca - cb : cb - ca);
        CHECK(dist == 1);
    }
    auto sorted = edges;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
}

TEST_CASE("boson ladder operators on the truncated Fock space") {
    const std::size_t cutoff = 6;
    const CMat a = lrt::boson_annihilator(cutoff);
    const CMat n = lrt::boson_number(cutoff);

    for (std::size_t k = 1; k < cutoff; ++k)
        CHECK(a(k - 1, k).real() == doctest::Approx(std::sqrt(double(k))));
    for (std::size_t k = 0; k < cutoff; ++k)
        CHECK(n(k, k).real() == doctest::Approx(double(k)));

    // adag a = n exactly; [a, adag] = 1 everywhere except the truncation level
    const CMat ad = a.adjoint();
    CMat ada(cutoff, cutoff), aad(cutoff, cutoff);
    for (std::size_t i = 0; i < cutoff; ++i)
        for (std::size_t j = 0; j < cutoff; ++j)
            for (std::size_t k = 0; k < cutoff; ++k) {
                ada(i, j) += ad(i, k) * a(k, j);
                aad(i, j) += a(i, k) * ad(k, j);
            }
    CHECK(lrt::max_abs_diff(ada, n) < 1e-14);
    const CMat comm = aad - ada;
    for (std::size_t k = 0; k + 1 < cutoff; ++k)
        CHECK(comm(k, k).real() == doctest::Approx(1.0));
    CHECK(comm(cutoff - 1, cutoff - 1).real() == doctest::Approx(1.0 - double(cutoff)));
}

TEST_CASE("boson_mode_op embeds into a multi-mode register") {
    const std::size_t cutoff = 3, n_modes = 2;
    const CMat a = lrt::boson_annihilator(cutoff);
    const CMat e0 = lrt::boson_mode_op(n_modes, cutoff, 0, a).to_dense();
    const CMat e1 = lrt::boson_mode_op(n_modes, cutoff, 1, a).to_dense();
    CHECK(lrt::max_abs_diff(e0, dense_kron(a, identity(cutoff))) < 1e-14);
    CHECK(lrt::max_abs_diff(e1, dense_kron(identity(cutoff), a)) < 1e-14);
}

TEST_CASE("coherent state is normalized and near-eigenstate of a") {
    const std::size_t cutoff = 40;
    const complex alpha(1.3, -0.4);
    const std::vector<complex> psi = lrt::coherent_state(cutoff, alpha);
    REQUIRE(psi.size() == cutoff);

    double norm_sq = 0.0;
    for (const complex& c : psi) norm_sq += std::norm(c);
    CHECK(norm_sq == doctest::Approx(1.0).epsilon(1e-12));

    // <n> = |alpha|^2 up to truncation tails
    double n_mean = 0.0;
    for (std::size_t k = 0; k < cutoff; ++k) n_mean += double(k) * std::norm(psi[k]);
    CHECK(n_mean == doctest::Approx(std::norm(alpha)).epsilon(1e-10));

    // a |alpha> = alpha |alpha> componentwise below the truncation edge
    const CMat a = lrt::boson_annihilator(cutoff);
    for (std::size_t k = 0; k + 1 < cutoff; ++k) {
        const complex lhs = std::sqrt(double(k + 1)) * psi[k + 1];
        const complex rhs = alpha * psi[k];
        CHECK(std::abs(lhs - rhs) < 1e-12);
    }
}
