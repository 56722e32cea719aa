#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "lrt/hilbert.hpp"
#include "lrt/kernels.hpp"
#include "lrt/lindblad.hpp"

using lrt::CMat;
using lrt::complex;

namespace {

CMat random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMat A(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) A.data()[i] = complex(dist(rng), dist(rng));
    return A;
}

lrt::LindbladModel random_model(std::size_t dim, std::size_t n_jumps, std::mt19937_64& rng) {
    CMat Hd = random_matrix(dim, dim, rng);
    Hd = (Hd + Hd.adjoint()) * complex(0.5, 0.0);
    std::vector<lrt::SparseOperator> jumps;
    for (std::size_t s = 0; s < n_jumps; ++s)
        jumps.push_back(lrt::SparseOperator::from_dense(random_matrix(dim, dim, rng), 0.0));
    return lrt::LindbladModel::build(lrt::SparseOperator::from_dense(Hd, 0.0), std::move(jumps));
}

CMat matmul(const CMat& A, const CMat& B) {
    CMat C(A.rows(), B.cols());
    lrt::kern::ref::matmul(A, B, C);
    return C;
}

}  // namespace

TEST_CASE("dense generator annihilates the trace") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 5; ++rep) {
        const std::size_t dim = 2 + std::size_t(rep);
        const lrt::LindbladModel m = random_model(dim, 1 + rep % 3, rng);
        CMat rho = random_matrix(dim, dim, rng);
        rho = (rho + rho.adjoint()) * complex(0.5, 0.0);
        const CMat Lrho = lrt::apply_liouvillian_dense(m, rho);
        CHECK(std::abs(Lrho.trace()) < 1e-11 * std::max(1.0, rho.max_abs()));
        // generator preserves Hermiticity
        CHECK(lrt::hermiticity_defect(Lrho) < 1e-12 * std::max(1.0, Lrho.max_abs()));
    }
}

TEST_CASE("effective drift contains the jump back-action") {
    std::mt19937_64 rng(9);
    const std::size_t dim = 4;
    const lrt::LindbladModel m = random_model(dim, 2, rng);
    CMat expect = m.H.to_dense();
    for (const lrt::SparseOperator& G : m.jumps) {
        const CMat Gd = G.to_dense();
        expect = expect - matmul(Gd.adjoint(), Gd) * complex(0.0, 0.5);
    }
    CHECK(lrt::max_abs_diff(m.H_eff.to_dense(), expect) < 1e-12);
}

TEST_CASE("builder rejects a non-Hermitian Hamiltonian") {
    std::mt19937_64 rng(12);
    const CMat Hd = random_matrix(3, 3, rng);  // generic, not Hermitian
    CHECK_THROWS(lrt::LindbladModel::build(lrt::SparseOperator::from_dense(Hd, 0.0), {}));
}

TEST_CASE("factored Ltilde equals the dense generator applied to the frame") {
    std::mt19937_64 rng(21);
    lrt::LtildeWorkspace ws;
    for (int rep = 0; rep < 8; ++rep) {
        const std::size_t dim = 3 + std::size_t(rep % 4) * 2;
        const std::size_t M = 1 + std::size_t(rep % 3);
        const lrt::LindbladModel m = random_model(dim, 1 + rep % 2, rng);

        const CMat z = random_matrix(dim, M, rng);
        CMat B = random_matrix(M, M, rng);
        B = matmul(B, B.adjoint());  // Hermitian PSD weights
        const CMat S = matmul(z.adjoint(), z);

        CMat Lt;
        lrt::apply_Ltilde(m, z, B, S, Lt, ws);

        const CMat rho = matmul(matmul(z, B), z.adjoint());
        const CMat expect = matmul(lrt::apply_liouvillian_dense(m, rho), z);
        const double scale = std::max(1.0, expect.max_abs());
        CHECK(lrt::max_abs_diff(Lt, expect) < 1e-11 * scale);
    }
}

TEST_CASE("Ltilde handles a rank-deficient frame consistently") {
    // duplicate column: rho = z B z^dag is still well-defined, and Ltilde is
    // L(rho) z column by column, so columns 0 and 1 of the result must agree
    std::mt19937_64 rng(33);
    const std::size_t dim = 5;
    const lrt::LindbladModel m = random_model(dim, 2, rng);
    CMat z = random_matrix(dim, 3, rng);
    for (std::size_t i = 0; i < dim; ++i) z(i, 1) = z(i, 0);
    CMat B = random_matrix(3, 3, rng);
    B = matmul(B, B.adjoint());
    const CMat S = matmul(z.adjoint(), z);

    lrt::LtildeWorkspace ws;
    CMat Lt;
    lrt::apply_Ltilde(m, z, B, S, Lt, ws);
    for (std::size_t i = 0; i < dim; ++i) CHECK(std::abs(Lt(i, 0) - Lt(i, 1)) < 1e-11);
}

TEST_CASE("first-order Kraus set is complete to O(dt^2)") {
    std::mt19937_64 rng(40);
    const std::size_t dim = 4;
    const lrt::LindbladModel m = random_model(dim, 2, rng);

    auto completeness_defect = [&](double dt) {
        CMat sum(dim, dim);
        for (const lrt::SparseOperator& K : lrt::kraus_operators(m, dt)) {
            const CMat Kd = K.to_dense();
            sum += matmul(Kd.adjoint(), Kd);
        }
        CMat I(dim, dim);
        for (std::size_t k = 0; k < dim; ++k) I(k, k) = 1.0;
        return lrt::max_abs_diff(sum, I);
    };

    // the dt and dt^2 terms of K0^dag K0 cancel against the jump part except
    // for dt^2 H_eff^dag H_eff, so the defect is known in closed form
    const CMat He = m.H_eff.to_dense();
    const double hh = matmul(He.adjoint(), He).max_abs();
    const double d1 = completeness_defect(1e-3);
    const double d2 = completeness_defect(1e-4);
    CHECK(d1 == doctest::Approx(1e-6 * hh).epsilon(1e-10));
    CHECK(d2 == doctest::Approx(1e-8 * hh).epsilon(1e-8));

    // K_0 = 1 - i H_eff dt exactly
    const double dt = 1e-3;
    const std::vector<lrt::SparseOperator> ks = lrt::kraus_operators(m, dt);
    REQUIRE(ks.size() == 1 + m.jumps.size());
    CMat K0_expect(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < dim; ++j) K0_expect(i, j) = complex(0.0, -dt) * He(i, j);
        K0_expect(i, i) += 1.0;
    }
    CHECK(lrt::max_abs_diff(ks[0].to_dense(), K0_expect) < 1e-14);
    for (std::size_t s = 0; s < m.jumps.size(); ++s)
        CHECK(lrt::max_abs_diff(ks[s + 1].to_dense(),
                                m.jumps[s].to_dense() * complex(std::sqrt(dt), 0.0)) < 1e-14);
}

TEST_CASE("qubit decay generator matches the analytic Bloch equations") {
    // H = (omega/2) Z, jump sqrt(gamma) sigma_minus:
    //   d<sz>/dt = -gamma (1 + <sz>),  d<s+->/dt follows the rotating decay
    const double omega = 1.7, gamma = 0.6;
    CMat H = lrt::pauli_matrix(lrt::Pauli::Z) * complex(0.5 * omega, 0.0);
    CMat G = lrt::pauli_matrix(lrt::Pauli::Minus) * complex(std::sqrt(gamma), 0.0);
    const lrt::LindbladModel m = lrt::LindbladModel::build(
        lrt::SparseOperator::from_dense(H, 0.0), {lrt::SparseOperator::from_dense(G, 0.0)});

    CMat rho(2, 2);
    rho(0, 0) = 0.7;
    rho(1, 1) = 0.3;
    rho(0, 1) = complex(0.1, 0.05);
    rho(1, 0) = std::conj(rho(0, 1));

    const CMat L = lrt::apply_liouvillian_dense(m, rho);
    // populations: d rho_ee/dt = -gamma rho_ee (excited = index 0)
    CHECK(L(0, 0).real() == doctest::Approx(-gamma * 0.7).epsilon(1e-12));
    CHECK(L(1, 1).real() == doctest::Approx(gamma * 0.7).epsilon(1e-12));
    // coherence: (-i omega - gamma/2) rho_01
    const complex expect = (complex(0.0, -omega) - 0.5 * gamma) * rho(0, 1);
    CHECK(std::abs(L(0, 1) - expect) < 1e-12);
}
