#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lrt/cmat.hpp"
#include "lrt/kernels.hpp"
#include "lrt/numerics.hpp"

using lrt::CMat;
using lrt::complex;

namespace {

CMat random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    CMat A(rows, cols);
    for (std::size_t i = 0; i < rows * cols; ++i) A.data()[i] = complex(dist(rng), dist(rng));
    return A;
}

CMat random_hermitian(std::size_t n, std::mt19937_64& rng) {
    CMat A = random_matrix(n, n, rng);
    return (A + A.adjoint()) * complex(0.5, 0.0);
}

CMat naive_matmul(const CMat& A, const CMat& B) {
    CMat C(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < B.cols(); ++j) {
            complex s = 0.0;
            for (std::size_t k = 0; k < A.cols(); ++k) s += A(i, k) * B(k, j);
            C(i, j) = s;
        }
    return C;
}

CMat random_psd(std::size_t n, std::mt19937_64& rng, std::size_t rank = 0) {
    if (rank == 0) rank = n;
    const CMat G = random_matrix(n, rank, rng);
    const CMat A = naive_matmul(G, G.adjoint());
    return (A + A.adjoint()) * complex(0.5, 0.0);
}

}  // namespace

TEST_CASE("jacobi eigensolver reconstructs random Hermitian matrices") {
    std::mt19937_64 rng(7);
    for (std::size_t n : {1u, 2u, 3u, 5u, 8u, 17u, 30u}) {
        const CMat A = random_hermitian(n, rng);
        const lrt::EigenResult eig = lrt::hermitian_eigen(A);
        REQUIRE(eig.values.size() == n);

        for (std::size_t k = 0; k + 1 < n; ++k) CHECK(eig.values[k] >= eig.values[k + 1]);

        CMat D(n, n);
        for (std::size_t k = 0; k < n; ++k) D(k, k) = eig.values[k];
        const CMat recon = naive_matmul(naive_matmul(eig.vectors, D), eig.vectors.adjoint());
        CHECK(lrt::max_abs_diff(recon, A) < 1e-12 * std::max(1.0, A.max_abs()));

        const CMat gram = naive_matmul(eig.vectors.adjoint(), eig.vectors);
        CMat I(n, n);
        for (std::size_t k = 0; k < n; ++k) I(k, k) = 1.0;
        CHECK(lrt::max_abs_diff(gram, I) < 1e-13);
    }
}

TEST_CASE("jacobi eigensolver on known spectra") {
    CMat X(2, 2);
    X(0, 1) = 1.0;
    X(1, 0) = 1.0;
    const lrt::EigenResult eig = lrt::hermitian_eigen(X);
    CHECK(eig.values[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(eig.values[1] == doctest::Approx(-1.0).epsilon(1e-14));

    CMat D(3, 3);
    D(0, 0) = -2.0;
    D(1, 1) = 5.0;
    D(2, 2) = 1.0;
    const lrt::EigenResult ed = lrt::hermitian_eigen(D);
    CHECK(ed.values[0] == doctest::Approx(5.0));
    CHECK(ed.values[1] == doctest::Approx(1.0));
    CHECK(ed.values[2] == doctest::Approx(-2.0));
}

TEST_CASE("jacobi eigensolver rejects non-Hermitian input") {
    CMat A(2, 2);
    A(0, 1) = complex(0.0, 1.0);
    A(1, 0) = complex(0.0, 1.0);  // Hermitian would need -i here
    CHECK_THROWS(lrt::hermitian_eigen(A));
    CMat R(2, 3);
    CHECK_THROWS(lrt::hermitian_eigen(R));
}

TEST_CASE("filtered inverse eigenvalue endpoints") {
    const double lam_sq = 1e-4;
    const int q = 6;
    // exactly at the cutoff the filter passes half the signal
    CHECK(lrt::filtered_inverse_eigenvalue(lam_sq, lam_sq, q) ==
          doctest::Approx(0.5 / lam_sq).epsilon(1e-12));
    // far above: plain inverse
    CHECK(lrt::filtered_inverse_eigenvalue(1.0, lam_sq, q) ==
          doctest::Approx(1.0).epsilon(1e-12));
    // far below: suppressed as w^(q-1), not amplified
    const double w = 1e-8;
    const double expected = std::pow(w, q - 1) / std::pow(lam_sq, q);
    CHECK(lrt::filtered_inverse_eigenvalue(w, lam_sq, q) ==
          doctest::Approx(expected).epsilon(1e-9));
    CHECK(lrt::filtered_inverse_eigenvalue(0.0, lam_sq, q) == 0.0);
}

TEST_CASE("regularized pinv inverts well-conditioned PSD matrices") {
    std::mt19937_64 rng(11);
    const std::size_t n = 6;
    CMat A = random_psd(n, rng);
    CMat I(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        A(k, k) += 1.0;  // push the spectrum well above the filter cutoff
        I(k, k) = 1.0;
    }
    const CMat Ainv = lrt::regularized_pinv(A, lrt::PinvConfig{});
    CHECK(lrt::max_abs_diff(naive_matmul(A, Ainv), I) < 1e-9);
    CHECK(lrt::hermiticity_defect(Ainv) < 1e-12);
}

TEST_CASE("regularized pinv suppresses the null space instead of amplifying it") {
    std::mt19937_64 rng(13);
    const std::size_t n = 8, r = 3;
    const CMat A = random_psd(n, rng, r);
    const lrt::PinvConfig cfg;
    const CMat Ap = lrt::regularized_pinv(A, cfg);
    // A^+ A should act like the identity on the range of A: A A^+ A = A
    const CMat AAA = naive_matmul(A, naive_matmul(Ap, A));
    CHECK(lrt::max_abs_diff(AAA, A) < 1e-3 * std::max(1.0, A.max_abs()));
    // and the pinv must not blow up: its norm is bounded by ~1/(2 lambda)
    const lrt::EigenResult eig = lrt::hermitian_eigen(A);
    const double lam_sq = std::max(cfg.atol, cfg.rtol * eig.values[0]);
    double peak = 0.0;
    const lrt::EigenResult peig = lrt::hermitian_eigen(Ap);
    for (double w : peig.values) peak = std::max(peak, std::abs(w));
    CHECK(peak <= 1.0 / lam_sq);
}

TEST_CASE("regularized pinv rejects indefinite input") {
    CMat A(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = -1.0;
    CHECK_THROWS(lrt::regularized_pinv(A, lrt::PinvConfig{}));
}

TEST_CASE("matrix sqrt squares back to the input") {
    std::mt19937_64 rng(17);
    const CMat A = random_psd(5, rng);
    const CMat R = lrt::matrix_sqrt_psd(A);
    CHECK(lrt::max_abs_diff(naive_matmul(R, R), A) < 1e-11 * std::max(1.0, A.max_abs()));
    CHECK(lrt::hermiticity_defect(R) < 1e-12);
}

TEST_CASE("parallel kernels agree with reference bitwise at odd thread counts") {
#ifdef _OPENMP
    omp_set_num_threads(3);
#endif
    std::mt19937_64 rng(23);
    const std::size_t n = 517, m = 19;  // deliberately not multiples of the block size
    const CMat A = random_matrix(n, m, rng);
    const CMat X = random_matrix(m, m, rng);
    const CMat T = random_matrix(n, m, rng);

    CMat Yref(n, m), Yomp(n, m);
    lrt::kern::ref::matmul(A, X, Yref);
    lrt::kern::matmul(A, X, Yomp);
    CHECK(std::memcmp(Yref.data(), Yomp.data(), sizeof(complex) * n * m) == 0);
    CHECK(lrt::max_abs_diff(Yref, naive_matmul(A, X)) < 1e-12 * double(m));

    CMat Zref = T, Zomp = T;
    lrt::kern::ref::matmul_add(A, X, Zref, complex(0.7, -0.2));
    lrt::kern::matmul_add(A, X, Zomp, complex(0.7, -0.2));
    CHECK(std::memcmp(Zref.data(), Zomp.data(), sizeof(complex) * n * m) == 0);

    CMat Gref(m, m), Gomp(m, m);
    lrt::kern::ref::matmul_adjoint_left(A, T, Gref);
    lrt::kern::matmul_adjoint_left(A, T, Gomp);
    CHECK(std::memcmp(Gref.data(), Gomp.data(), sizeof(complex) * m * m) == 0);
    CHECK(lrt::max_abs_diff(Gref, naive_matmul(A.adjoint(), T)) < 1e-11 * double(n));
}

TEST_CASE("gram reduction is invariant under thread count") {
    std::mt19937_64 rng(29);
    const std::size_t n = 1531, m = 7;
    const CMat A = random_matrix(n, m, rng);
    const CMat B = random_matrix(n, m, rng);
    CMat G1(m, m);
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    lrt::kern::matmul_adjoint_left(A, B, G1);
    for (int threads : {2, 3, 5}) {
#ifdef _OPENMP
        omp_set_num_threads(threads);
#endif
        CMat Gk(m, m);
        lrt::kern::matmul_adjoint_left(A, B, Gk);
        CHECK(std::memcmp(G1.data(), Gk.data(), sizeof(complex) * m * m) == 0);
    }
}
