#include "lrt/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "lrt/kernels.hpp"

namespace lrt {

namespace {

double offdiag_norm(const CMat& A) {
    double s = 0.0;
    for (std::size_t p = 0; p < A.rows(); ++p)
        for (std::size_t q = p + 1; q < A.cols(); ++q) s += std::norm(A(p, q));
    return std::sqrt(2.0 * s);
}

// One complex Jacobi rotation zeroing A(p,q). The 2x2 unitary is
//   [ c        s*u ]
//   [ -s*conj(u) c ]
// with u the phase of A(p,q) and (c, s) the classic symmetric-Jacobi pair
// for the modulus. Applied as A <- G^dag A G, V <- V G.
void jacobi_rotate(CMat& A, CMat& V, std::size_t p, std::size_t q) {
    const complex apq = A(p, q);
    const double m = std::abs(apq);
    if (m == 0.0) return;
    const complex u = apq / m;
    const double tau = (A(q, q).real() - A(p, p).real()) / (2.0 * m);
    double t;
    if (tau >= 0.0)
        t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
    else
        t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const std::size_t n = A.rows();

    const complex su = s * u;
    const complex suc = s * std::conj(u);
    for (std::size_t k = 0; k < n; ++k) {  // columns p, q
        const complex akp = A(k, p), akq = A(k, q);
        A(k, p) = c * akp - suc * akq;
        A(k, q) = su * akp + c * akq;
    }
    for (std::size_t k = 0; k < n; ++k) {  // rows p, q
        const complex apk = A(p, k), aqk = A(q, k);
        A(p, k) = c * apk - su * aqk;
        A(q, k) = suc * apk + c * aqk;
    }
    A(p, q) = 0.0;
    A(q, p) = 0.0;
    A(p, p) = complex(A(p, p).real(), 0.0);
    A(q, q) = complex(A(q, q).real(), 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const complex vkp = V(k, p), vkq = V(k, q);
        V(k, p) = c * vkp - suc * vkq;
        V(k, q) = su * vkp + c * vkq;
    }
}

}  // namespace

EigenResult hermitian_eigen(const CMat& A, double herm_tol) {
    if (A.rows() != A.cols()) throw std::invalid_argument("hermitian_eigen: matrix not square");
    const std::size_t n = A.rows();
    const double defect = hermiticity_defect(A);
    if (defect > herm_tol * std::max(1.0, A.max_abs())) {
        std::ostringstream os;
        os << "hermitian_eigen: Hermiticity defect " << defect << " exceeds tolerance";
        throw std::invalid_argument(os.str());
    }

    CMat W = A;
    symmetrize_hermitian(W);
    CMat V = CMat::identity(n);

    const double scale = std::max(W.frobenius_norm(), 1e-300);
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (offdiag_norm(W) <= 1e-14 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(W(p, q)) > 1e-300) jacobi_rotate(W, V, p, q);
    }

    EigenResult res;
    res.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.values[i] = W(i, i).real();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return res.values[a] > res.values[b]; });

    EigenResult sorted;
    sorted.values.resize(n);
    sorted.vectors.resize(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        sorted.values[j] = res.values[order[j]];
        for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, j) = V(i, order[j]);
    }
    return sorted;
}

double filtered_inverse_eigenvalue(double w, double lambda_sq, int q) {
    if (w <= 0.0) return 0.0;
    const double r = lambda_sq / w;
    const double denom = w * (1.0 + std::pow(r, q));
    if (!std::isfinite(denom)) return 0.0;
    return 1.0 / denom;
}

CMat regularized_pinv(const EigenResult& eig, const PinvConfig& cfg) {
    const std::size_t n = eig.values.size();
    double wmax = 0.0;
    for (double w : eig.values) {
        if (w < -cfg.atol && !cfg.tolerate_indefinite) {
            std::ostringstream os;
            os << "regularized_pinv: eigenvalue " << w << " below -atol, input not PSD";
            throw std::invalid_argument(os.str());
        }
        wmax = std::max(wmax, std::abs(w));
    }
    const double lambda_sq = std::max(cfg.atol, cfg.rtol * wmax);

    // V diag(g) V^dag with g the filtered inverse spectrum; negative
    // eigenvalues (only reachable with tolerate_indefinite) go through the
    // same filter as an odd function, so the map stays smooth across zero
    CMat T(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = eig.values[j];
        double g;
        if (cfg.tolerate_indefinite)
            g = std::copysign(
                filtered_inverse_eigenvalue(std::abs(w), lambda_sq, cfg.filter_exponent), w);
        else
            g = filtered_inverse_eigenvalue(std::max(w, 0.0), lambda_sq, cfg.filter_exponent);
        for (std::size_t i = 0; i < n; ++i) T(i, j) = eig.vectors(i, j) * g;
    }
    CMat Vad = eig.vectors.adjoint();
    CMat R(n, n);
    kern::matmul(T, Vad, R);
    symmetrize_hermitian(R);
    return R;
}

CMat regularized_pinv(const CMat& A, const PinvConfig& cfg) {
    if (cfg.atol <= 0.0 || cfg.rtol < 0.0 || cfg.filter_exponent < 1)
        throw std::invalid_argument("regularized_pinv: bad filter configuration");
    return regularized_pinv(hermitian_eigen(A), cfg);
}

CMat matrix_sqrt_psd(const CMat& A, double psd_tol) {
    EigenResult eig = hermitian_eigen(A);
    const std::size_t n = eig.values.size();
    const double wmax = n ? std::max(eig.values.front(), 0.0) : 0.0;
    for (double w : eig.values) {
        if (w < -psd_tol * std::max(wmax, 1.0)) {
            std::ostringstream os;
            os << "matrix_sqrt_psd: eigenvalue " << w << " too negative for a PSD input";
            throw std::invalid_argument(os.str());
        }
    }
    CMat T(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const double s = std::sqrt(std::max(eig.values[j], 0.0));
        for (std::size_t i = 0; i < n; ++i) T(i, j) = eig.vectors(i, j) * s;
    }
    CMat Vad = eig.vectors.adjoint();
    CMat R(n, n);
    kern::matmul(T, Vad, R);
    symmetrize_hermitian(R);
    return R;
}

}  // namespace lrt
