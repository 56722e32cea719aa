#ifndef LRT_NUMERICS_HPP
#define LRT_NUMERICS_HPP

#include <cstddef>
#include <vector>

#include "lrt/cmat.hpp"

namespace lrt {

// Spectral-filter regularization used whenever a Gram or weight matrix has to
// be inverted. Eigenvalues w of the Hermitian PSD input are mapped to
// f(w)/w with f(w) = 1 / (1 + (lambda^2/w)^q), lambda^2 = max(atol, rtol*w_max),
// which interpolates smoothly between 1/w for w >> lambda^2 and ~w^(q-1)
// suppression below the cutoff.
struct PinvConfig {
    double atol = 1e-6;
    double rtol = 1e-5;
    int filter_exponent = 6;
    // Accept eigenvalues below -atol and filter them with the sign carried
    // through instead of throwing. Needed wherever the inverse is evaluated
    // at trial states of the stepper, which may leave the PSD cone; the step
    // controller rejects those steps, the inverse just has to stay finite
    // and smooth.
    bool tolerate_indefinite = false;
};

struct EigenResult {
    std::vector<double> values;  // descending
    CMat vectors;                // columns are eigenvectors, unitary
};

// Cyclic-Jacobi eigensolver for Hermitian matrices. Throws if the input is
// not square or its Hermiticity defect exceeds herm_tol * max(1, max|A|).
EigenResult hermitian_eigen(const CMat& A, double herm_tol = 1e-10);

// Filtered pseudoinverse of a Hermitian PSD matrix. Eigenvalues in
// [-atol, 0) are clamped to zero (roundoff negatives); anything below -atol
// is rejected as a genuinely indefinite input.
CMat regularized_pinv(const CMat& A, const PinvConfig& cfg);

// Same filter evaluated on a precomputed eigensystem.
CMat regularized_pinv(const EigenResult& eig, const PinvConfig& cfg);

// Principal square root of a Hermitian PSD matrix; negative roundoff
// eigenvalues down to -psd_tol * max eigenvalue are clamped to zero.
CMat matrix_sqrt_psd(const CMat& A, double psd_tol = 1e-10);

// f(w)/w in the numerically stable form w^(q-1) / (w^q + lambda^(2q)).
double filtered_inverse_eigenvalue(double w, double lambda_sq, int q);

}  // namespace lrt

#endif
