#ifndef LRT_LINDBLAD_HPP
#define LRT_LINDBLAD_HPP

#include <cstddef>
#include <vector>

#include "lrt/cmat.hpp"
#include "lrt/sparse.hpp"

namespace lrt {

// Master-equation generator in hbar = 1 units,
//   d rho / dt = -i[H, rho] + sum_s ( G_s rho G_s^dag - 1/2 {G_s^dag G_s, rho} )
// with the rate factors folded into the jump operators G_s. The non-Hermitian
// drift H_eff = H - (i/2) sum_s G_s^dag G_s is precomputed once.
struct LindbladModel {
    SparseOperator H;
    std::vector<SparseOperator> jumps;
    SparseOperator H_eff;
    std::size_t dim = 0;

    static LindbladModel build(SparseOperator H, std::vector<SparseOperator> jumps,
                               double herm_tol = 1e-10);
};

// Scratch buffers for apply_Ltilde; sized lazily so one workspace can be
// reused across rank changes.
struct LtildeWorkspace {
    CMat P0, P1, Q, W, T;
};

// Ltilde = L(rho) z for rho = z B z^dag, assembled right-to-left so no
// dim x dim intermediate is ever formed:
//   Ltilde = -i (H_eff z B) S + i z [ (H_eff z B)^dag z ] + sum_s (G_s z) B [ (G_s z)^dag z ]
// S must be the cached Gram matrix consistent with the equations of motion.
void apply_Ltilde(const LindbladModel& model, const CMat& z, const CMat& B, const CMat& S,
                  CMat& Lt, LtildeWorkspace& ws);

// Dense generator action, valid for arbitrary (not necessarily Hermitian)
// inputs; the full-space reference the low-rank kernel is checked against.
void apply_liouvillian_dense(const LindbladModel& model, const CMat& rho, CMat& out);
CMat apply_liouvillian_dense(const LindbladModel& model, const CMat& rho);

// First-order Kraus factors of the channel rho -> rho + L(rho) dt:
// K_0 = 1 - i H_eff dt, K_s = sqrt(dt) G_s. Completeness holds up to O(dt^2).
std::vector<SparseOperator> kraus_operators(const LindbladModel& model, double dt);

}  // namespace lrt

#endif
