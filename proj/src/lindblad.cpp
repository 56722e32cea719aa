#include "lrt/lindblad.hpp"

#include <sstream>
#include <stdexcept>

#include "lrt/kernels.hpp"

namespace lrt {

LindbladModel LindbladModel::build(SparseOperator H, std::vector<SparseOperator> jumps,
                                   double herm_tol) {
    LindbladModel m;
    m.dim = H.dim();
    const double defect = H.hermiticity_defect();
    if (defect > herm_tol) {
        std::ostringstream os;
        os << "LindbladModel: Hamiltonian Hermiticity defect " << defect;
        throw std::invalid_argument(os.str());
    }
    for (const SparseOperator& g : jumps)
        if (g.dim() != m.dim)
            throw std::invalid_argument("LindbladModel: jump operator dimension mismatch");

    m.H_eff = H;
    for (const SparseOperator& g : jumps)
        m.H_eff = m.H_eff + (g.adjoint() * g).scaled(complex(0.0, -0.5));
    m.H = std::move(H);
    m.jumps = std::move(jumps);
    return m;
}

void apply_Ltilde(const LindbladModel& model, const CMat& z, const CMat& B, const CMat& S,
                  CMat& Lt, LtildeWorkspace& ws) {
    const std::size_t N = z.rows(), M = z.cols();
    if (B.rows() != M || B.cols() != M || S.rows() != M || S.cols() != M)
        throw std::invalid_argument("apply_Ltilde: block size mismatch");
    if (model.dim != N) throw std::invalid_argument("apply_Ltilde: dimension mismatch");
    if (Lt.rows() != N || Lt.cols() != M) Lt.resize(N, M);

    const complex i_unit(0.0, 1.0);

    ws.P0.resize(N, M);
    kern::matmul(z, B, ws.P0);      // z B
    model.H_eff.apply(ws.P0, ws.P1);  // H_eff z B

    Lt.set_zero();
    kern::matmul_add(ws.P1, S, Lt, -i_unit);

    ws.W.resize(M, M);
    kern::matmul_adjoint_left(ws.P1, z, ws.W);  // (H_eff z B)^dag z
    kern::matmul_add(z, ws.W, Lt, i_unit);

    ws.T.resize(M, M);
    for (const SparseOperator& g : model.jumps) {
        g.apply(z, ws.Q);                           // G z
        kern::matmul_adjoint_left(ws.Q, z, ws.W);   // (G z)^dag z
        kern::matmul(B, ws.W, ws.T);
        kern::matmul_add(ws.Q, ws.T, Lt, 1.0);
    }
}

void apply_liouvillian_dense(const LindbladModel& model, const CMat& rho, CMat& out) {
    const std::size_t N = model.dim;
    if (rho.rows() != N || rho.cols() != N)
        throw std::invalid_argument("apply_liouvillian_dense: shape mismatch");
    const complex i_unit(0.0, 1.0);

    CMat adj = rho.adjoint();
    CMat tmp(N, N);

    // -i H_eff rho + i rho H_eff^dag, with rho H_eff^dag = (H_eff rho^dag)^dag
    model.H_eff.apply(rho, tmp);
    out = tmp;
    out *= -i_unit;
    model.H_eff.apply(adj, tmp);
    CMat tadj = tmp.adjoint();
    tadj *= i_unit;
    out += tadj;

    // G rho G^dag = G ( (G rho^dag)^dag )
    for (const SparseOperator& g : model.jumps) {
        g.apply(adj, tmp);
        CMat mid = tmp.adjoint();
        g.apply(mid, tmp);
        out += tmp;
    }
}

CMat apply_liouvillian_dense(const LindbladModel& model, const CMat& rho) {
    CMat out(model.dim, model.dim);
    apply_liouvillian_dense(model, rho, out);
    return out;
}

std::vector<SparseOperator> kraus_operators(const LindbladModel& model, double dt) {
    if (dt <= 0.0) throw std::invalid_argument("kraus_operators: dt must be positive");
    std::vector<SparseOperator> K;
    K.reserve(model.jumps.size() + 1);
    K.push_back(SparseOperator::identity(model.dim) +
                model.H_eff.scaled(complex(0.0, -dt)));
    const double r = std::sqrt(dt);
    for (const SparseOperator& g : model.jumps) K.push_back(g.scaled(r));
    return K;
}

}  // namespace lrt
