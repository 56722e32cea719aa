#ifndef LRT_MODELS_HPP
#define LRT_MODELS_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "lrt/hilbert.hpp"
#include "lrt/lindblad.hpp"
#include "lrt/lowrank.hpp"
#include "lrt/record.hpp"

namespace lrt {

// A ready-to-run benchmark system: generator, initial states (factorized and,
// when affordable, dense), and the observables a run of it should record.
struct ModelBundle {
    LindbladModel model;
    LowRankState init;
    std::vector<complex> psi0;  // all benchmark runs start from a pure state
    std::vector<Observable> observables;
    std::vector<std::size_t> factor_dims;
    double t_end_hint = 0.0;  // gate duration for the cat model, 0 elsewhere

    // |psi0><psi0| for the full-space engine; refuses huge dimensions
    CMat dense_initial(std::size_t dense_limit = 4096) const;
};

// Spin-1/2 lattice on an open Lx x Ly grid with local decay,
//   H = sum_<ij> (Jx XiXj + Jy YiYj + Jz ZiZj) + sum_j (hz Zj + hx Xj),
// jumps sqrt(gamma) sigma^-_j. The transverse-field Ising benchmark is the
// Jx = Jy = 0, hx > 0 special case. The initial frame is the all-down state
// plus its nearest flips (by Hamming distance), carrying weight on all-down.
struct SpinLatticeParams {
    std::size_t Lx = 2, Ly = 2;
    double Jx = 0.0, Jy = 0.0, Jz = 1.0;
    double hx = 0.0, hz = 0.0;
    double gamma = 1.0;
    std::size_t M0 = 0;  // initial basis size; 0 means N + 1
};
ModelBundle build_spin_lattice(const SpinLatticeParams& p, const PinvConfig& pinv = {});

// {M_y, DeltaM_y, S_xx, M_z}: mean y magnetization, the square root of the
// unnormalized y structure factor (1/N^2) sum_ij <Yi Yj>, the two-point x
// correlator averaged over distinct pairs, and the mean z magnetization.
std::vector<Observable> spin_observables(std::size_t n_sites);

// Array of quadratically driven Kerr cavities with all-to-all hopping,
//   H = sum_j [ -Delta n_j + (U/2) n_j(n_j-1) + (G/2)(adag_j^2 + a_j^2) ]
//       - J sum_{j<k} (adag_j a_k + h.c.),
// with one- and two-photon losses sqrt(gamma) a_j, sqrt(eta) a_j^2 on every
// mode. Starts from the vacuum with a per-mode Fock-ladder frame.
struct FafParams {
    std::size_t n_modes = 2;  // 2 or 3
    double Delta = -10.0, U = 10.0, J = -10.0;
    double G = 1.0;
    double gamma = 1.0, eta = 1.0;
    std::size_t M_pm = 2;  // ladder states per mode; total rank M_pm^n_modes
    std::size_t n_cut = 0;  // 0 means max{10, ceil(5 G / sqrt(U^2 + eta^2))}
};
ModelBundle build_faf(const FafParams& p, const PinvConfig& pinv = {});

// <adag_i a_j> / <adag_i a_i> between two modes of a bosonic array; reads NaN
// when the reference mode holds fewer than 1e-10 photons.
Observable g1_observable(const std::vector<std::size_t>& dims, std::size_t i, std::size_t j);

// Parity-sector kernel operators of the two-photon dissipator D[a^2 - alpha^2]:
// exact even/odd projectors plus the cross blocks that read out the encoded
// phase, J_pm = A_alpha sum_q a_q J_pm^(q) truncated at |q| <= q_max.
struct CatKernelOps {
    SparseOperator J_pp, J_mm, J_pm, J_mp;
    double tail_ratio = 0.0;  // |a_{-q_max}| / |a_0|, the series remainder proxy
};
CatKernelOps cat_kernel_operators(double alpha_sq, std::size_t n_cut, int q_max = 15);

// I_q(x) by the ascending series; q >= 0, x >= 0.
double modified_bessel_i(int q, double x);

// Normalized even (parity = +1) or odd (parity = -1) cat state
// (|alpha> + parity |-alpha>) in a truncated Fock space.
std::vector<complex> cat_state(std::size_t cutoff, double alpha, int parity);

// N-qubit Z-rotation gate on dissipatively stabilized cat qubits:
//   jumps sqrt(kappa2) (a_i^2 - alpha^2) and sqrt(kappa1) a_i per mode,
//   H = eps (a1 + h.c.) / eps (a1 adag2 + h.c.) / eps (a1 a2 adag3 + h.c.),
// run for T = pi / (4 alpha^N eps) (stored in t_end_hint). The per-mode frame
// is a Gram-Schmidt ladder over {|alpha>, |-alpha>, adag|alpha>, ...}; the
// initial state is all qubits |C_alpha^+> (phase-flip probe) or all |alpha>
// (bit-flip probe). Records P_Z = <prod J_pp> and P_X = 1 - <prod sgn(x)>
// with sgn(x) read through the kernel cross blocks J_pm + J_mp.
enum class CatGate { Z, ZZ, ZZZ };
enum class CatInit { cat_plus, coherent };
struct CatGateParams {
    CatGate gate = CatGate::Z;
    double alpha_sq = 4.0;
    double kappa1 = 1e-3, kappa2 = 1.0;
    double epsilon = 0.05;
    std::size_t M_pm = 3;
    std::size_t n_cut = 0;  // 0 means max{20, ceil(4.5 alpha_sq)}
    int q_max = 15;
    CatInit init = CatInit::cat_plus;
};
ModelBundle build_cat_gate(const CatGateParams& p, const PinvConfig& pinv = {});

// Final-time error probabilities from the two complementary gate runs.
std::pair<double, double> gate_error_probabilities(const RunRecord& phase_run,
                                                   const RunRecord& bit_run);

}  // namespace lrt

#endif
