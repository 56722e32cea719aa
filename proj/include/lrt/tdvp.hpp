#ifndef LRT_TDVP_HPP
#define LRT_TDVP_HPP

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "lrt/lindblad.hpp"
#include "lrt/lowrank.hpp"
#include "lrt/ode.hpp"
#include "lrt/record.hpp"

namespace lrt {

struct SolverConfig {
    double t0 = 0.0;
    double t1 = 1.0;
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;

    std::size_t output_points = 101;    // evenly spaced samples on [t0, t1]
    std::vector<double> output_times;   // explicit sample times win when set

    // run is aborted once |Tr rho - 1| exceeds 10x this
    double trace_tol = 1e-8;
    // cached Gram is rebuilt when max|z^dag z - S| passes this (checked at
    // sample and checkpoint times)
    double gram_refresh_tol = 1e-8;

    bool record_chi_trace = true;
    std::size_t dense_limit = 4096;
    PinvConfig pinv;

    std::vector<double> sample_times() const;
};

// Side data from the most recent right-hand-side evaluation. The last stage
// of an accepted step is evaluated exactly at the accepted state, so after
// each accepted step these refer to the current state at zero extra cost.
struct EomDiagnostics {
    double chi_projected = 0.0;  // |Tr(S^-1 z^dag Ltilde)|, rank-growth measure
    double trace = 0.0;          // Tr(B S)
    double herm_defect = 0.0;    // of dB before symmetrization
};

// One equations-of-motion evaluation with fresh buffers; the convenient form
// for probes and tests (the stepper uses TdvpSystem below, which reuses
// workspaces). With the trace constraint,
//   dB = sym( (S^-1 L - Tr(S^-1 L)/M) S^-1 ),  L = z^dag Ltilde,
//   dz = (Ltilde - z S^-1 L) S^-1 B^+,
// all inverses filtered. Unconstrained evolution drops the Tr(S^-1 L)/M term.
struct EomResult {
    CMat dz;
    CMat dB;
    EomDiagnostics diag;
};
EomResult eval_eom(const LowRankState& st, const LindbladModel& model,
                   bool trace_constrained = true);

// Flattens (z, B) into the real vector the stepper integrates: interleaved
// re/im of z, then the upper triangle of B (diagonal entries real), which
// keeps B exactly Hermitian along the flow.
class TdvpSystem {
public:
    TdvpSystem(const LindbladModel& model, LowRankState state, bool trace_constrained = true);

    std::size_t packed_size() const;
    void pack(std::vector<double>& y) const;
    void unpack(const std::vector<double>& y);

    void rhs(double t, const std::vector<double>& y, std::vector<double>& dy);

    LowRankState& state() { return st_; }
    const LowRankState& state() const { return st_; }
    const EomDiagnostics& diag() const { return diag_; }
    const LindbladModel& model() const { return *model_; }

    // swap in a state of (possibly) different rank after a rank event
    void rebind(LowRankState st);

private:
    const LindbladModel* model_;
    LowRankState st_;
    bool trace_constrained_;
    EomDiagnostics diag_;
    LtildeWorkspace lws_;
    CMat Lt_, L_, SiL_, dB_, R_, T_, dz_, Bwork_;
};

void pack_state(const CMat& z, const CMat& B, std::vector<double>& y);
void unpack_state(const std::vector<double>& y, CMat& z, CMat& B);

// Fixed-rank integration between t0 and t1, sampling rows at the requested
// times (sampling is step-aligned: the stepper lands on each sample time).
RunRecord integrate(LowRankState& state, const LindbladModel& model, const SolverConfig& cfg,
                    const std::vector<Observable>& obs = {});

// Snapshot sufficient to resume a run bit-for-bit, including the step-size
// controller memory so a restart does not re-shrink the step.
struct Checkpoint {
    double t = 0.0;
    LowRankState state;
    double h_suggest = 0.0;
    double error_memory = 0.0;
};
void write_checkpoint(std::ostream& os, const Checkpoint& cp);
Checkpoint read_checkpoint(std::istream& is, const PinvConfig& pinv);

}  // namespace lrt

#endif
