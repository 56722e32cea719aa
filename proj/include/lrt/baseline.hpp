#ifndef LRT_BASELINE_HPP
#define LRT_BASELINE_HPP

#include <string>

#include "lrt/lindblad.hpp"
#include "lrt/lowrank.hpp"
#include "lrt/record.hpp"
#include "lrt/tdvp.hpp"

namespace lrt {

// One step of the ensemble-truncation scheme: propagate the factor
// C = z sqrt(B) through the first-order Kraus set, T = [K_0 C | K_1 C | ...],
// diagonalize T^dag T and keep the dominant eigenpairs. The kept rank is the
// smallest M' whose discarded mass stays below eps_max (optionally forced).
struct TruncationStepResult {
    double discarded = 0.0;
    std::size_t rank = 0;
};
TruncationStepResult truncation_step(LowRankState& st, const LindbladModel& model, double dt,
                                     double eps_max, std::size_t forced_rank = 0,
                                     std::size_t M_max = 0, bool renormalize = true);

// Fixed-step driver around truncation_step, sampling rows like the other
// engines. The chi column reports the per-step discarded mass.
RunRecord run_truncation(LowRankState& state, const LindbladModel& model,
                         const SolverConfig& cfg, double dt, double eps_max,
                         std::size_t M_min = 1, std::size_t M_max = 0,
                         const std::vector<Observable>& obs = {});

// Checks that one trace-unconstrained variational Euler step and one
// (un-renormalized, fixed-rank) truncation step agree to second order in dt:
// computes the Frobenius distance for each dt and fits the log-log slope.
struct EquivalenceReport {
    bool skipped = false;
    std::string reason;
    std::vector<double> dts;
    std::vector<double> distances;
    double slope = 0.0;
};
EquivalenceReport equivalence_probe(const LowRankState& st, const LindbladModel& model,
                                    const std::vector<double>& dts,
                                    double degeneracy_tol = 1e-6);

}  // namespace lrt

#endif
