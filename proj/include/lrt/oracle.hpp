#ifndef LRT_ORACLE_HPP
#define LRT_ORACLE_HPP

#include "lrt/lindblad.hpp"
#include "lrt/record.hpp"
#include "lrt/tdvp.hpp"

namespace lrt {

// Full-space reference integration of the master equation with the same
// adaptive stepper the low-rank engine uses. Exact up to integrator
// tolerance; memory and time scale with dim^2, so this is the ground truth
// for small systems, not a production path.
RunRecord integrate_dense(CMat& rho, const LindbladModel& model, const SolverConfig& cfg,
                          const std::vector<Observable>& obs = {});

// March forward until ||L(rho)||_F falls below tol (checked every `window`
// of time) or t_max is reached.
struct SteadyStateResult {
    CMat rho;
    double t_reached = 0.0;
    double residual = 0.0;
    bool converged = false;
};
SteadyStateResult steady_state_by_integration(const LindbladModel& model, CMat rho0,
                                              const SolverConfig& cfg, double tol, double t_max,
                                              double window = 1.0);

}  // namespace lrt

#endif
