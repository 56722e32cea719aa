#ifndef LRT_RANK_ADAPT_HPP
#define LRT_RANK_ADAPT_HPP

#include <cstdint>
#include <random>

#include "lrt/lindblad.hpp"
#include "lrt/lowrank.hpp"
#include "lrt/record.hpp"
#include "lrt/tdvp.hpp"

namespace lrt {

// Rank-growth error measures, cheapest last:
//   residual_norm     ||d rho/dt - L(rho)||_F, the full variational residual
//   projected_trace   |Tr(S^-1 z^dag L(rho) z)|, a free by-product of the EOM
//   probability_ratio p_M / p_1 of the current spectrum (0 when M = 1)
enum class ChiVariant { residual_norm, projected_trace, probability_ratio };

// How the fresh basis state is picked when the rank is inflated. The default
// takes the dominant left singular direction of the out-of-span block
// (1 - P) L(rho) z; the alternative draws a random direction, orthogonalized
// against the current frame.
enum class InflationRule { leakage_svd, random_orthogonal };

struct RankPolicy {
    ChiVariant variant = ChiVariant::projected_trace;
    InflationRule rule = InflationRule::leakage_svd;
    double eps_max = 1e-4;
    double eps_min = 0.0;       // 0 disables deflation
    std::size_t M_min = 1;
    std::size_t M_max = 0;      // 0 = Hilbert-space dimension
    double checkpoint_dt = 0.0; // > 0: rewind-and-retry, keeps chi <= eps_max
                                // on the recorded trajectory; 0: inflate in place
    int retry_budget = 32;      // inflations per crossing before giving up; a
                                // cold start may need many (rank grows by one
                                // per retry until chi falls below eps_max)
    int hysteresis_steps = 1;   // accepted steps to wait after an in-place
                                // rank event (ignored when rewinding: there
                                // the measure must be enforced on every step)
    std::uint64_t seed = 1;
};

double chi_projected_trace(const LowRankState& st, const LindbladModel& model);
double chi_residual_norm(const LowRankState& st, const LindbladModel& model,
                         bool trace_constrained = true);
double chi_probability_ratio(const LowRankState& st);
double eval_chi(ChiVariant v, const LowRankState& st, const LindbladModel& model);

// Append one column to the frame (new state enters with zero population).
// Falls back to a random direction when the leakage block vanishes.
void inflate(LowRankState& st, const LindbladModel& model, InflationRule rule,
             std::mt19937_64& rng);

struct DeflationResult {
    bool performed = false;
    double discarded = 0.0;
    std::size_t new_rank = 0;
};
// Rotate to natural states and drop the least occupied one; the remaining
// populations are renormalized to unit trace. Refuses to go below M_min or
// below the number of numerically nonzero eigenvalues.
DeflationResult deflate(LowRankState& st, std::size_t M_min);

// Adaptive-rank integration: fixed-rank stepping between rank events, with
// the event policy supplied by `policy`.
RunRecord supervise(LowRankState& state, const LindbladModel& model, const SolverConfig& cfg,
                    const RankPolicy& policy, const std::vector<Observable>& obs = {});

}  // namespace lrt

#endif
