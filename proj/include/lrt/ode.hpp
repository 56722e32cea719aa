#ifndef LRT_ODE_HPP
#define LRT_ODE_HPP

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace lrt {

struct OdeConfig {
    double abs_tol = 1e-9;
    double rel_tol = 1e-7;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 = pick automatically
    double safety = 0.9;
    double fac_min = 0.2;
    double fac_max = 10.0;
};

enum class StepStatus {
    ok,         // accepted a step strictly inside (t, t_limit)
    hit_limit,  // accepted a step that landed exactly on t_limit
    underflow   // step size shrank below the representable minimum
};

// Embedded Dormand-Prince 5(4) pair with the first-same-as-last property and
// a PI step-size controller. Drivers call advance() one accepted step at a
// time, which keeps rewind/retry logic (checkpointed rank adaptation) outside
// the stepper.
class AdaptiveStepper {
public:
    using Rhs = std::function<void(double, const std::vector<double>&, std::vector<double>&)>;

    struct Stats {
        std::size_t n_rhs = 0;
        std::size_t n_accept = 0;
        std::size_t n_reject = 0;
    };

    AdaptiveStepper(Rhs rhs, OdeConfig cfg);

    // (Re)initialize at (t, y); forgets FSAL and controller memory unless a
    // step suggestion is passed in (used when restoring a checkpoint).
    void reset(double t, std::vector<double> y, double h_suggest = 0.0, double error_memory = 0.0);

    // Advance by exactly one accepted step, clipped so t never passes t_limit.
    StepStatus advance(double t_limit);

    double t() const { return t_; }
    const std::vector<double>& y() const { return y_; }
    // derivative at (t, y); valid after the first advance or rhs priming
    const std::vector<double>& derivative() const { return k_[0]; }

    double suggested_step() const { return h_sugg_; }
    double error_memory() const { return err_old_; }
    // force re-evaluation of the cached endpoint derivative; required after
    // anything that changes the right-hand side under the stepper (Gram
    // refresh, in-place state edits)
    void invalidate_derivative() { fsal_valid_ = false; }
    const Stats& stats() const { return stats_; }
    const OdeConfig& config() const { return cfg_; }

private:
    void eval(double t, const std::vector<double>& y, std::vector<double>& dy);
    double initial_step_guess(double t_limit);

    Rhs rhs_;
    OdeConfig cfg_;
    double t_ = 0.0;
    std::vector<double> y_;
    std::vector<double> ynew_, ytmp_, yerr_;
    std::vector<double> k_[7];
    bool fsal_valid_ = false;
    double h_sugg_ = 0.0;
    double err_old_ = 1e-4;
    Stats stats_;
};

}  // namespace lrt

#endif
