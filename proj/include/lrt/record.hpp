#ifndef LRT_RECORD_HPP
#define LRT_RECORD_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "lrt/cmat.hpp"
#include "lrt/lowrank.hpp"
#include "lrt/sparse.hpp"

namespace lrt {

// An observable is an operator product <ops[0] ops[1] ...> post-processed as
//   linear : scale * Re<...> + shift
//   sqrt_of: sqrt(max(0, scale * Re<...> + shift))
//   ratio  : Re<chain> / Re<denom_chain>, NaN when the denominator vanishes
// Products are kept factorized so tensor-product kernels over many modes
// never have to be materialized on the full space.
struct Observable {
    enum class Kind { linear, sqrt_of, ratio };
    std::string name;
    Kind kind = Kind::linear;
    std::vector<SparseOperator> chain;
    std::vector<SparseOperator> denom_chain;
    double scale = 1.0;
    double shift = 0.0;
    double den_floor = 1e-12;  // ratio reads NaN below this
};

double eval_observable(const Observable& o, const LowRankState& st);
double eval_observable_dense(const Observable& o, const CMat& rho);

struct RankEvent {
    enum class Kind { inflate, deflate, rewind, blocked };
    double t = 0.0;
    Kind kind = Kind::inflate;
    std::size_t M_before = 0;
    std::size_t M_after = 0;
    double chi = 0.0;
    double discarded = 0.0;
};
const char* to_string(RankEvent::Kind k);

// Everything a single integration produces: sampled observable rows, the
// per-accepted-step error-measure trace, rank events and run counters.
struct RunRecord {
    std::vector<std::string> obs_names;

    struct Row {
        double t = 0.0;
        std::size_t rank = 0;
        double chi = 0.0;
        double trace_dev = 0.0;
        double entropy = 0.0;
        std::vector<double> obs;
    };
    std::vector<Row> rows;

    struct ChiSample {
        double t = 0.0;
        std::size_t rank = 0;
        double chi = 0.0;
    };
    std::vector<ChiSample> chi_trace;

    std::vector<RankEvent> events;

    int status = 0;  // 0 = completed; anything else aborted, see message
    std::string message;

    std::size_t peak_rank = 0;
    std::size_t n_rhs = 0;
    std::size_t n_accept = 0;
    std::size_t n_reject = 0;
    std::size_t n_gram_refresh = 0;
    std::size_t n_rewinds = 0;
    double max_gram_drift = 0.0;  // worst cached-Gram error seen at refresh points
    double discarded_total = 0.0;
    double wall_seconds = 0.0;
    std::size_t peak_state_bytes = 0;

    void write_csv(std::ostream& os) const;
    void write_events_csv(std::ostream& os) const;
    void write_chi_csv(std::ostream& os) const;
};

// Parse a CSV produced by write_csv (used by the comparison tool).
RunRecord read_record_csv(std::istream& is);

// Value of a named observable in the last sampled row.
double final_observable(const RunRecord& rec, const std::string& name);

// Row assembly shared by the fixed-rank and adaptive drivers.
RunRecord::Row make_row(double t, const LowRankState& st, double chi,
                        const std::vector<Observable>& obs);

}  // namespace lrt

#endif
