#include "lrt/record.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lrt/textio.hpp"

namespace lrt {

namespace {

complex dense_chain_trace(const std::vector<SparseOperator>& ops, const CMat& rho) {
    if (ops.empty()) throw std::invalid_argument("observable: empty operator chain");
    CMat w = rho;
    CMat tmp;
    for (std::size_t k = ops.size(); k-- > 0;) {
        ops[k].apply(w, tmp);
        std::swap(w, tmp);
    }
    return w.trace();
}

double finish(const Observable& o, double num, double den, bool is_ratio) {
    if (is_ratio) {
        if (std::abs(den) < o.den_floor) return std::numeric_limits<double>::quiet_NaN();
        return num / den;
    }
    const double v = o.scale * num + o.shift;
    if (o.kind == Observable::Kind::sqrt_of) return std::sqrt(std::max(0.0, v));
    return v;
}

}  // namespace

double eval_observable(const Observable& o, const LowRankState& st) {
    const double num = expectation_chain(st, o.chain).real();
    double den = 0.0;
    if (o.kind == Observable::Kind::ratio) den = expectation_chain(st, o.denom_chain).real();
    return finish(o, num, den, o.kind == Observable::Kind::ratio);
}

double eval_observable_dense(const Observable& o, const CMat& rho) {
    const double num = dense_chain_trace(o.chain, rho).real();
    double den = 0.0;
    if (o.kind == Observable::Kind::ratio) den = dense_chain_trace(o.denom_chain, rho).real();
    return finish(o, num, den, o.kind == Observable::Kind::ratio);
}

const char* to_string(RankEvent::Kind k) {
    switch (k) {
        case RankEvent::Kind::inflate: return "inflate";
        case RankEvent::Kind::deflate: return "deflate";
        case RankEvent::Kind::rewind: return "rewind";
        case RankEvent::Kind::blocked: return "blocked";
    }
    return "?";
}

RunRecord::Row make_row(double t, const LowRankState& st, double chi,
                        const std::vector<Observable>& obs) {
    RunRecord::Row row;
    row.t = t;
    row.rank = st.rank();
    row.chi = chi;
    row.trace_dev = std::abs(st.trace() - 1.0);
    row.entropy = von_neumann_entropy(st);
    row.obs.reserve(obs.size());
    for (const Observable& o : obs) row.obs.push_back(eval_observable(o, st));
    return row;
}

void RunRecord::write_csv(std::ostream& os) const {
    os << "t,rank,chi,trace_dev,entropy";
    for (const std::string& n : obs_names) os << ',' << n;
    os << '\n';
    for (const Row& r : rows) {
        os << fmt17(r.t) << ',' << r.rank << ',' << fmt17(r.chi) << ',' << fmt17(r.trace_dev)
           << ',' << fmt17(r.entropy);
        for (double v : r.obs) os << ',' << fmt17(v);
        os << '\n';
    }
}

void RunRecord::write_events_csv(std::ostream& os) const {
    os << "t,event,M_before,M_after,chi,discarded_mass\n";
    for (const RankEvent& e : events)
        os << fmt17(e.t) << ',' << to_string(e.kind) << ',' << e.M_before << ',' << e.M_after
           << ',' << fmt17(e.chi) << ',' << fmt17(e.discarded) << '\n';
}

void RunRecord::write_chi_csv(std::ostream& os) const {
    os << "t,rank,chi\n";
    for (const ChiSample& s : chi_trace)
        os << fmt17(s.t) << ',' << s.rank << ',' << fmt17(s.chi) << '\n';
}

RunRecord read_record_csv(std::istream& is) {
    RunRecord rec;
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("record csv: empty file");
    {
        std::istringstream hs(line);
        std::string field;
        std::vector<std::string> names;
        while (std::getline(hs, field, ',')) names.push_back(field);
        if (names.size() < 5 || names[0] != "t")
            throw std::runtime_error("record csv: unexpected header");
        rec.obs_names.assign(names.begin() + 5, names.end());
    }
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string field;
        std::vector<double> vals;
        while (std::getline(ls, field, ',')) vals.push_back(std::strtod(field.c_str(), nullptr));
        if (vals.size() != 5 + rec.obs_names.size())
            throw std::runtime_error("record csv: ragged row");
        RunRecord::Row r;
        r.t = vals[0];
        r.rank = static_cast<std::size_t>(vals[1]);
        r.chi = vals[2];
        r.trace_dev = vals[3];
        r.entropy = vals[4];
        r.obs.assign(vals.begin() + 5, vals.end());
        rec.rows.push_back(std::move(r));
    }
    return rec;
}

double final_observable(const RunRecord& rec, const std::string& name) {
    if (rec.rows.empty()) throw std::runtime_error("record has no rows");
    for (std::size_t k = 0; k < rec.obs_names.size(); ++k)
        if (rec.obs_names[k] == name) return rec.rows.back().obs[k];
    throw std::runtime_error("record has no observable named " + name);
}

}  // namespace lrt
