#include "lrt/oracle.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <sstream>

#include "lrt/numerics.hpp"
#include "lrt/ode.hpp"
#include "lrt/textio.hpp"

namespace lrt {

namespace {

void pack_dense(const CMat& rho, std::vector<double>& y) {
    y.resize(2 * rho.rows() * rho.cols());
    std::memcpy(y.data(), rho.data(), y.size() * sizeof(double));
}

void unpack_dense(const std::vector<double>& y, CMat& rho) {
    std::memcpy(rho.data(), y.data(), y.size() * sizeof(double));
}

RunRecord::Row dense_row(double t, const CMat& rho, const std::vector<Observable>& obs) {
    RunRecord::Row row;
    row.t = t;
    row.trace_dev = std::abs(rho.trace().real() - 1.0);
    row.chi = 0.0;

    EigenResult eig = hermitian_eigen(rho, 1e-8);
    const double pmax = eig.values.empty() ? 0.0 : std::max(eig.values.front(), 0.0);
    double entropy = 0.0;
    std::size_t rank = 0;
    for (double p : eig.values) {
        if (p > 1e-12 * pmax && p > 0.0) {
            entropy -= p * std::log(p);
            ++rank;
        }
    }
    row.entropy = entropy;
    row.rank = rank;

    row.obs.reserve(obs.size());
    for (const Observable& o : obs) row.obs.push_back(eval_observable_dense(o, rho));
    return row;
}

}  // namespace

RunRecord integrate_dense(CMat& rho, const LindbladModel& model, const SolverConfig& cfg,
                          const std::vector<Observable>& obs) {
    if (rho.rows() != model.dim || rho.cols() != model.dim)
        throw std::invalid_argument("integrate_dense: state dimension mismatch");
    const auto t_wall = std::chrono::steady_clock::now();

    RunRecord rec;
    for (const Observable& o : obs) rec.obs_names.push_back(o.name);

    CMat work(model.dim, model.dim), dwork(model.dim, model.dim);
    auto rhs = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
        unpack_dense(y, work);
        apply_liouvillian_dense(model, work, dwork);
        pack_dense(dwork, dy);
    };

    OdeConfig ocfg;
    ocfg.abs_tol = cfg.abs_tol;
    ocfg.rel_tol = cfg.rel_tol;
    ocfg.max_step = cfg.max_step;
    ocfg.initial_step = cfg.initial_step;
    AdaptiveStepper stepper(rhs, ocfg);
    std::vector<double> y0;
    pack_dense(rho, y0);
    stepper.reset(cfg.t0, std::move(y0));

    const std::vector<double> samples = cfg.sample_times();
    std::size_t next = 0;
    if (samples[0] == cfg.t0) {
        rec.rows.push_back(dense_row(cfg.t0, rho, obs));
        ++next;
    }

    for (; next < samples.size() && rec.status == 0; ++next) {
        const double T = samples[next];
        while (stepper.t() < T) {
            const StepStatus s = stepper.advance(T);
            if (s == StepStatus::underflow) {
                rec.status = 3;
                std::ostringstream os;
                os << "step size underflow at t = " << fmt17(stepper.t());
                rec.message = os.str();
                break;
            }
        }
        if (rec.status != 0) break;
        unpack_dense(stepper.y(), rho);
        symmetrize_hermitian(rho);
        rec.rows.push_back(dense_row(T, rho, obs));
        if (rec.rows.back().trace_dev > 10.0 * cfg.trace_tol) {
            rec.status = 4;
            std::ostringstream os;
            os << "trace deviation " << fmt17(rec.rows.back().trace_dev) << " at t = " << fmt17(T);
            rec.message = os.str();
        }
    }

    rec.n_rhs = stepper.stats().n_rhs;
    rec.n_accept = stepper.stats().n_accept;
    rec.n_reject = stepper.stats().n_reject;
    rec.peak_rank = model.dim;
    rec.peak_state_bytes = (3 * model.dim * model.dim) * sizeof(complex) +
                           11 * 2 * model.dim * model.dim * sizeof(double);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall).count();

    unpack_dense(stepper.y(), rho);
    symmetrize_hermitian(rho);
    return rec;
}

SteadyStateResult steady_state_by_integration(const LindbladModel& model, CMat rho0,
                                              const SolverConfig& cfg, double tol, double t_max,
                                              double window) {
    SteadyStateResult res;
    res.rho = std::move(rho0);
    double t = 0.0;
    while (t < t_max) {
        const double t1 = std::min(t + window, t_max);
        SolverConfig seg = cfg;
        seg.t0 = t;
        seg.t1 = t1;
        seg.output_points = 2;
        seg.output_times.clear();
        RunRecord rec = integrate_dense(res.rho, model, seg, {});
        if (rec.status != 0) break;
        t = t1;
        res.residual = apply_liouvillian_dense(model, res.rho).frobenius_norm();
        if (res.residual < tol) {
            res.converged = true;
            break;
        }
    }
    res.t_reached = t;
    return res;
}

}  // namespace lrt
