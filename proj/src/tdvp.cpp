#include "lrt/tdvp.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lrt/kernels.hpp"
#include "lrt/textio.hpp"

namespace lrt {

std::vector<double> SolverConfig::sample_times() const {
    if (!output_times.empty()) {
        for (std::size_t i = 0; i + 1 < output_times.size(); ++i)
            if (output_times[i + 1] <= output_times[i])
                throw std::invalid_argument("SolverConfig: output times must increase");
        if (output_times.front() < t0 || output_times.back() > t1)
            throw std::invalid_argument("SolverConfig: output times outside [t0, t1]");
        return output_times;
    }
    if (output_points < 2) throw std::invalid_argument("SolverConfig: need at least 2 samples");
    std::vector<double> ts(output_points);
    for (std::size_t i = 0; i < output_points; ++i)
        ts[i] = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(output_points - 1);
    ts.back() = t1;
    return ts;
}

void pack_state(const CMat& z, const CMat& B, std::vector<double>& y) {
    const std::size_t N = z.rows(), M = z.cols();
    y.resize(2 * N * M + M * M);
    std::memcpy(y.data(), z.data(), 2 * N * M * sizeof(double));
    std::size_t idx = 2 * N * M;
    for (std::size_t i = 0; i < M; ++i) {
        y[idx++] = B(i, i).real();
        for (std::size_t j = i + 1; j < M; ++j) {
            y[idx++] = B(i, j).real();
            y[idx++] = B(i, j).imag();
        }
    }
}

void unpack_state(const std::vector<double>& y, CMat& z, CMat& B) {
    const std::size_t N = z.rows(), M = z.cols();
    if (y.size() != 2 * N * M + M * M)
        throw std::invalid_argument("unpack_state: packed size mismatch");
    std::memcpy(z.data(), y.data(), 2 * N * M * sizeof(double));
    std::size_t idx = 2 * N * M;
    for (std::size_t i = 0; i < M; ++i) {
        B(i, i) = complex(y[idx++], 0.0);
        for (std::size_t j = i + 1; j < M; ++j) {
            const double re = y[idx++];
            const double im = y[idx++];
            B(i, j) = complex(re, im);
            B(j, i) = complex(re, -im);
        }
    }
}

TdvpSystem::TdvpSystem(const LindbladModel& model, LowRankState state, bool trace_constrained)
    : model_(&model), st_(std::move(state)), trace_constrained_(trace_constrained) {
    if (st_.dim() != model.dim) throw std::invalid_argument("TdvpSystem: dimension mismatch");
}

std::size_t TdvpSystem::packed_size() const {
    return 2 * st_.dim() * st_.rank() + st_.rank() * st_.rank();
}

void TdvpSystem::pack(std::vector<double>& y) const { pack_state(st_.z, st_.B, y); }

void TdvpSystem::unpack(const std::vector<double>& y) { unpack_state(y, st_.z, st_.B); }

void TdvpSystem::rebind(LowRankState st) {
    if (st.dim() != model_->dim) throw std::invalid_argument("TdvpSystem: dimension mismatch");
    st_ = std::move(st);
}

void TdvpSystem::rhs(double, const std::vector<double>& y, std::vector<double>& dy) {
    unpack(y);
    const std::size_t M = st_.rank();

    apply_Ltilde(*model_, st_.z, st_.B, st_.S, Lt_, lws_);

    L_.resize(M, M);
    kern::matmul_adjoint_left(st_.z, Lt_, L_);  // L = z^dag Ltilde

    SiL_.resize(M, M);
    kern::matmul(st_.S_inv, L_, SiL_);

    complex tr = SiL_.trace();
    diag_.chi_projected = std::abs(tr);
    diag_.trace = 0.0;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
            diag_.trace += (st_.B(i, j) * st_.S(j, i)).real();

    // dB = (S^-1 L - lambda) S^-1, Hermitian up to the discretization defect
    T_ = SiL_;
    if (trace_constrained_) {
        const complex lambda = tr / static_cast<double>(M);
        for (std::size_t i = 0; i < M; ++i) T_(i, i) -= lambda;
    }
    dB_.resize(M, M);
    kern::matmul(T_, st_.S_inv, dB_);
    diag_.herm_defect = hermiticity_defect(dB_);
    symmetrize_hermitian(dB_);

    // dz = (Ltilde - z S^-1 L) S^-1 B^+. The weight pinv runs in the
    // indefinite-tolerant mode: rejected trial steps routinely probe states
    // outside the PSD cone and the right-hand side must stay total there.
    R_ = Lt_;
    kern::matmul_add(st_.z, SiL_, R_, complex(-1.0, 0.0));
    PinvConfig bp = st_.pinv;
    bp.tolerate_indefinite = true;
    Bwork_ = regularized_pinv(st_.B, bp);
    T_.resize(M, M);
    kern::matmul(st_.S_inv, Bwork_, T_);
    dz_.resize(st_.dim(), M);
    kern::matmul(R_, T_, dz_);

    pack_state(dz_, dB_, dy);
}

EomResult eval_eom(const LowRankState& st, const LindbladModel& model, bool trace_constrained) {
    TdvpSystem sys(model, st, trace_constrained);
    std::vector<double> y, dy;
    sys.pack(y);
    sys.rhs(0.0, y, dy);
    EomResult r;
    r.dz.resize(st.dim(), st.rank());
    r.dB.resize(st.rank(), st.rank());
    unpack_state(dy, r.dz, r.dB);
    r.diag = sys.diag();
    return r;
}

namespace {

std::size_t state_bytes(std::size_t N, std::size_t M) {
    // z, B, S, S_inv plus the stepper's eleven packed vectors
    const std::size_t packed = 2 * N * M + M * M;
    return (N * M + 3 * M * M) * sizeof(complex) + 11 * packed * sizeof(double);
}

}  // namespace

RunRecord integrate(LowRankState& state, const LindbladModel& model, const SolverConfig& cfg,
                    const std::vector<Observable>& obs) {
    const auto t_start = std::chrono::steady_clock::now();

    RunRecord rec;
    for (const Observable& o : obs) rec.obs_names.push_back(o.name);

    TdvpSystem sys(model, std::move(state), true);
    sys.state().pinv = cfg.pinv;
    sys.state().refresh_gram();

    OdeConfig ocfg;
    ocfg.abs_tol = cfg.abs_tol;
    ocfg.rel_tol = cfg.rel_tol;
    ocfg.max_step = cfg.max_step;
    ocfg.initial_step = cfg.initial_step;
    AdaptiveStepper stepper([&sys](double t, const std::vector<double>& y,
                                   std::vector<double>& dy) { sys.rhs(t, y, dy); },
                            ocfg);
    std::vector<double> y0;
    sys.pack(y0);
    stepper.reset(cfg.t0, std::move(y0));

    {  // prime diagnostics at t0
        std::vector<double> scratch;
        sys.rhs(cfg.t0, stepper.y(), scratch);
    }

    rec.peak_rank = sys.state().rank();
    rec.peak_state_bytes = state_bytes(sys.state().dim(), sys.state().rank());

    const std::vector<double> samples = cfg.sample_times();
    std::size_t next = 0;
    if (samples[0] == cfg.t0) {
        rec.rows.push_back(make_row(cfg.t0, sys.state(), sys.diag().chi_projected, obs));
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
            // keep the Gram cache honest at every accepted step so chi and
            // the trace never jump when a refresh lands at a boundary
            sys.unpack(stepper.y());
            const double drift = sys.state().gram_drift();
            rec.max_gram_drift = std::max(rec.max_gram_drift, drift);
            if (drift > cfg.gram_refresh_tol) {
                sys.state().refresh_gram();
                stepper.invalidate_derivative();
                ++rec.n_gram_refresh;
            }
            if (cfg.record_chi_trace)
                rec.chi_trace.push_back(
                    {stepper.t(), sys.state().rank(), sys.diag().chi_projected});
            if (std::abs(sys.diag().trace - 1.0) > 10.0 * cfg.trace_tol) {
                rec.status = 4;
                std::ostringstream os;
                os << "trace deviation " << fmt17(std::abs(sys.diag().trace - 1.0))
                   << " at t = " << fmt17(stepper.t());
                rec.message = os.str();
                break;
            }
        }
        if (rec.status != 0) break;

        sys.unpack(stepper.y());
        rec.rows.push_back(make_row(T, sys.state(), sys.diag().chi_projected, obs));
    }

    rec.n_rhs = stepper.stats().n_rhs;
    rec.n_accept = stepper.stats().n_accept;
    rec.n_reject = stepper.stats().n_reject;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    sys.unpack(stepper.y());
    state = std::move(sys.state());
    return rec;
}

void write_checkpoint(std::ostream& os, const Checkpoint& cp) {
    os << "checkpoint 1\n";
    os << "stepper " << fmt17(cp.h_suggest) << " " << fmt17(cp.error_memory) << "\n";
    write_state_text(os, cp.state, cp.t);
    // the cached Gram is part of the dynamical state: between refreshes the
    // equations of motion run on this cache, not on z^dag z, so resuming with
    // a freshly computed Gram would fork the trajectory
    os << "gram\n";
    write_cmat_text(os, cp.state.S);
}

Checkpoint read_checkpoint(std::istream& is, const PinvConfig& pinv) {
    std::string tag;
    int version = 0;
    is >> tag >> version;
    if (!is || tag != "checkpoint" || version != 1)
        throw std::runtime_error("read_checkpoint: bad header");
    Checkpoint cp;
    is >> tag >> cp.h_suggest >> cp.error_memory;
    if (!is || tag != "stepper") throw std::runtime_error("read_checkpoint: bad stepper record");
    cp.state.pinv = pinv;
    cp.t = read_state_text(is, cp.state);
    is >> tag;
    if (!is || tag != "gram") throw std::runtime_error("read_checkpoint: bad gram record");
    cp.state.S = read_cmat_text(is, cp.state.rank(), cp.state.rank());
    cp.state.S_inv = regularized_pinv(cp.state.S, pinv);
    return cp;
}

}  // namespace lrt
