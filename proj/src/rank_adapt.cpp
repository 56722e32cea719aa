#include "lrt/rank_adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lrt/kernels.hpp"
#include "lrt/textio.hpp"

namespace lrt {

namespace {

// Ltilde = L(rho) z and its in-span coefficients S^-1 z^dag Ltilde; shared by
// the projected-trace measure and the leakage-based inflation rule.
void leakage_pieces(const LowRankState& st, const LindbladModel& model, CMat& Lt, CMat& SiL) {
    LtildeWorkspace ws;
    apply_Ltilde(model, st.z, st.B, st.S, Lt, ws);
    const std::size_t M = st.rank();
    CMat L(M, M);
    kern::matmul_adjoint_left(st.z, Lt, L);
    SiL.resize(M, M);
    kern::matmul(st.S_inv, L, SiL);
}

}  // namespace

double chi_projected_trace(const LowRankState& st, const LindbladModel& model) {
    CMat Lt, SiL;
    leakage_pieces(st, model, Lt, SiL);
    return std::abs(SiL.trace());
}

double chi_probability_ratio(const LowRankState& st) {
    const std::size_t M = st.rank();
    if (M <= 1) return 0.0;
    // tolerate integrator-level negative weights
    CMat sqrtB = matrix_sqrt_psd(st.B, 1e-6);
    CMat C(st.dim(), M);
    kern::matmul(st.z, sqrtB, C);
    CMat sigma(M, M);
    kern::matmul_adjoint_left(C, C, sigma);
    symmetrize_hermitian(sigma);
    EigenResult eig = hermitian_eigen(sigma);
    const double p1 = std::max(eig.values.front(), 0.0);
    const double pM = std::max(eig.values.back(), 0.0);
    return p1 > 0.0 ? pM / p1 : 0.0;
}

double chi_residual_norm(const LowRankState& st, const LindbladModel& model,
                         bool trace_constrained) {
    // || rho_dot - L(rho) ||_F via the factorization
    //   R = sum_a U_a W_a V_a^dag,
    //   ||R||^2 = sum_ab Tr( W_a^dag (U_a^dag U_b) W_b (V_b^dag V_a) ),
    // so only M x M cross-Grams of the tall blocks are ever formed.
    EomResult eom = eval_eom(st, model, trace_constrained);
    const std::size_t M = st.rank();
    const std::size_t D = model.jumps.size();

    std::vector<const CMat*> tall;
    tall.push_back(&st.z);      // 0
    tall.push_back(&eom.dz);    // 1
    CMat Hz = model.H_eff.apply(st.z);
    tall.push_back(&Hz);        // 2
    std::vector<CMat> Qs(D);
    for (std::size_t s = 0; s < D; ++s) {
        Qs[s] = model.jumps[s].apply(st.z);
        tall.push_back(&Qs[s]);  // 3 + s
    }

    struct Term {
        std::size_t u, v;    // tall indices
        const CMat* w;       // Hermitian middle factor
        complex c;           // scalar on the middle factor
    };
    const complex iu(0.0, 1.0);
    std::vector<Term> terms;
    terms.push_back({1, 0, &st.B, 1.0});    // dz B z^dag
    terms.push_back({0, 0, &eom.dB, 1.0});  // z dB z^dag
    terms.push_back({0, 1, &st.B, 1.0});    // z B dz^dag
    terms.push_back({2, 0, &st.B, iu});     // minus L(rho): +i H_eff z B z^dag
    terms.push_back({0, 2, &st.B, -iu});    //               -i z B (H_eff z)^dag
    for (std::size_t s = 0; s < D; ++s) terms.push_back({3 + s, 3 + s, &st.B, -1.0});

    const std::size_t T = tall.size();
    std::vector<std::vector<CMat>> gram(T, std::vector<CMat>(T));
    std::vector<std::vector<bool>> have(T, std::vector<bool>(T, false));
    auto G = [&](std::size_t a, std::size_t b) -> const CMat& {
        if (!have[a][b]) {
            gram[a][b].resize(M, M);
            kern::matmul_adjoint_left(*tall[a], *tall[b], gram[a][b]);
            have[a][b] = true;
            if (a != b && !have[b][a]) {
                gram[b][a] = gram[a][b].adjoint();
                have[b][a] = true;
            }
        }
        return gram[a][b];
    };

    CMat P(M, M), Q(M, M);
    double chi_sq = 0.0;
    for (std::size_t a = 0; a < terms.size(); ++a) {
        for (std::size_t b = a; b < terms.size(); ++b) {
            // Tr( W_a (U_a^dag U_b) W_b (V_b^dag V_a) ), W Hermitian
            kern::matmul(*terms[a].w, G(terms[a].u, terms[b].u), P);
            kern::matmul(*terms[b].w, G(terms[b].v, terms[a].v), Q);
            complex tr = 0.0;
            for (std::size_t i = 0; i < M; ++i)
                for (std::size_t j = 0; j < M; ++j) tr += P(i, j) * Q(j, i);
            const complex term = std::conj(terms[a].c) * terms[b].c * tr;
            chi_sq += (a == b) ? term.real() : 2.0 * term.real();
        }
    }
    return std::sqrt(std::max(chi_sq, 0.0));
}

double eval_chi(ChiVariant v, const LowRankState& st, const LindbladModel& model) {
    switch (v) {
        case ChiVariant::residual_norm: return chi_residual_norm(st, model);
        case ChiVariant::projected_trace: return chi_projected_trace(st, model);
        case ChiVariant::probability_ratio: return chi_probability_ratio(st);
    }
    throw std::logic_error("eval_chi: unknown variant");
}

namespace {

// remove the (oblique) in-span component u <- u - z S^-1 (z^dag u)
void project_out_span(const LowRankState& st, CMat& u) {
    const std::size_t M = st.rank();
    CMat w(M, 1), c(M, 1);
    kern::matmul_adjoint_left(st.z, u, w);
    kern::matmul(st.S_inv, w, c);
    kern::matmul_add(st.z, c, u, complex(-1.0, 0.0));
}

double column_norm(const CMat& u) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) s += std::norm(u(i, 0));
    return std::sqrt(s);
}

bool random_direction(const LowRankState& st, std::mt19937_64& rng, CMat& u) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 32; ++attempt) {
        u.resize(st.dim(), 1);
        for (std::size_t i = 0; i < st.dim(); ++i) u(i, 0) = complex(gauss(rng), gauss(rng));
        project_out_span(st, u);
        project_out_span(st, u);
        const double n = column_norm(u);
        if (n > 1e-8) {
            u *= complex(1.0 / n, 0.0);
            return true;
        }
    }
    return false;
}

}  // namespace

void inflate(LowRankState& st, const LindbladModel& model, InflationRule rule,
             std::mt19937_64& rng) {
    const std::size_t N = st.dim(), M = st.rank();
    if (M >= N) throw std::invalid_argument("inflate: rank already at Hilbert-space dimension");

    CMat u;
    bool got = false;
    if (rule == InflationRule::leakage_svd) {
        CMat Lt, SiL;
        leakage_pieces(st, model, Lt, SiL);
        CMat R = Lt;                                       // (1 - P) L(rho) z
        kern::matmul_add(st.z, SiL, R, complex(-1.0, 0.0));
        CMat G(M, M);
        kern::matmul_adjoint_left(R, R, G);
        symmetrize_hermitian(G);
        EigenResult eig = hermitian_eigen(G);
        if (!eig.values.empty() && eig.values.front() > 1e-28) {
            u.resize(N, 1);
            CMat w1(M, 1);
            for (std::size_t i = 0; i < M; ++i) w1(i, 0) = eig.vectors(i, 0);
            kern::matmul(R, w1, u);  // dominant left singular direction of R
            project_out_span(st, u);
            project_out_span(st, u);
            const double n = column_norm(u);
            if (n > 1e-14) {
                u *= complex(1.0 / n, 0.0);
                got = true;
            }
        }
    }
    if (!got && !random_direction(st, rng, u))
        throw std::runtime_error("inflate: could not find an independent direction");

    CMat z2(N, M + 1), B2(M + 1, M + 1);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < M; ++j) z2(i, j) = st.z(i, j);
        z2(i, M) = u(i, 0);
    }
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) B2(i, j) = st.B(i, j);
    // the fresh state enters unpopulated; dynamics decides what to put there
    st.z = std::move(z2);
    st.B = std::move(B2);
    st.refresh_gram();
}

DeflationResult deflate(LowRankState& st, std::size_t M_min) {
    DeflationResult res;
    const std::size_t M = st.rank();
    res.new_rank = M;
    if (M <= std::max<std::size_t>(M_min, 1)) return res;

    SpectralForm sf = diagonalize(st);
    const std::size_t keep = std::min(M - 1, sf.p.size());
    if (keep < std::max<std::size_t>(M_min, 1)) return res;

    double kept_mass = 0.0;
    for (std::size_t j = 0; j < keep; ++j) kept_mass += sf.p[j];
    if (kept_mass <= 0.0) return res;
    res.discarded = std::max(st.trace() - kept_mass, 0.0);

    CMat z2(st.dim(), keep), B2(keep, keep);
    for (std::size_t i = 0; i < st.dim(); ++i)
        for (std::size_t j = 0; j < keep; ++j) z2(i, j) = sf.eta(i, j);
    for (std::size_t j = 0; j < keep; ++j) B2(j, j) = sf.p[j] / kept_mass;

    st.z = std::move(z2);
    st.B = std::move(B2);
    st.refresh_gram();
    res.performed = true;
    res.new_rank = keep;
    return res;
}

RunRecord supervise(LowRankState& state, const LindbladModel& model, const SolverConfig& cfg,
                    const RankPolicy& policy, const std::vector<Observable>& obs) {
    if (policy.eps_max <= 0.0) throw std::invalid_argument("supervise: eps_max must be positive");
    if (policy.eps_min >= policy.eps_max && policy.eps_min > 0.0)
        throw std::invalid_argument("supervise: eps_min must lie below eps_max");
    if (policy.checkpoint_dt < 0.0)
        throw std::invalid_argument("supervise: checkpoint interval must be >= 0");
    const std::size_t M_max = policy.M_max ? policy.M_max : model.dim;
    if (policy.M_min > M_max) throw std::invalid_argument("supervise: M_min exceeds M_max");

    const auto t_wall = std::chrono::steady_clock::now();
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
    {
        std::vector<double> y0;
        sys.pack(y0);
        stepper.reset(cfg.t0, std::move(y0));
        std::vector<double> scratch;
        sys.rhs(cfg.t0, stepper.y(), scratch);  // prime diagnostics
    }

    std::mt19937_64 rng(policy.seed);
    const bool cp_mode = policy.checkpoint_dt > 0.0;
    const std::vector<double> samples = cfg.sample_times();

    auto track_peaks = [&rec, &sys]() {
        const std::size_t N = sys.state().dim(), M = sys.state().rank();
        rec.peak_rank = std::max(rec.peak_rank, M);
        const std::size_t bytes =
            (N * M + 3 * M * M) * sizeof(complex) + 11 * (2 * N * M + M * M) * sizeof(double);
        rec.peak_state_bytes = std::max(rec.peak_state_bytes, bytes);
    };
    track_peaks();

    // rows and chi samples accumulate here and only reach the record at
    // checkpoint saves, so a rewind discards everything after the checkpoint
    std::vector<RunRecord::Row> pend_rows;
    std::vector<RunRecord::ChiSample> pend_chi;
    auto flush_pending = [&]() {
        rec.rows.insert(rec.rows.end(), pend_rows.begin(), pend_rows.end());
        if (cfg.record_chi_trace)
            rec.chi_trace.insert(rec.chi_trace.end(), pend_chi.begin(), pend_chi.end());
        pend_rows.clear();
        pend_chi.clear();
    };

    Checkpoint cp;
    auto save_checkpoint = [&]() {
        cp.t = stepper.t();
        sys.unpack(stepper.y());
        cp.state = sys.state();
        cp.h_suggest = stepper.suggested_step();
        cp.error_memory = stepper.error_memory();
    };
    double next_cp = cp_mode ? cfg.t0 + policy.checkpoint_dt : std::numeric_limits<double>::infinity();
    if (cp_mode) save_checkpoint();

    std::size_t next = 0;
    {
        const double chi0 = eval_chi(policy.variant, sys.state(), model);
        if (!samples.empty() && samples[0] == cfg.t0) {
            rec.rows.push_back(make_row(cfg.t0, sys.state(), chi0, obs));
            ++next;
        }
    }

    auto reset_stepper_here = [&](double t) {
        std::vector<double> y;
        sys.pack(y);
        stepper.reset(t, std::move(y), stepper.suggested_step(), stepper.error_memory());
    };

    int inflations_this_event = 0;
    double last_cross_t = -std::numeric_limits<double>::infinity();
    int hysteresis = 0;
    bool blocked_logged = false;
    const double t_end = cfg.t1;

    auto abort_run = [&](int status, const std::string& msg) {
        rec.status = status;
        rec.message = msg;
    };

    while (stepper.t() < t_end && rec.status == 0) {
        double t_stop = std::min(next_cp, t_end);
        if (next < samples.size()) t_stop = std::min(t_stop, samples[next]);

        const StepStatus s = stepper.advance(t_stop);
        if (s == StepStatus::underflow) {
            std::ostringstream os;
            os << "step size underflow at t = " << fmt17(stepper.t());
            abort_run(3, os.str());
            break;
        }
        const double t_now = stepper.t();

        // keep the Gram cache honest at every accepted step: letting it
        // drift until the next boundary makes chi and the trace jump when
        // the refresh finally lands
        sys.unpack(stepper.y());
        {
            const double drift = sys.state().gram_drift();
            rec.max_gram_drift = std::max(rec.max_gram_drift, drift);
            if (drift > cfg.gram_refresh_tol) {
                sys.state().refresh_gram();
                stepper.invalidate_derivative();
                ++rec.n_gram_refresh;
            }
        }

        double chi;
        if (policy.variant == ChiVariant::projected_trace) {
            chi = sys.diag().chi_projected;
        } else {
            chi = eval_chi(policy.variant, sys.state(), model);
        }
        if (std::abs(sys.diag().trace - 1.0) > 10.0 * cfg.trace_tol) {
            std::ostringstream os;
            os << "trace deviation " << fmt17(std::abs(sys.diag().trace - 1.0)) << " at t = "
               << fmt17(t_now);
            abort_run(4, os.str());
            break;
        }
        pend_chi.push_back({t_now, sys.state().rank(), chi});

        if (!cp_mode && hysteresis > 0) {
            --hysteresis;
        } else if (chi > policy.eps_max) {
            const std::size_t M = sys.state().rank();
            if (M < M_max) {
                // the budget guards against rewind loops that fail to get past
                // the same crossing; retries whose crossing time advances make
                // progress and start a new count, and in-place inflations at
                // advancing times are unbounded
                if (cp_mode) {
                    if (t_now > last_cross_t) inflations_this_event = 0;
                    last_cross_t = t_now;
                    if (++inflations_this_event > policy.retry_budget) {
                        std::ostringstream os;
                        os << "rank inflation retry budget exhausted near t = " << fmt17(t_now);
                        abort_run(5, os.str());
                        break;
                    }
                }
                if (cp_mode) {
                    // roll the trajectory back to the last checkpoint and
                    // retry the whole interval with the enlarged basis
                    rec.events.push_back(
                        {t_now, RankEvent::Kind::rewind, M, M, chi, 0.0});
                    ++rec.n_rewinds;
                    pend_rows.clear();
                    pend_chi.clear();
                    sys.rebind(cp.state);
                    inflate(sys.state(), model, policy.rule, rng);
                    // the enlarged basis becomes the restart point, otherwise
                    // consecutive retries would keep re-deriving the same rank
                    cp.state = sys.state();
                    rec.events.push_back(
                        {cp.t, RankEvent::Kind::inflate, M, M + 1, chi, 0.0});
                    std::vector<double> y;
                    sys.pack(y);
                    stepper.reset(cp.t, std::move(y), cp.h_suggest, cp.error_memory);
                    next = static_cast<std::size_t>(
                        std::upper_bound(samples.begin(), samples.end(), cp.t) - samples.begin());
                    track_peaks();
                    continue;  // boundaries will be re-reached after the rewind
                }
                // no checkpointing: enlarge in place and keep going; the
                // crossing itself stays on record
                inflate(sys.state(), model, policy.rule, rng);
                rec.events.push_back({t_now, RankEvent::Kind::inflate, M, M + 1, chi, 0.0});
                reset_stepper_here(t_now);
                hysteresis = policy.hysteresis_steps;
                track_peaks();
            } else if (!blocked_logged) {
                rec.events.push_back({t_now, RankEvent::Kind::blocked, M, M, chi, 0.0});
                blocked_logged = true;
            }
        } else {
            blocked_logged = false;
            inflations_this_event = 0;
            if (policy.eps_min > 0.0 && chi < policy.eps_min &&
                sys.state().rank() > policy.M_min) {
                const std::size_t M = sys.state().rank();
                DeflationResult d = deflate(sys.state(), policy.M_min);
                if (d.performed) {
                    rec.events.push_back({t_now, RankEvent::Kind::deflate, M, d.new_rank, chi,
                                          d.discarded});
                    rec.discarded_total += d.discarded;
                    reset_stepper_here(t_now);
                    hysteresis = policy.hysteresis_steps;
                }
            }
        }

        // boundary bookkeeping; exact hits because the stepper clips to t_stop
        if (next < samples.size() && t_now == samples[next]) {
            RunRecord::Row row = make_row(t_now, sys.state(), chi, obs);
            if (cp_mode)
                pend_rows.push_back(std::move(row));
            else
                rec.rows.push_back(std::move(row));
            ++next;
        }
        if (cp_mode && t_now == next_cp) {
            save_checkpoint();
            flush_pending();
            inflations_this_event = 0;
            next_cp += policy.checkpoint_dt;
        }
    }

    flush_pending();
    rec.n_rhs = stepper.stats().n_rhs;
    rec.n_accept = stepper.stats().n_accept;
    rec.n_reject = stepper.stats().n_reject;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall).count();

    sys.unpack(stepper.y());
    state = std::move(sys.state());
    return rec;
}

}  // namespace lrt
