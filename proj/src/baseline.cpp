#include "lrt/baseline.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lrt/kernels.hpp"
#include "lrt/numerics.hpp"

namespace lrt {

TruncationStepResult truncation_step(LowRankState& st, const LindbladModel& model, double dt,
                                     double eps_max, std::size_t forced_rank, std::size_t M_max,
                                     bool renormalize) {
    const std::size_t N = st.dim(), M = st.rank();
    const std::vector<SparseOperator> K = kraus_operators(model, dt);
    const std::size_t nK = K.size();

    CMat sqrtB = matrix_sqrt_psd(st.B, 1e-6);  // tolerate integrator-level negatives
    CMat C(N, M);
    kern::matmul(st.z, sqrtB, C);

    // T = [K_0 C | K_1 C | ...]; rho(t+dt) = T T^dag up to O(dt^2)
    CMat T(N, M * nK);
    {
        CMat col(N, M);
        for (std::size_t s = 0; s < nK; ++s) {
            K[s].apply(C, col);
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < M; ++j) T(i, s * M + j) = col(i, j);
        }
    }

    CMat G(M * nK, M * nK);
    kern::matmul_adjoint_left(T, T, G);
    symmetrize_hermitian(G);
    EigenResult eig = hermitian_eigen(G);

    double total = 0.0;
    for (double& w : eig.values) {
        if (w < 0.0) w = 0.0;
        total += w;
    }

    std::size_t avail = 0;
    const double pmax = eig.values.empty() ? 0.0 : eig.values.front();
    while (avail < eig.values.size() && eig.values[avail] > 1e-12 * pmax) ++avail;

    std::size_t keep;
    if (forced_rank > 0) {
        keep = std::min(forced_rank, avail);
    } else {
        keep = 0;
        double kept_mass = 0.0;
        while (keep < avail) {
            kept_mass += eig.values[keep];
            ++keep;
            if (total - kept_mass <= eps_max) break;
        }
        if (M_max > 0) keep = std::min(keep, M_max);
        keep = std::max<std::size_t>(keep, 1);
    }
    if (keep == 0) throw std::runtime_error("truncation_step: state collapsed to rank zero");

    double kept_mass = 0.0;
    for (std::size_t j = 0; j < keep; ++j) kept_mass += eig.values[j];

    // natural states of the propagated ensemble
    CMat V(M * nK, keep);
    for (std::size_t j = 0; j < keep; ++j) {
        const double inv = 1.0 / std::sqrt(eig.values[j]);
        for (std::size_t i = 0; i < M * nK; ++i) V(i, j) = eig.vectors(i, j) * inv;
    }
    CMat z2(N, keep);
    kern::matmul(T, V, z2);
    CMat B2(keep, keep);
    const double scale = renormalize ? 1.0 / kept_mass : 1.0;
    for (std::size_t j = 0; j < keep; ++j) B2(j, j) = eig.values[j] * scale;

    st.z = std::move(z2);
    st.B = std::move(B2);
    st.refresh_gram();

    TruncationStepResult res;
    res.discarded = std::max(total - kept_mass, 0.0);
    res.rank = keep;
    return res;
}

RunRecord run_truncation(LowRankState& state, const LindbladModel& model, const SolverConfig& cfg,
                         double dt, double eps_max, std::size_t M_min, std::size_t M_max,
                         const std::vector<Observable>& obs) {
    if (dt <= 0.0) throw std::invalid_argument("run_truncation: dt must be positive");
    const auto t_wall = std::chrono::steady_clock::now();

    RunRecord rec;
    for (const Observable& o : obs) rec.obs_names.push_back(o.name);
    state.pinv = cfg.pinv;
    state.refresh_gram();

    const std::vector<double> samples = cfg.sample_times();
    std::size_t next = 0;
    double t = cfg.t0;
    double last_eps = 0.0;

    if (!samples.empty() && samples[0] == cfg.t0) {
        rec.rows.push_back(make_row(t, state, 0.0, obs));
        ++next;
    }
    rec.peak_rank = state.rank();

    while (t < cfg.t1 && rec.status == 0) {
        double step = dt;
        bool at_sample = false;
        if (next < samples.size() && t + step >= samples[next] - 1e-12 * std::max(1.0, samples[next])) {
            step = samples[next] - t;
            at_sample = true;
        }
        if (t + step > cfg.t1) step = cfg.t1 - t;
        if (step <= 0.0) {
            t = at_sample ? samples[next] : cfg.t1;
        } else {
            TruncationStepResult r =
                truncation_step(state, model, step, eps_max, 0, M_max, true);
            if (r.rank < M_min) {
                // pad back up is not meaningful here; record and continue
            }
            last_eps = r.discarded;
            rec.discarded_total += r.discarded;
            rec.peak_rank = std::max(rec.peak_rank, r.rank);
            ++rec.n_accept;
            t = at_sample ? samples[next] : t + step;
        }
        if (at_sample) {
            rec.rows.push_back(make_row(t, state, last_eps, obs));
            ++next;
        }
    }

    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_wall).count();
    return rec;
}

EquivalenceReport equivalence_probe(const LowRankState& st_in, const LindbladModel& model,
                                    const std::vector<double>& dts, double degeneracy_tol) {
    EquivalenceReport rep;
    rep.dts = dts;
    if (dts.size() < 2) throw std::invalid_argument("equivalence_probe: need at least two dt");

    // rotate to natural states so B is diagonal with the populations
    SpectralForm sf = diagonalize(st_in);
    const std::size_t M = sf.p.size();
    if (M < 1) throw std::invalid_argument("equivalence_probe: empty state");
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = i + 1; j < M; ++j)
            if (std::abs(sf.p[i] - sf.p[j]) < degeneracy_tol) {
                rep.skipped = true;
                std::ostringstream os;
                os << "degenerate populations p_" << i << " = p_" << j
                   << " within " << degeneracy_tol;
                rep.reason = os.str();
                return rep;
            }

    CMat Bd(M, M);
    for (std::size_t j = 0; j < M; ++j) Bd(j, j) = sf.p[j];
    LowRankState st = make_lowrank_state(sf.eta, Bd, st_in.pinv);

    rep.distances.clear();
    EomResult eom = eval_eom(st, model, /*trace_constrained=*/false);
    for (double dt : dts) {
        CMat za = st.z;
        CMat dz = eom.dz;
        dz *= complex(dt, 0.0);
        za += dz;
        CMat Ba = st.B;
        CMat dB = eom.dB;
        dB *= complex(dt, 0.0);
        Ba += dB;
        LowRankState tdvp_state = make_lowrank_state(std::move(za), std::move(Ba), st.pinv);
        CMat rho_tdvp = reconstruct_dense(tdvp_state);

        LowRankState trunc_state = st;
        truncation_step(trunc_state, model, dt, 1.0, /*forced_rank=*/M, 0,
                        /*renormalize=*/false);
        CMat rho_trunc = reconstruct_dense(trunc_state);

        rho_tdvp -= rho_trunc;
        rep.distances.push_back(rho_tdvp.frobenius_norm());
    }

    // least-squares slope of log d against log dt
    const std::size_t n = dts.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(dts[i]);
        const double y = std::log(std::max(rep.distances[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return rep;
}

}  // namespace lrt
