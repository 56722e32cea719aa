#include "lrt/models.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "lrt/kernels.hpp"

namespace lrt {

namespace {

constexpr double kPi = 3.14159265358979323846;

CMat unit_columns(std::size_t dim, const std::vector<std::size_t>& idx) {
    CMat z(dim, idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c], c) = 1.0;
    return z;
}

CMat point_mass(std::size_t M) {
    CMat B(M, M);
    B(0, 0) = 1.0;
    return B;
}

CMat pure_weights(const std::vector<complex>& c) {
    CMat B(c.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c.size(); ++j) B(i, j) = c[i] * std::conj(c[j]);
    return B;
}

CMat kron_dense(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            const complex f = a(ia, ja);
            if (f == complex{}) continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    out(ia * b.rows() + ib, ja * b.cols() + jb) = f * b(ib, jb);
        }
    return out;
}

std::vector<complex> kron_vec(const std::vector<complex>& a, const std::vector<complex>& b) {
    std::vector<complex> out(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    return out;
}

// basis indices ordered by Hamming distance from the all-down product state,
// ties broken by index, truncated to `count`
std::vector<std::size_t> nearest_to_all_down(std::size_t n, std::size_t count) {
    const std::size_t dim = std::size_t{1} << n;
    if (count <= n + 1) {
        std::vector<std::size_t> out;
        out.push_back(dim - 1);
        for (std::size_t j = 0; j < n; ++j) out.push_back((dim - 1) ^ (std::size_t{1} << j));
        std::sort(out.begin() + 1, out.end());
        out.resize(count);
        return out;
    }
    std::vector<std::size_t> idx(dim);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [n](std::size_t a, std::size_t b) {
        const int da = static_cast<int>(n) - std::popcount(static_cast<unsigned long long>(a));
        const int db = static_cast<int>(n) - std::popcount(static_cast<unsigned long long>(b));
        if (da != db) return da < db;
        return a < b;
    });
    idx.resize(count);
    return idx;
}

void raise_in_place(std::vector<complex>& psi) {
    for (std::size_t n = psi.size(); n-- > 1;) psi[n] = std::sqrt(double(n)) * psi[n - 1];
    psi[0] = 0.0;
}

double vec_norm(const std::vector<complex>& v) {
    double s = 0.0;
    for (const complex& x : v) s += std::norm(x);
    return std::sqrt(s);
}

// sequential Gram-Schmidt frame over the +/- coherent ladder
CMat cat_mode_frame(std::size_t n_cut, double alpha, std::size_t M_pm) {
    CMat zm(n_cut, M_pm);
    std::size_t got = 0;
    for (std::size_t k = 0; k <= M_pm + 3 && got < M_pm; ++k) {
        for (int s : {+1, -1}) {
            if (got == M_pm) break;
            std::vector<complex> v = coherent_state(n_cut, double(s) * alpha);
            for (std::size_t r = 0; r < k; ++r) raise_in_place(v);
            const double n0 = vec_norm(v);
            if (n0 < 1e-12) continue;
            for (complex& x : v) x /= n0;
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t c = 0; c < got; ++c) {
                    complex ov = 0.0;
                    for (std::size_t r = 0; r < n_cut; ++r) ov += std::conj(zm(r, c)) * v[r];
                    for (std::size_t r = 0; r < n_cut; ++r) v[r] -= ov * zm(r, c);
                }
            const double nr = vec_norm(v);
            if (nr < 1e-6) continue;  // candidate already spanned
            for (std::size_t r = 0; r < n_cut; ++r) zm(r, got) = v[r] / nr;
            ++got;
        }
    }
    if (got < M_pm)
        throw std::invalid_argument("cat mode frame: coherent ladder exhausted before " +
                                    std::to_string(M_pm) + " independent states");
    return zm;
}

// log(k!!) with the empty-product convention for k <= 0
class LogDoubleFactorial {
public:
    explicit LogDoubleFactorial(std::size_t max_k) : tab_(max_k + 1, 0.0) {
        for (std::size_t k = 2; k <= max_k; ++k) tab_[k] = std::log(double(k)) + tab_[k - 2];
    }
    double operator()(long k) const { return k <= 0 ? 0.0 : tab_.at(std::size_t(k)); }

private:
    std::vector<double> tab_;
};

}  // namespace

CMat ModelBundle::dense_initial(std::size_t dense_limit) const {
    const std::size_t dim = psi0.size();
    if (dim > dense_limit)
        throw std::runtime_error("dense initial state of dimension " + std::to_string(dim) +
                                 " exceeds the dense limit " + std::to_string(dense_limit));
    CMat rho(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) rho(i, j) = psi0[i] * std::conj(psi0[j]);
    return rho;
}

ModelBundle build_spin_lattice(const SpinLatticeParams& p, const PinvConfig& pinv) {
    if (p.Lx == 0 || p.Ly == 0) throw std::invalid_argument("spin lattice: empty grid");
    const std::size_t N = p.Lx * p.Ly;
    if (N > 24) throw std::invalid_argument("spin lattice: 2^N exceeds the dense-frame budget");
    if (p.gamma < 0.0) throw std::invalid_argument("spin lattice: negative decay rate");
    const std::size_t dim = std::size_t{1} << N;

    SparseOperator H(dim);
    const struct {
        double J;
        Pauli op;
    } bonds[] = {{p.Jx, Pauli::X}, {p.Jy, Pauli::Y}, {p.Jz, Pauli::Z}};
    const std::vector<std::size_t> dims(N, 2);
    for (const auto& [i, j] : grid_edges(p.Lx, p.Ly))
        for (const auto& bond : bonds) {
            if (bond.J == 0.0) continue;
            const CMat s = pauli_matrix(bond.op);
            H = H + tensor_embed(dims, {{i, s}, {j, s}}).scaled(bond.J);
        }
    for (std::size_t j = 0; j < N; ++j) {
        if (p.hz != 0.0) H = H + pauli_site(N, j, Pauli::Z).scaled(p.hz);
        if (p.hx != 0.0) H = H + pauli_site(N, j, Pauli::X).scaled(p.hx);
    }

    std::vector<SparseOperator> jumps;
    if (p.gamma > 0.0)
        for (std::size_t j = 0; j < N; ++j)
            jumps.push_back(pauli_site(N, j, Pauli::Minus).scaled(std::sqrt(p.gamma)));

    const std::size_t M0 = p.M0 ? p.M0 : N + 1;
    if (M0 == 0 || M0 > dim) throw std::invalid_argument("spin lattice: bad initial basis size");

    ModelBundle b;
    b.model = LindbladModel::build(std::move(H), std::move(jumps));
    b.factor_dims = dims;
    const std::vector<std::size_t> frame = nearest_to_all_down(N, M0);
    b.init = make_lowrank_state(unit_columns(dim, frame), point_mass(M0), pinv);
    b.psi0.assign(dim, complex{});
    b.psi0[dim - 1] = 1.0;  // all spins down
    b.observables = spin_observables(N);
    return b;
}

std::vector<Observable> spin_observables(std::size_t n_sites) {
    const double N = double(n_sites);
    const std::size_t dim = std::size_t{1} << n_sites;
    SparseOperator Sx(dim), Sy(dim), Sz(dim);
    for (std::size_t j = 0; j < n_sites; ++j) {
        Sx = Sx + pauli_site(n_sites, j, Pauli::X);
        Sy = Sy + pauli_site(n_sites, j, Pauli::Y);
        Sz = Sz + pauli_site(n_sites, j, Pauli::Z);
    }

    std::vector<Observable> obs;
    obs.push_back({"M_y", Observable::Kind::linear, {Sy}, {}, 1.0 / N, 0.0});
    obs.push_back({"DeltaM_y", Observable::Kind::sqrt_of, {Sy, Sy}, {}, 1.0 / (N * N), 0.0});
    if (n_sites >= 2)
        obs.push_back({"S_xx",
                       Observable::Kind::linear,
                       {Sx, Sx},
                       {},
                       1.0 / (N * (N - 1.0)),
                       -1.0 / (N - 1.0)});
    obs.push_back({"M_z", Observable::Kind::linear, {Sz}, {}, 1.0 / N, 0.0});
    return obs;
}

ModelBundle build_faf(const FafParams& p, const PinvConfig& pinv) {
    if (p.n_modes != 2 && p.n_modes != 3)
        throw std::invalid_argument("driven cavity array: n_modes must be 2 or 3");
    if (p.gamma < 0.0 || p.eta < 0.0)
        throw std::invalid_argument("driven cavity array: negative loss rate");
    const double W = std::hypot(p.U, p.eta);
    // the drive pushes occupation up to ~G/W, cutting below that starves the
    // state; the baseline of 10 only hardens the default choice
    const auto floor = std::size_t(std::ceil(5.0 * std::abs(p.G) / W));
    const std::size_t n_cut = p.n_cut ? p.n_cut : std::max<std::size_t>(10, floor);
    if (n_cut < floor)
        throw std::invalid_argument("driven cavity array: Fock cutoff " + std::to_string(n_cut) +
                                    " is below the drive-dependent floor " + std::to_string(floor));
    if (p.M_pm == 0 || p.M_pm > n_cut)
        throw std::invalid_argument("driven cavity array: bad per-mode frame size");

    const std::size_t N = p.n_modes;
    const std::vector<std::size_t> dims(N, n_cut);
    const std::size_t dim = composite_dim(dims);

    const CMat A = boson_annihilator(n_cut);
    CMat A2(n_cut, n_cut);
    kern::matmul(A, A, A2);
    const CMat Ad = A.adjoint();
    const CMat Ad2 = A2.adjoint();

    CMat Hloc(n_cut, n_cut);
    for (std::size_t n = 0; n < n_cut; ++n)
        Hloc(n, n) = -p.Delta * double(n) + 0.5 * p.U * double(n) * (double(n) - 1.0);
    Hloc += 0.5 * complex(p.G) * (Ad2 + A2);

    SparseOperator H(dim);
    for (std::size_t j = 0; j < N; ++j) H = H + tensor_embed(dims, {{j, Hloc}});
    for (std::size_t j = 0; j < N; ++j)
        for (std::size_t k = j + 1; k < N; ++k) {
            const SparseOperator hop = tensor_embed(dims, {{j, Ad}, {k, A}});
            H = H + (hop + hop.adjoint()).scaled(-p.J);
        }

    std::vector<SparseOperator> jumps;
    for (std::size_t j = 0; j < N; ++j)
        if (p.gamma > 0.0)
            jumps.push_back(tensor_embed(dims, {{j, A}}).scaled(std::sqrt(p.gamma)));
    for (std::size_t j = 0; j < N; ++j)
        if (p.eta > 0.0) jumps.push_back(tensor_embed(dims, {{j, A2}}).scaled(std::sqrt(p.eta)));

    // per-mode Fock ladder |0>, |1>, ..., |M_pm - 1>
    std::vector<std::size_t> frame;
    std::vector<std::size_t> digits(N, 0);
    bool rolled_over = false;
    while (!rolled_over) {
        frame.push_back(composite_index(dims, digits));
        rolled_over = true;
        for (std::size_t pos = N; pos-- > 0;) {
            if (++digits[pos] < p.M_pm) {
                rolled_over = false;
                break;
            }
            digits[pos] = 0;
        }
    }

    ModelBundle b;
    b.model = LindbladModel::build(std::move(H), std::move(jumps));
    b.factor_dims = dims;
    b.init = make_lowrank_state(unit_columns(dim, frame), point_mass(frame.size()), pinv);
    b.psi0.assign(dim, complex{});
    b.psi0[0] = 1.0;  // vacuum
    b.observables.push_back(g1_observable(dims, 0, 1));
    Observable n1{"n_1", Observable::Kind::linear, {tensor_embed(dims, {{0, boson_number(n_cut)}})},
                  {}, 1.0, 0.0};
    b.observables.push_back(std::move(n1));
    return b;
}

Observable g1_observable(const std::vector<std::size_t>& dims, std::size_t i, std::size_t j) {
    if (i >= dims.size() || j >= dims.size() || i == j)
        throw std::invalid_argument("g1 observable: bad mode pair");
    const CMat Ai = boson_annihilator(dims[i]);
    const CMat Aj = boson_annihilator(dims[j]);
    Observable o;
    o.name = "g1_" + std::to_string(i + 1) + std::to_string(j + 1);
    o.kind = Observable::Kind::ratio;
    o.chain = {tensor_embed(dims, {{i, Ai.adjoint()}}), tensor_embed(dims, {{j, Aj}})};
    o.denom_chain = {tensor_embed(dims, {{i, boson_number(dims[i])}})};
    o.den_floor = 1e-10;  // fewer photons than this means "no signal"
    return o;
}

double modified_bessel_i(int q, double x) {
    if (q < 0 || x < 0.0) throw std::invalid_argument("modified_bessel_i: bad arguments");
    if (x == 0.0) return q == 0 ? 1.0 : 0.0;
    double term = std::exp(double(q) * std::log(0.5 * x) - std::lgamma(double(q) + 1.0));
    double sum = term;
    for (int k = 1; k < 500; ++k) {
        term *= 0.25 * x * x / (double(k) * double(k + q));
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

std::vector<complex> cat_state(std::size_t cutoff, double alpha, int parity) {
    if (parity != 1 && parity != -1) throw std::invalid_argument("cat_state: parity must be +-1");
    const std::vector<complex> cp = coherent_state(cutoff, alpha);
    const std::vector<complex> cm = coherent_state(cutoff, -alpha);
    std::vector<complex> v(cutoff);
    for (std::size_t n = 0; n < cutoff; ++n) v[n] = cp[n] + double(parity) * cm[n];
    const double nr = vec_norm(v);
    if (nr < 1e-14) throw std::invalid_argument("cat_state: vanishing superposition");
    for (complex& x : v) x /= nr;
    return v;
}

CatKernelOps cat_kernel_operators(double alpha_sq, std::size_t n_cut, int q_max) {
    if (alpha_sq <= 0.0) throw std::invalid_argument("cat kernel: alpha^2 must be positive");
    if (n_cut < 4) throw std::invalid_argument("cat kernel: cutoff too small");
    if (q_max < 1) throw std::invalid_argument("cat kernel: q_max must be at least 1");

    CatKernelOps ops;
    {
        std::vector<SparseOperator::Triplet> even, odd;
        for (std::size_t n = 0; n < n_cut; ++n)
            (n % 2 == 0 ? even : odd).push_back({n, n, 1.0});
        ops.J_pp = SparseOperator(n_cut, std::move(even));
        ops.J_mm = SparseOperator(n_cut, std::move(odd));
    }

    const double a0 = modified_bessel_i(0, alpha_sq);
    ops.tail_ratio = modified_bessel_i(q_max, alpha_sq) / (2.0 * q_max - 1.0) / a0;
    if (ops.tail_ratio > 1e-8)
        throw std::runtime_error(
            "cat kernel: J_pm series has not converged at q_max = " + std::to_string(q_max) +
            " (remainder " + std::to_string(ops.tail_ratio) + "); raise q_max");

    const double A_alpha = std::sqrt(2.0 * alpha_sq / std::sinh(2.0 * alpha_sq));
    const LogDoubleFactorial ldf(n_cut + 2 * std::size_t(q_max) + 4);

    std::vector<SparseOperator::Triplet> tri;
    for (int q = -q_max; q <= q_max; ++q) {
        const int qa = std::abs(q);
        const double aq =
            (qa % 2 ? -1.0 : 1.0) * modified_bessel_i(qa, alpha_sq) / (2.0 * q + 1.0);
        const double w = A_alpha * aq;
        if (q >= 0) {
            // (n-1)!!/(n+2q)!! J_pp a^(2q+1): odd column m to even row m - 2q - 1
            for (std::size_t m = std::size_t(2 * q + 1); m < n_cut; m += 2) {
                const long r = long(m) - 2 * q - 1;
                const double logv = 0.5 * (std::lgamma(double(m) + 1.0) - std::lgamma(r + 1.0)) +
                                    ldf(r - 1) - ldf(long(m) - 1);
                tri.push_back({std::size_t(r), m, w * std::exp(logv)});
            }
        } else {
            // J_pp (adag)^(2|q|-1) n!!/(n+2|q|-1)!!: odd m to even row m + 2|q| - 1
            for (std::size_t m = 1; m < n_cut; m += 2) {
                const std::size_t r = m + std::size_t(2 * qa) - 1;
                if (r >= n_cut) break;
                const double logv = ldf(long(m)) - ldf(long(r)) +
                                    0.5 * (std::lgamma(double(r) + 1.0) -
                                           std::lgamma(double(m) + 1.0));
                tri.push_back({r, m, w * std::exp(logv)});
            }
        }
    }
    ops.J_pm = SparseOperator(n_cut, std::move(tri));
    ops.J_mp = ops.J_pm.adjoint();
    return ops;
}

ModelBundle build_cat_gate(const CatGateParams& p, const PinvConfig& pinv) {
    const std::size_t N = p.gate == CatGate::Z ? 1 : p.gate == CatGate::ZZ ? 2 : 3;
    if (p.alpha_sq <= 0.0) throw std::invalid_argument("cat gate: alpha^2 must be positive");
    if (p.epsilon < 0.0) throw std::invalid_argument("cat gate: negative drive");
    if (p.kappa1 < 0.0 || p.kappa2 < 0.0) throw std::invalid_argument("cat gate: negative rate");
    const auto rule = std::max<std::size_t>(20, std::size_t(std::ceil(4.5 * p.alpha_sq)));
    const std::size_t n_cut = p.n_cut ? p.n_cut : rule;
    if (n_cut < std::size_t(std::ceil(2.0 * p.alpha_sq)) + 2)
        throw std::invalid_argument("cat gate: Fock cutoff too small for alpha^2 = " +
                                    std::to_string(p.alpha_sq));
    if (p.M_pm == 0 || p.M_pm > n_cut)
        throw std::invalid_argument("cat gate: bad per-mode frame size");
    if (p.init == CatInit::cat_plus && p.M_pm < 2)
        throw std::invalid_argument("cat gate: the even-cat start needs at least 2 frame states");

    const double alpha = std::sqrt(p.alpha_sq);
    const std::vector<std::size_t> dims(N, n_cut);
    const std::size_t dim = composite_dim(dims);

    const CMat A = boson_annihilator(n_cut);
    const CMat Ad = A.adjoint();
    CMat A2(n_cut, n_cut);
    kern::matmul(A, A, A2);
    CMat drain = A2;  // a^2 - alpha^2
    for (std::size_t n = 0; n < n_cut; ++n) drain(n, n) -= p.alpha_sq;

    SparseOperator H(dim);
    switch (p.gate) {
        case CatGate::Z:
            H = tensor_embed(dims, {{0, A + Ad}}).scaled(p.epsilon);
            break;
        case CatGate::ZZ: {
            const SparseOperator hop = tensor_embed(dims, {{0, A}, {1, Ad}});
            H = (hop + hop.adjoint()).scaled(p.epsilon);
            break;
        }
        case CatGate::ZZZ: {
            const SparseOperator tri = tensor_embed(dims, {{0, A}, {1, A}, {2, Ad}});
            H = (tri + tri.adjoint()).scaled(p.epsilon);
            break;
        }
    }

    std::vector<SparseOperator> jumps;
    for (std::size_t j = 0; j < N; ++j)
        jumps.push_back(tensor_embed(dims, {{j, drain}}).scaled(std::sqrt(p.kappa2)));
    for (std::size_t j = 0; j < N; ++j)
        if (p.kappa1 > 0.0)
            jumps.push_back(tensor_embed(dims, {{j, A}}).scaled(std::sqrt(p.kappa1)));

    const CMat zm = cat_mode_frame(n_cut, alpha, p.M_pm);
    const std::vector<complex> psi_mode = p.init == CatInit::cat_plus
                                              ? cat_state(n_cut, alpha, +1)
                                              : coherent_state(n_cut, alpha);
    std::vector<complex> c_mode(p.M_pm, complex{});
    for (std::size_t c = 0; c < p.M_pm; ++c)
        for (std::size_t r = 0; r < n_cut; ++r) c_mode[c] += std::conj(zm(r, c)) * psi_mode[r];
    {
        std::vector<complex> res = psi_mode;
        for (std::size_t c = 0; c < p.M_pm; ++c)
            for (std::size_t r = 0; r < n_cut; ++r) res[r] -= zm(r, c) * c_mode[c];
        if (vec_norm(res) > 1e-8)
            throw std::logic_error("cat gate: initial state escapes the mode frame");
    }

    CMat z = zm;
    std::vector<complex> psi = psi_mode;
    std::vector<complex> c = c_mode;
    for (std::size_t j = 1; j < N; ++j) {
        z = kron_dense(z, zm);
        psi = kron_vec(psi, psi_mode);
        c = kron_vec(c, c_mode);
    }

    const CatKernelOps kops = cat_kernel_operators(p.alpha_sq, n_cut, p.q_max);
    const CMat Jpp = kops.J_pp.to_dense();
    const CMat sgn_x = (kops.J_pm + kops.J_mp).to_dense();

    ModelBundle b;
    b.model = LindbladModel::build(std::move(H), std::move(jumps));
    b.factor_dims = dims;
    b.init = make_lowrank_state(std::move(z), pure_weights(c), pinv);
    b.psi0 = std::move(psi);
    // without the gate drive there is no schedule; suggest a confinement time
    b.t_end_hint = p.epsilon > 0.0 ? kPi / (4.0 * std::pow(alpha, double(N)) * p.epsilon)
                                   : (p.kappa2 > 0.0 ? 1.0 / p.kappa2 : 1.0);

    Observable pz{"P_Z", Observable::Kind::linear, {}, {}, 1.0, 0.0};
    Observable px{"P_X", Observable::Kind::linear, {}, {}, -1.0, 1.0};
    Observable navg{"n_avg", Observable::Kind::linear, {}, {}, 1.0 / double(N), 0.0};
    SparseOperator ntot(dim);
    for (std::size_t j = 0; j < N; ++j) {
        pz.chain.push_back(tensor_embed(dims, {{j, Jpp}}));
        px.chain.push_back(tensor_embed(dims, {{j, sgn_x}}));
        ntot = ntot + tensor_embed(dims, {{j, boson_number(n_cut)}});
    }
    navg.chain = {std::move(ntot)};
    b.observables = {std::move(pz), std::move(px), std::move(navg)};
    return b;
}

std::pair<double, double> gate_error_probabilities(const RunRecord& phase_run,
                                                   const RunRecord& bit_run) {
    return {final_observable(phase_run, "P_Z"), final_observable(bit_run, "P_X")};
}

}  // namespace lrt
