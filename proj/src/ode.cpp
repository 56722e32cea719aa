#include "lrt/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lrt {

namespace {

// Dormand-Prince 5(4) tableau. Row a7 doubles as the 5th-order weights; the
// last stage is evaluated at the accepted point and reused as stage one of
// the next step.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;

// difference between the 5th- and 4th-order weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

// PI controller exponents, the classic pairing for this tableau
constexpr double kBeta = 0.04;
constexpr double kAlpha = 0.2 - kBeta * 0.75;

}  // namespace

AdaptiveStepper::AdaptiveStepper(Rhs rhs, OdeConfig cfg) : rhs_(std::move(rhs)), cfg_(cfg) {
    if (cfg_.abs_tol <= 0.0 || cfg_.rel_tol < 0.0)
        throw std::invalid_argument("AdaptiveStepper: tolerances must be positive");
}

void AdaptiveStepper::reset(double t, std::vector<double> y, double h_suggest,
                            double error_memory) {
    t_ = t;
    y_ = std::move(y);
    const std::size_t n = y_.size();
    ynew_.assign(n, 0.0);
    ytmp_.assign(n, 0.0);
    yerr_.assign(n, 0.0);
    for (auto& k : k_) k.assign(n, 0.0);
    fsal_valid_ = false;
    h_sugg_ = h_suggest;
    err_old_ = error_memory > 0.0 ? error_memory : 1e-4;
}

void AdaptiveStepper::eval(double t, const std::vector<double>& y, std::vector<double>& dy) {
    rhs_(t, y, dy);
    ++stats_.n_rhs;
}

double AdaptiveStepper::initial_step_guess(double t_limit) {
    const std::size_t n = y_.size();
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
        d0 += (y_[i] / sc) * (y_[i] / sc);
        d1 += (k_[0][i] / sc) * (k_[0][i] / sc);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_limit - t_);

    for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h0 * k_[0][i];
    eval(t_ + h0, ytmp_, k_[1]);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double sc = cfg_.abs_tol + cfg_.rel_tol * std::abs(y_[i]);
        const double d = (k_[1][i] - k_[0][i]) / sc;
        d2 += d * d;
    }
    d2 = std::sqrt(d2 / n) / h0;

    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, cfg_.max_step});
}

StepStatus AdaptiveStepper::advance(double t_limit) {
    const std::size_t n = y_.size();
    if (n == 0) throw std::runtime_error("AdaptiveStepper: empty state");
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t_), 1.0);
    if (t_limit - t_ <= h_min) {
        t_ = t_limit;
        return StepStatus::hit_limit;
    }

    if (!fsal_valid_) {
        eval(t_, y_, k_[0]);
        fsal_valid_ = true;
    }
    if (h_sugg_ <= 0.0)
        h_sugg_ = cfg_.initial_step > 0.0 ? std::min(cfg_.initial_step, cfg_.max_step)
                                          : initial_step_guess(t_limit);

    double fac_max = cfg_.fac_max;
    for (;;) {
        double h = std::min(h_sugg_, cfg_.max_step);
        bool clipped = false;
        if (t_ + h >= t_limit) {
            h = t_limit - t_;
            clipped = true;
        }
        if (h < h_min) return StepStatus::underflow;

        const std::vector<double>& k1 = k_[0];
        for (std::size_t i = 0; i < n; ++i) ytmp_[i] = y_[i] + h * a21 * k1[i];
        eval(t_ + c2 * h, ytmp_, k_[1]);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a31 * k1[i] + a32 * k_[1][i]);
        eval(t_ + c3 * h, ytmp_, k_[2]);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a41 * k1[i] + a42 * k_[1][i] + a43 * k_[2][i]);
        eval(t_ + c4 * h, ytmp_, k_[3]);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] =
                y_[i] + h * (a51 * k1[i] + a52 * k_[1][i] + a53 * k_[2][i] + a54 * k_[3][i]);
        eval(t_ + c5 * h, ytmp_, k_[4]);
        for (std::size_t i = 0; i < n; ++i)
            ytmp_[i] = y_[i] + h * (a61 * k1[i] + a62 * k_[1][i] + a63 * k_[2][i] +
                                    a64 * k_[3][i] + a65 * k_[4][i]);
        eval(t_ + h, ytmp_, k_[5]);
        for (std::size_t i = 0; i < n; ++i)
            ynew_[i] = y_[i] + h * (a71 * k1[i] + a73 * k_[2][i] + a74 * k_[3][i] +
                                    a75 * k_[4][i] + a76 * k_[5][i]);
        eval(t_ + h, ynew_, k_[6]);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k_[2][i] + e4 * k_[3][i] + e5 * k_[4][i] +
                                  e6 * k_[5][i] + e7 * k_[6][i]);
            const double sc =
                cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            const double fac = std::pow(err > 0.0 ? err : 1e-16, -kAlpha) *
                               std::pow(err_old_, kBeta) * cfg_.safety;
            h_sugg_ = h * std::min(fac_max, std::max(cfg_.fac_min, fac));
            err_old_ = std::max(err, 1e-4);
            t_ = clipped ? t_limit : t_ + h;
            std::swap(y_, ynew_);
            std::swap(k_[0], k_[6]);  // accepted endpoint derivative becomes stage one
            ++stats_.n_accept;
            return clipped ? StepStatus::hit_limit : StepStatus::ok;
        }

        ++stats_.n_reject;
        const double fac = cfg_.safety * std::pow(err, -kAlpha);
        h_sugg_ = h * std::max(cfg_.fac_min, std::min(1.0, fac));
        fac_max = 1.0;  // no growth right after a rejection
    }
}

}  // namespace lrt
