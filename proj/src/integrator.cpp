#include "rydberg/integrator.hpp"

#include <algorithm>
#include <cmath>

namespace rydberg {

namespace {

// Dormand-Prince tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

template <class State>
double error_norm(const State& err, const State& y0, const State& y1, double rtol, double atol) {
    auto sc = atol + rtol * y0.array().abs().max(y1.array().abs());
    double s = (err.array().abs() / sc).square().sum();
    return std::sqrt(s / static_cast<double>(err.size()));
}

} // namespace

template <class State>
IntegratorStats dopri5(State& y, double t0, double t1, const Rhs<State>& f,
                       const IntegratorOptions& opt, const std::function<void(State&)>& post_step) {
    IntegratorStats st;
    if (!(t1 >= t0)) throw ConfigError("integration interval runs backwards");
    const double span = t1 - t0;
    if (span == 0.0) return st;

    State k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, err;
    f(t0, y, k1);
    ++st.evaluations;

    const bool fixed = opt.fixed_step > 0.0;
    double h;
    if (fixed) {
        long n = static_cast<long>(std::ceil(span / opt.fixed_step - 1e-12));
        h = span / std::max(1L, n);
    } else if (opt.initial_step > 0) {
        h = opt.initial_step;
    } else {
        double d0 = error_norm(y, y, y, 0.0, 1.0);
        double d1 = error_norm(k1, y, y, 0.0, 1.0);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    h = std::min({h, opt.max_step, span});

    double t = t0;
    while (t < t1) {
        if (st.accepted + st.rejected >= opt.max_steps)
            throw NumericalError("integrator step budget exhausted at t = " + std::to_string(t));
        bool last = false;
        if (t + h >= t1 - 1e-14 * std::max(1.0, std::abs(t1))) {
            h = t1 - t;
            last = true;
        }
        ytmp = y + h * a21 * k1;
        f(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, ynew, k7);
        st.evaluations += 6;

        double en = 0.0;
        if (!fixed) {
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            en = error_norm(err, y, ynew, opt.rtol, opt.atol);
            if (!std::isfinite(en)) throw NumericalError("integrator produced non-finite values");
        }
        if (fixed || en <= 1.0) {
            t = last ? t1 : t + h;
            y.swap(ynew);
            k1.swap(k7);
            if (post_step) {
                post_step(y);
                post_step(k1);
            }
            ++st.accepted;
            st.last_step = h;
            if (!fixed) {
                double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
                h = std::min(h * fac, opt.max_step);
            }
        } else {
            ++st.rejected;
            h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
            if (h < 1e-15 * std::max(1.0, std::abs(t)))
                throw NumericalError("integrator step underflow at t = " + std::to_string(t));
        }
    }
    return st;
}

template IntegratorStats dopri5<Vec>(Vec&, double, double, const Rhs<Vec>&, const IntegratorOptions&,
                                     const std::function<void(Vec&)>&);
template IntegratorStats dopri5<Mat>(Mat&, double, double, const Rhs<Mat>&, const IntegratorOptions&,
                                     const std::function<void(Mat&)>&);

} // namespace rydberg
