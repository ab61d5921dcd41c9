#pragma once

#include <functional>
#include <limits>

#include "rydberg/types.hpp"

namespace rydberg {

struct IntegratorOptions {
    // Unitary norm drift is ~60 rtol over a 10 us ramp; 1e-10 keeps it below 1e-8.
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 picks one from the derivative
    long max_steps = 20'000'000;
    // > 0 switches off error control and takes uniform steps no longer than this.
    double fixed_step = 0.0;
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    long evaluations = 0;
    double last_step = 0.0;
};

// Dormand-Prince 5(4) with FSAL and an RMS error norm (Hairer, Norsett,
// Wanner). Fifth-order local extrapolation, so the global error of the
// fixed-step mode scales as h^5.
template <class State>
using Rhs = std::function<void(double t, const State& y, State& dydt)>;

template <class State>
IntegratorStats dopri5(State& y, double t0, double t1, const Rhs<State>& f,
                       const IntegratorOptions& opt,
                       const std::function<void(State&)>& post_step = {});

extern template IntegratorStats dopri5<Vec>(Vec&, double, double, const Rhs<Vec>&,
                                            const IntegratorOptions&,
                                            const std::function<void(Vec&)>&);
extern template IntegratorStats dopri5<Mat>(Mat&, double, double, const Rhs<Mat>&,
                                            const IntegratorOptions&,
                                            const std::function<void(Mat&)>&);

} // namespace rydberg
