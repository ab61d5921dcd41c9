#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <type_traits>
#include <vector>

#include "rydberg/evolve.hpp"
#include "rydberg/measure.hpp"
#include "rydberg/observables.hpp"

namespace rydberg {

// Error mechanisms that can be switched independently. `pulses` selects
// pulse-level measurement rotations (off: ideal compiled unitaries).
struct ErrorToggles {
    bool stirap = true;
    bool lifetime = true;
    bool disorder = true;
    bool depumping = true;
    bool loss = true;
    bool lightshift = true;
    bool jitter = true;
    bool readout = true;
    bool vdw = true;
    bool pulses = true;

    static ErrorToggles all_on() { return {}; }
    static ErrorToggles all_off();
    // Imperfections of the prepared state only; ideal measurement.
    static ErrorToggles state_only();
    static const std::vector<std::string>& names();
    bool get(const std::string& name) const;
    void set(const std::string& name, bool value);

    // 5-level model needed for preparation failure, decay or depumping.
    AtomModel required_model() const;
};

enum class PlanKind { Ramsey, Chirality, Adiabatic, WBudget };
std::string to_string(PlanKind k);
PlanKind parse_plan_kind(const std::string& s);

struct ExperimentPlan {
    PlanKind kind = PlanKind::Chirality;
    std::string name;
    int pattern = 0;            // 0 single triangle; 1 or 2 two-triangle patterns
    double a = 12.3;            // um
    double separation = 25.0;   // um, two-triangle center distance
    std::vector<double> sweep;  // phi (rad) or checkpoint times (us)
    int shots = 0;              // per basis and realization; 0 uses exact distributions
    int realizations = 20;
    std::uint64_t seed = 1;
    ErrorToggles toggles;
    ErrorModel errors;
    DisorderModel disorder;
    PhysicalModel physics;
    double lightshift_sigma = 0.01;  // relative, per atom
    double tau = 0.55;               // us, ramp time constant
    double wait = 0.150;             // us, after the ramp
    bool parallel = true;
    // Looser than the engine default; plan outputs move by ~1e-5.
    IntegratorOptions integrator{.rtol = 1e-6, .atol = 1e-8};

    void validate() const;
    ArrayGeometry geometry() const;
    AddressingPattern addressing() const;
};

// Default sweeps: 12 phases on [0, 2 pi) or 33 times on [0, 8] us.
std::vector<double> default_sweep(PlanKind k);

struct SweepRow {
    double sweep = 0.0;
    std::string observable;
    double mean = 0.0;
    double std = 0.0;
    long n = 0;
    double std_error = 0.0;
};

struct SweepResult {
    std::string plan;
    std::vector<SweepRow> rows;
    std::vector<std::uint64_t> realization_seeds;

    // Means of one observable in sweep order.
    std::vector<double> series(const std::string& observable) const;
    std::vector<double> errors(const std::string& observable) const;
    const SweepRow& at(std::size_t sweep_index, const std::string& observable) const;
};

// splitmix64 chain over (master, stream, sweep index, realization index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t sweep,
                          std::uint64_t realization);

// Non-positional draws of one realization, plus the disorder itself.
NoiseSample draw_noise(const ExperimentPlan& plan, const ArrayGeometry& geometry, AtomModel model,
                       std::uint64_t seed);

// Realization loops: f(r) for r in [0, n), results returned in index order so
// that reductions do not depend on scheduling.
template <class F>
auto realize_serial(int n, F&& f) -> std::vector<std::invoke_result_t<F&, int>> {
    std::vector<std::invoke_result_t<F&, int>> out(n);
    for (int r = 0; r < n; ++r) out[r] = f(r);
    return out;
}

template <class F>
auto realize_parallel(int n, F&& f) -> std::vector<std::invoke_result_t<F&, int>> {
    std::vector<std::invoke_result_t<F&, int>> out(n);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < n; ++r) {
        try {
            out[r] = f(r);
        } catch (...) {
#pragma omp critical(realize_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

template <class F>
auto realize(int n, bool parallel, F&& f) {
    return parallel ? realize_parallel(n, std::forward<F>(f)) : realize_serial(n, std::forward<F>(f));
}

// Mean, sample std, n, std / sqrt(n).
SweepRow reduce(double sweep, const std::string& observable, const std::vector<double>& values);

// Imprinted W states measured in the six chirality bases.
struct ChiralityPoint {
    double phi = 0.0;
    double state_value = 0.0;     // chirality of the prepared state
    double measured_value = 0.0;  // from the measured correlators
    std::array<double, 6> terms{};
};

// |up up up> -> W resonance (MHz) of the nominal array, vdW shifts
// included when enabled; the W pulse is tuned to it.
double w_resonance(const ArrayGeometry& geometry, const PhysicalModel& physics);

// Prepared state after the W pulse (5-level or qubit model per toggles).
QuantumState prepare_w(const ExperimentPlan& plan, ExecutionContext& ctx);

std::vector<ChiralityPoint> chirality_realization(const ExperimentPlan& plan, const ArrayGeometry& geometry,
                                                  const AddressingPattern& pattern, const NoiseSample& noise,
                                                  std::uint64_t shot_seed);

struct BudgetRow {
    std::string mechanism;  // "none", a toggle name, or "all"
    double fidelity = 0.0;
    double std = 0.0;
    double contribution = 0.0;  // fidelity("none") - fidelity
};

// W fidelity with each preparation mechanism alone and all together.
std::vector<BudgetRow> error_budget(const ExperimentPlan& plan);

struct AdiabaticSeries {
    std::vector<double> times;
    std::vector<Estimate> chi_a, chi_b, chichi;  // pooled over realizations
    std::vector<double> chi_a_exact, chi_b_exact, chichi_exact;
    std::vector<double> p0, p1;  // lowest two eigenstates of the ramp generator
    std::vector<double> p0_std, p1_std;
    int realizations = 0;
    int shots = 0;
};

AdiabaticSeries adiabatic_experiment(const ExperimentPlan& plan);

SweepResult run_plan(const ExperimentPlan& plan);

} // namespace rydberg
