#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rydberg/hilbert.hpp"
#include "rydberg/integrator.hpp"
#include "rydberg/lattice.hpp"
#include "rydberg/pulses.hpp"

namespace rydberg {

// H(t) = sum_k c_k(t) ops[k]. ops are Hermitian and in rad/us once scaled
// by their (real) coefficients.
struct OperatorProgram {
    std::vector<SpMat> ops;
    std::function<void(double t, double* c)> coefficients;

    static OperatorProgram constant(const Mat& H);
};

struct DecayChannel {
    SpMat jump;    // unit-rate jump operator on the full space
    double rate;   // 1/us
    std::string label;
};

struct EvolutionSpec {
    OperatorProgram hamiltonian;
    std::vector<DecayChannel> channels;
    // Optional multiplier per channel (same order), evaluated at t.
    std::function<void(double t, double* scale)> channel_scale;
    double t_start = 0.0;
    double t_end = 0.0;
    IntegratorOptions integrator;
};

QuantumState evolve_unitary(const QuantumState& state, const EvolutionSpec& spec,
                            IntegratorStats* stats = nullptr);
QuantumState evolve_lindblad(const QuantumState& state, const EvolutionSpec& spec,
                             IntegratorStats* stats = nullptr);

// Rates and timings of the hardware model. Frequencies in MHz, times in us.
struct PhysicalModel {
    AtomModel model = AtomModel::FiveLevel;
    CouplingConstants constants;
    bool vdw = true;
    double delta = 23.0;               // 1 delta light shift used for local rotations
    double tau_sp_up = 260.0;          // 60S spontaneous
    double tau_bb_up = 157.0;          // 60S black body
    double tau_sp_down = 472.0;        // 60P spontaneous
    double tau_bb_down = 161.0;        // 60P black body
    double tau_depump_1 = 2.3;         // addressed 1 delta |up>
    double tau_depump_2 = 1.1;         // addressed 2 delta |up>
    double tau_p6 = 0.12;              // 6P3/2 back to ground
    MeasurementPulseParams pulses;
};

// Per-realization random draws that are not positional.
struct NoiseSample {
    DisorderRealization disorder;
    std::vector<double> lightshift_scale;  // multiplies every light shift of atom i
    double jitter = 0.0;                   // us, tone offset against the addressing
    std::vector<bool> inert;               // atoms that failed preparation
};

struct ExecutionContext {
    const ArrayGeometry* geometry = nullptr;
    const AddressingPattern* pattern = nullptr;
    PhysicalModel physics;
    NoiseSample noise;
    bool lifetime = false;     // Rydberg decay channels
    bool depumping = false;    // addressing-induced depumping
    double clock = 0.0;        // us since trap release; advanced by run_sequence
    IntegratorOptions integrator;

    Space space() const { return {physics.model, geometry->size()}; }
};

// Executes the elements in order. Light shifts lower |up> (blue-detuned
// addressing), so the transition of an n delta atom sits at omega_0 + n delta
// in the frame rotating at omega_0; the drive of a tone detuned by Delta is
// (Omega/2)[cos(phi - Delta t) sx + sin(phi - Delta t) sy].
QuantumState run_sequence(const QuantumState& initial, const PulseSequence& sequence,
                          ExecutionContext& ctx);

// Noiseless shorthand: no channels, static positions.
QuantumState run_sequence(const QuantumState& initial, const PulseSequence& sequence,
                          const ArrayGeometry& geometry, const AddressingPattern& pattern,
                          AtomModel model = AtomModel::Qubit);

// Channel list of the 5-level model for the given element flags.
std::vector<DecayChannel> lifetime_channels(const Space& space, const PhysicalModel& phys);

// Mixed initial state: each atom in |up> with probability eta, else |g>.
QuantumState stirap_initial_state(const Space& space, double eta);

// Two-triangle ramp initial state: class 0 atoms up, the rest down.
QuantumState ramp_initial_state(const AddressingPattern& pattern, AtomModel model = AtomModel::Qubit);

// Generator whose ground state is the antiferromagnetic XY ground state:
// K = H_XY(-J) + H_z(delta), i.e. minus the lab generator.
Mat afm_frame_hamiltonian(const std::vector<Vec3>& positions, const AddressingPattern& pattern,
                          const CouplingConstants& c, double delta_unit_mhz);

// Levels of K in the magnetization sector of the ramp initial state, ascending,
// degeneracies resolved by S; vectors embedded in the full qubit basis.
std::vector<LabeledEigenpair> ramp_levels(const AddressingPattern& pattern, const Mat& K, const Mat& S);

struct AdiabaticTrace {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> energies;        // ramp_levels eigenvalues (MHz)
    std::vector<Eigen::VectorXd> populations;     // overlap with each eigenvector
    std::vector<std::vector<int>> labels;         // symmetry eigenvalue per level
    std::vector<Vec> states;                      // lab-frame state at each time
};

struct RampOptions {
    double delta_unit = 23.0;  // MHz, 1 delta at t = 0
    double duration = 8.0;     // us
    int n_times = 33;
    CouplingConstants constants;
    IntegratorOptions integrator;
};

// Disorder-free ramp; populations in the instantaneous eigenbasis of K(t),
// degenerate levels resolved by the pattern's symmetry (mirror for pattern 1,
// inversion for pattern 2).
AdiabaticTrace adiabatic_populations(const AddressingPattern& pattern, double tau,
                                     const ArrayGeometry& geometry, const RampOptions& opt = {});

// Symmetry that leaves the pattern's ramp Hamiltonian invariant.
Symmetry pattern_symmetry(const AddressingPattern& pattern, const ArrayGeometry& geometry);

} // namespace rydberg
