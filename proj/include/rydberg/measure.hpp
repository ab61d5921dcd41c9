#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rydberg/hilbert.hpp"
#include "rydberg/observables.hpp"
#include "rydberg/pulses.hpp"

namespace rydberg {

struct ErrorModel {
    double eps_up = 0.027;     // P(read down | up)
    double eps_down = 0.015;   // P(read up | down)
    double eta_stirap = 0.98;  // preparation success
    double loss_1 = 0.003;     // push-out per addressing pulse, 1 delta atoms
    double loss_2 = 0.013;     // same, 2 delta atoms
    double jitter_sigma_ns = 2.0;

    void validate() const;
};

// Outcome index over {up,down}^N: bit (N-1-i) set means atom i read down,
// so index 0 is all up and the order matches the qubit basis.
using Distribution = Eigen::VectorXd;

struct ShotRecord {
    std::uint32_t outcome = 0;
    int n_atoms = 0;
    std::string axes;    // measured axis per atom
    std::string basis;   // class-ordered basis label
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;

    bool down(int atom) const { return (outcome >> (n_atoms - 1 - atom)) & 1u; }
    std::string bitstring() const;  // 'u'/'d' per atom
};

// Presence/absence image of each level: up, g and p6 are recaptured and
// read "up"; down and r are expelled and read "down".
Distribution outcome_distribution(const QuantumState& state);

struct ReadoutOptions {
    bool readout_errors = true;
    std::vector<double> loss;       // per atom; lost atoms read down
    std::vector<bool> forced_up;    // atoms that failed preparation
};

// Losses of the addressed classes when the program has a local stage.
ReadoutOptions readout_options(const ErrorModel& em, const AddressingPattern& pattern,
                               bool local_stage, bool readout_errors = true, bool losses = true);

Distribution apply_readout_channel(const Distribution& p, int n_atoms, const ErrorModel& em,
                                   const ReadoutOptions& opt);

// Ideal program, readout mapping, then the channel; deterministic in seed.
std::vector<ShotRecord> sample_shots(const QuantumState& state, const MeasurementProgram& program,
                                     const AddressingPattern& pattern, const ErrorModel& em, int n_shots,
                                     std::uint64_t seed, const ReadoutOptions* opt = nullptr);

std::vector<ShotRecord> sample_distribution(const Distribution& p, int n_atoms, int n_shots,
                                            std::uint64_t seed, const std::string& axes,
                                            const std::string& basis = "");

// Applies the program to a state (ideal unitaries).
QuantumState apply_program(const QuantumState& state, const MeasurementProgram& program,
                           const AddressingPattern& pattern);

// Axes measured per atom under a class-ordered basis.
std::string atom_axes(const MeasurementBasis& basis, const AddressingPattern& pattern);

Eigen::Matrix2d correction_matrix(const ErrorModel& em);
Distribution correct_detection_errors(const Distribution& p, int n_atoms, const ErrorModel& em);
Distribution clip_and_renormalize(const Distribution& p);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long n = 0;
};

// +-1 value of p on one shot; throws if the shot basis does not match.
double shot_parity(const ShotRecord& s, const PauliString& p);
Estimate estimate_correlator(const std::vector<ShotRecord>& shots, const PauliString& p);
// Exact expectation of a z-type product over the support of p (axes ignored).
double correlator_from_distribution(const Distribution& d, int n_atoms, const PauliString& p);
// Connected correlator <AB> - <A><B> from shots, delta-method standard error.
Estimate estimate_connected(const std::vector<ShotRecord>& shots, const PauliString& a, const PauliString& b);

Distribution histogram(const std::vector<ShotRecord>& shots, int n_atoms);

} // namespace rydberg
