#pragma once

#include <array>
#include <string>
#include <vector>

#include "rydberg/hilbert.hpp"
#include "rydberg/lattice.hpp"
#include "rydberg/pulses.hpp"

namespace rydberg {

// Per-atom symbols in {x, y, z, 1}.
struct PauliString {
    std::string axes;

    int size() const { return static_cast<int>(axes.size()); }
    static PauliString on_atoms(int n_atoms, const std::vector<std::pair<int, char>>& support);
};

double expect(const QuantumState& state, const PauliString& p);

// Permutations of (x,y,z) with their parity; order xyz, yzx, zxy, yxz, xzy, zyx.
struct ChiralityTerm {
    std::array<char, 3> axes;
    int sign;
};
const std::array<ChiralityTerm, 6>& chirality_terms();

struct ChiralityResult {
    double value = 0.0;
    std::array<double, 6> terms{};
    double std_error = 0.0;  // zero unless estimated from shots
};

// <(s_i x s_j) . s_k> for the given ordering (atom indices). Use
// ccw_ordering() to obtain the counter-clockwise convention.
ChiralityResult chirality(const QuantumState& state, const std::array<int, 3>& ordering);
// Signed sum of already measured terms (same order as chirality_terms()).
ChiralityResult chirality_from_terms(const std::array<double, 6>& terms,
                                     const std::array<double, 6>& stderrs = {});

// Class-ordered measurement basis that realizes chirality term k for a
// counter-clockwise ordering, plus the sign that converts the class-ordered
// correlator into the term.
struct ChiralityMeasurement {
    MeasurementBasis basis;
    int sign;  // sign of the term in the chirality sum
};
std::array<ChiralityMeasurement, 6> chirality_measurements(const ArrayGeometry& geometry,
                                                           const AddressingPattern& pattern,
                                                           const std::array<int, 3>& atoms);

struct MerminCorrelators {
    double zzz, xxz, xzx, zxx;
};
MerminCorrelators mermin_correlators(const QuantumState& state);
double mermin_s(const MerminCorrelators& c);
double mermin_s(const QuantumState& state);
// Max of S over the 512 deterministic +-1 assignments of (x,y,z) per party.
double mermin_lhv_bound();

double chi_chi_full(const QuantumState& state, const std::array<int, 3>& tri_a,
                    const std::array<int, 3>& tri_b);

// Restricted form: eta * sum over the six class-ordered same-basis
// assignments of the connected six-body correlator.
double chi_chi_restricted(const QuantumState& state, const ArrayGeometry& geometry,
                          const AddressingPattern& pattern);
// Same-permutation connected correlators in class order, one per term.
std::array<double, 6> chi_chi_connected_terms(const QuantumState& state,
                                              const AddressingPattern& pattern);

} // namespace rydberg
