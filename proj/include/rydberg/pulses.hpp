#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rydberg/hilbert.hpp"

namespace rydberg {

enum class PulseTarget { Global, Tone0, Tone1 };

// Omega(t) = omega_max exp(-pi (t/t_width)^2), ordinary frequencies in MHz,
// times in us. The rotation angle of the full pulse is 2 pi omega_max t_width.
struct GaussianPulse {
    double omega_max = 0.0;
    double t_width = 0.0;
    double detuning = 0.0;  // tone frequency minus omega_0
    double phase = 0.0;     // rad, axis angle in the resonant frame
    PulseTarget target = PulseTarget::Global;

    double sigma() const;            // std of the envelope
    double half_window() const;      // 3 sigma
    double rotation_angle() const;   // rad
    void validate() const;
};

struct GlobalPulse {
    GaussianPulse pulse;
};
// Addressing light on for `addressing_on` us; the tones are centered in it.
struct LocalDualTone {
    std::optional<GaussianPulse> tone0;
    std::optional<GaussianPulse> tone1;
    double addressing_on = 0.080;
};
struct PhaseImprint {
    double phi = 0.0;
};
// Light shift of class n is delta0[n] * exp(-t/tau).
struct AddressingRamp {
    std::array<double, 3> delta0{0.0, 23.0, 46.0};
    double tau = 0.55;
    double duration = 0.0;
    double elapsed = 0.0;  // ramp time already spent before this element
};
struct Wait {
    double duration = 0.0;
};
struct Freeze {
    double duration = 0.05;
    double rate = 1e3;
};
struct MeasurementBasis {
    std::array<char, 3> axes{'z', 'z', 'z'};  // per class 0,1,2

    std::string label() const { return {axes[0], axes[1], axes[2]}; }
    static MeasurementBasis parse(const std::string& s);
    bool operator==(const MeasurementBasis& o) const { return axes == o.axes; }
};
struct Readout {
    MeasurementBasis basis;
};

using SequenceElement =
    std::variant<GlobalPulse, LocalDualTone, PhaseImprint, AddressingRamp, Wait, Freeze, Readout>;

struct PulseSequence {
    std::vector<SequenceElement> elements;
};

double element_duration(const SequenceElement& e);
std::string element_name(const SequenceElement& e);

// One pi/2-type rotation on a class; axis angle from +x.
struct ClassRotation {
    double axis = 0.0;
    double angle = kPi / 2.0;
};

struct RotationSpec {
    std::array<std::optional<ClassRotation>, 3> per_class;
};

// Two-stage program: optional global pi/2, then optional local tones on
// classes 0 and 1. Phases are axis angles in rad, in (-pi, pi].
struct MeasurementProgram {
    MeasurementBasis basis;
    std::optional<double> phi_all;
    std::optional<double> phi_0;
    std::optional<double> phi_1;

    bool has_local() const { return phi_0.has_value() || phi_1.has_value(); }
    std::vector<RotationSpec> stages() const;
};

Mat rotation_2x2(double axis, double angle);

// Unitary of one stage, with the model's local dimension.
Mat ideal_rotation_unitary(const RotationSpec& spec, const AddressingPattern& pattern,
                           AtomModel model = AtomModel::Qubit);
// Global stage first, then local.
Mat program_unitary(const MeasurementProgram& program, const AddressingPattern& pattern,
                     AtomModel model = AtomModel::Qubit);
// Per-class 2x2 composite (local * global).
std::array<Mat, 3> class_unitaries(const MeasurementProgram& program);

MeasurementProgram compile_measurement_basis(const MeasurementBasis& basis);
std::vector<MeasurementBasis> all_bases();  // 27, lexicographic xxx..zzz

struct BasisCheck {
    bool ok = true;
    double max_deviation = 0.0;
    int worst_class = -1;
};
BasisCheck verify_compiled_basis(const MeasurementProgram& program, const MeasurementBasis& basis,
                                 double tol = 1e-9);

Mat phase_imprint_unitary(double phi, const AddressingPattern& pattern,
                          AtomModel model = AtomModel::Qubit);

// Calibrated W preparation pulse (global, detuned by 2J).
GaussianPulse w_prep_pulse(double J = -0.82);

struct MeasurementPulseParams {
    double global_omega = 19.23;   // MHz
    double global_t = 0.013;       // us
    double tone_omega = 5.43;      // MHz
    double tone_t = 0.046;         // us
    double addressing_on = 0.080;  // us
    double delta = 23.0;           // MHz, 1 delta tone offset
};

// Pulse-level realization of a compiled program.
PulseSequence to_pulse_sequence(const MeasurementProgram& program,
                                const MeasurementPulseParams& params = {});

// Ramsey benchmark: global pi/2 about phi, then R^x on 0 delta and R^y on 1 delta.
MeasurementProgram ramsey_program(double phi);

} // namespace rydberg
