#include "rydberg/pulses.hpp"

#include <cmath>

namespace rydberg {

double GaussianPulse::sigma() const { return t_width / std::sqrt(kTwoPi); }
double GaussianPulse::half_window() const { return 3.0 * sigma(); }
double GaussianPulse::rotation_angle() const { return kTwoPi * omega_max * t_width; }

void GaussianPulse::validate() const {
    if (omega_max < 0) throw ConfigError("pulse amplitude must be non-negative");
    if (!(t_width > 0)) throw ConfigError("pulse width must be positive");
}

MeasurementBasis MeasurementBasis::parse(const std::string& s) {
    if (s.size() != 3) throw ConfigError("basis label must have three letters: " + s);
    MeasurementBasis b;
    for (int i = 0; i < 3; ++i) {
        if (s[i] != 'x' && s[i] != 'y' && s[i] != 'z') throw ConfigError("bad basis label: " + s);
        b.axes[i] = s[i];
    }
    return b;
}

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

double wrap_angle(double a) {
    a = std::remainder(a, kTwoPi);
    if (a <= -kPi + 1e-12) a += kTwoPi;
    return a;
}

} // namespace

double element_duration(const SequenceElement& e) {
    return std::visit(overloaded{
                          [](const GlobalPulse& p) { return 2.0 * p.pulse.half_window(); },
                          [](const LocalDualTone& p) { return p.addressing_on; },
                          [](const PhaseImprint&) { return 0.0; },
                          [](const AddressingRamp& p) { return p.duration; },
                          [](const Wait& p) { return p.duration; },
                          [](const Freeze& p) { return p.duration; },
                          [](const Readout&) { return 0.0; },
                      },
                      e);
}

std::string element_name(const SequenceElement& e) {
    static const char* names[] = {"global_pulse", "local_dual_tone", "phase_imprint",
                                  "addressing_ramp", "wait", "freeze", "readout"};
    return names[e.index()];
}

std::vector<RotationSpec> MeasurementProgram::stages() const {
    std::vector<RotationSpec> out;
    if (phi_all) {
        RotationSpec g;
        for (auto& c : g.per_class) c = ClassRotation{*phi_all, kPi / 2.0};
        out.push_back(g);
    }
    if (has_local()) {
        RotationSpec l;
        if (phi_0) l.per_class[0] = ClassRotation{*phi_0, kPi / 2.0};
        if (phi_1) l.per_class[1] = ClassRotation{*phi_1, kPi / 2.0};
        out.push_back(l);
    }
    return out;
}

Mat rotation_2x2(double axis, double angle) {
    // exp(-i angle/2 (cos a sx + sin a sy))
    Mat u(2, 2);
    double c = std::cos(angle / 2.0), s = std::sin(angle / 2.0);
    u(0, 0) = c;
    u(1, 1) = c;
    u(0, 1) = -kI * s * std::exp(-kI * axis);
    u(1, 0) = -kI * s * std::exp(kI * axis);
    return u;
}

namespace {

Mat embed_local(const Mat& u2, AtomModel model) {
    Mat u = Mat::Identity(local_dim(model), local_dim(model));
    u.topLeftCorner(2, 2) = u2;
    return u;
}

} // namespace

Mat ideal_rotation_unitary(const RotationSpec& spec, const AddressingPattern& pattern, AtomModel model) {
    Space space{model, pattern.size()};
    std::vector<Mat> locals(pattern.size());
    for (int i = 0; i < pattern.size(); ++i) {
        const auto& r = spec.per_class[pattern.multiplier(i)];
        if (r) locals[i] = embed_local(rotation_2x2(r->axis, r->angle), model);
    }
    return Mat(product_operator(locals, space));
}

Mat program_unitary(const MeasurementProgram& program, const AddressingPattern& pattern, AtomModel model) {
    Space space{model, pattern.size()};
    auto cls = class_unitaries(program);
    std::vector<Mat> locals(pattern.size());
    for (int i = 0; i < pattern.size(); ++i) locals[i] = embed_local(cls[pattern.multiplier(i)], model);
    return Mat(product_operator(locals, space));
}

std::array<Mat, 3> class_unitaries(const MeasurementProgram& program) {
    std::array<Mat, 3> u;
    Mat g = program.phi_all ? rotation_2x2(*program.phi_all, kPi / 2.0) : Mat(Mat::Identity(2, 2));
    u[0] = program.phi_0 ? Mat(rotation_2x2(*program.phi_0, kPi / 2.0) * g) : g;
    u[1] = program.phi_1 ? Mat(rotation_2x2(*program.phi_1, kPi / 2.0) * g) : g;
    u[2] = g;
    return u;
}

namespace {

// Does U^dagger sigma_z U equal sigma_b?
double mapping_error(const Mat& u, char b) {
    Mat sz = local_pauli('z', AtomModel::Qubit);
    Mat target = local_pauli(b, AtomModel::Qubit);
    return (u.adjoint() * sz * u - target).cwiseAbs().maxCoeff();
}

} // namespace

MeasurementProgram compile_measurement_basis(const MeasurementBasis& basis) {
    MeasurementProgram p;
    p.basis = basis;
    // The 2 delta class only sees the global pulse, so its axis fixes it:
    // R^{-y} maps x onto z, R^{x} maps y onto z.
    switch (basis.axes[2]) {
    case 'x': p.phi_all = -kPi / 2.0; break;
    case 'y': p.phi_all = 0.0; break;
    default: break;
    }
    Mat g = p.phi_all ? rotation_2x2(*p.phi_all, kPi / 2.0) : Mat(Mat::Identity(2, 2));
    static const double candidates[] = {0.0, kPi / 2.0, kPi, -kPi / 2.0};
    for (int c = 0; c < 2; ++c) {
        char b = basis.axes[c];
        std::optional<double> phase;
        if (mapping_error(g, b) > 1e-9) {
            for (double a : candidates)
                if (mapping_error(rotation_2x2(a, kPi / 2.0) * g, b) < 1e-9) {
                    phase = wrap_angle(a);
                    break;
                }
            if (!phase) throw NumericalError("no local rotation measures basis " + basis.label());
        }
        (c == 0 ? p.phi_0 : p.phi_1) = phase;
    }
    return p;
}

std::vector<MeasurementBasis> all_bases() {
    std::vector<MeasurementBasis> out;
    const char ax[] = {'x', 'y', 'z'};
    for (char a : ax)
        for (char b : ax)
            for (char c : ax) out.push_back(MeasurementBasis{{a, b, c}});
    return out;
}

BasisCheck verify_compiled_basis(const MeasurementProgram& program, const MeasurementBasis& basis,
                                 double tol) {
    BasisCheck out;
    auto u = class_unitaries(program);
    for (int c = 0; c < 3; ++c) {
        double dev = mapping_error(u[c], basis.axes[c]);
        if (dev > out.max_deviation) {
            out.max_deviation = dev;
            out.worst_class = c;
        }
    }
    out.ok = out.max_deviation <= tol;
    if (out.ok) out.worst_class = -1;
    return out;
}

Mat phase_imprint_unitary(double phi, const AddressingPattern& pattern, AtomModel model) {
    Space space{model, pattern.size()};
    std::vector<Mat> locals(pattern.size());
    for (int i = 0; i < pattern.size(); ++i) {
        int n = pattern.multiplier(i);
        if (n == 0) continue;
        Mat u = Mat::Identity(space.d(), space.d());
        u(level::up, level::up) = std::exp(kI * (n * phi));
        locals[i] = u;
    }
    return Mat(product_operator(locals, space));
}

GaussianPulse w_prep_pulse(double J) {
    GaussianPulse p;
    p.omega_max = 0.33;
    p.t_width = 0.950;
    p.detuning = 2.0 * J;
    p.phase = 0.0;
    p.target = PulseTarget::Global;
    return p;
}

PulseSequence to_pulse_sequence(const MeasurementProgram& program, const MeasurementPulseParams& params) {
    PulseSequence seq;
    if (program.phi_all) {
        GaussianPulse g{params.global_omega, params.global_t, 0.0, *program.phi_all, PulseTarget::Global};
        seq.elements.emplace_back(GlobalPulse{g});
    }
    if (program.has_local()) {
        LocalDualTone l;
        l.addressing_on = params.addressing_on;
        if (program.phi_0)
            l.tone0 = GaussianPulse{params.tone_omega, params.tone_t, 0.0, *program.phi_0, PulseTarget::Tone0};
        if (program.phi_1)
            l.tone1 = GaussianPulse{params.tone_omega, params.tone_t, params.delta, *program.phi_1,
                                    PulseTarget::Tone1};
        seq.elements.emplace_back(l);
    }
    return seq;
}

MeasurementProgram ramsey_program(double phi) {
    MeasurementProgram p;
    p.phi_all = wrap_angle(phi);
    p.phi_0 = 0.0;
    p.phi_1 = kPi / 2.0;
    return p;
}

} // namespace rydberg
