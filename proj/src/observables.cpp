#include "rydberg/observables.hpp"

#include <algorithm>
#include <cmath>

namespace rydberg {

PauliString PauliString::on_atoms(int n_atoms, const std::vector<std::pair<int, char>>& support) {
    PauliString p{std::string(n_atoms, '1')};
    for (auto [i, a] : support) {
        if (i < 0 || i >= n_atoms) throw ConfigError("Pauli support outside the register");
        p.axes[i] = a;
    }
    return p;
}

double expect(const QuantumState& state, const PauliString& p) {
    const Space& sp = state.space();
    if (p.size() != sp.n_atoms) throw ConfigError("Pauli string length does not match the register");
    SpMat P = pauli_sparse(p.axes, sp.model);
    cplx v;
    if (state.is_pure()) {
        v = state.vector().dot(P * state.vector());
    } else {
        Mat Pr = P * state.density();
        v = Pr.trace();
    }
    return v.real();
}

const std::array<ChiralityTerm, 6>& chirality_terms() {
    static const std::array<ChiralityTerm, 6> t{{{{'x', 'y', 'z'}, 1},
                                                 {{'y', 'z', 'x'}, 1},
                                                 {{'z', 'x', 'y'}, 1},
                                                 {{'y', 'x', 'z'}, -1},
                                                 {{'x', 'z', 'y'}, -1},
                                                 {{'z', 'y', 'x'}, -1}}};
    return t;
}

ChiralityResult chirality(const QuantumState& state, const std::array<int, 3>& ordering) {
    if (ordering[0] == ordering[1] || ordering[1] == ordering[2] || ordering[0] == ordering[2])
        throw ConfigError("chirality needs three distinct atoms");
    const int n = state.space().n_atoms;
    std::array<double, 6> terms{};
    for (int k = 0; k < 6; ++k) {
        const auto& a = chirality_terms()[k].axes;
        terms[k] = expect(state, PauliString::on_atoms(
                                     n, {{ordering[0], a[0]}, {ordering[1], a[1]}, {ordering[2], a[2]}}));
    }
    return chirality_from_terms(terms);
}

ChiralityResult chirality_from_terms(const std::array<double, 6>& terms, const std::array<double, 6>& stderrs) {
    ChiralityResult r;
    r.terms = terms;
    double var = 0.0;
    for (int k = 0; k < 6; ++k) {
        r.value += chirality_terms()[k].sign * terms[k];
        var += stderrs[k] * stderrs[k];
    }
    r.std_error = std::sqrt(var);
    return r;
}

std::array<ChiralityMeasurement, 6> chirality_measurements(const ArrayGeometry& geometry,
                                                           const AddressingPattern& pattern,
                                                           const std::array<int, 3>& atoms) {
    auto ccw = ccw_ordering(geometry, atoms);
    std::array<ChiralityMeasurement, 6> out;
    for (int k = 0; k < 6; ++k) {
        const auto& t = chirality_terms()[k];
        MeasurementBasis b;
        std::array<bool, 3> seen{};
        for (int m = 0; m < 3; ++m) {
            int c = pattern.multiplier(ccw[m]);
            if (seen[c]) throw ConfigError("triangle does not carry one atom per class");
            seen[c] = true;
            b.axes[c] = t.axes[m];
        }
        out[k] = {b, t.sign};
    }
    return out;
}

MerminCorrelators mermin_correlators(const QuantumState& state) {
    if (state.space().n_atoms != 3) throw ConfigError("Mermin score needs three atoms");
    return {expect(state, {"zzz"}), expect(state, {"xxz"}), expect(state, {"xzx"}), expect(state, {"zxx"})};
}

double mermin_s(const MerminCorrelators& c) { return std::abs(c.zzz - c.xxz - c.xzx - c.zxx); }

double mermin_s(const QuantumState& state) { return mermin_s(mermin_correlators(state)); }

double mermin_lhv_bound() {
    double best = 0.0;
    for (int bits = 0; bits < 512; ++bits) {
        // value of party i along axis a (0=x, 1=y, 2=z)
        auto v = [bits](int i, int a) { return (bits >> (3 * i + a)) & 1 ? -1.0 : 1.0; };
        MerminCorrelators c{v(0, 2) * v(1, 2) * v(2, 2), v(0, 0) * v(1, 0) * v(2, 2),
                            v(0, 0) * v(1, 2) * v(2, 0), v(0, 2) * v(1, 0) * v(2, 0)};
        best = std::max(best, mermin_s(c));
    }
    return best;
}

namespace {

double three_body(const QuantumState& s, const std::array<int, 3>& atoms, const std::array<char, 3>& a) {
    return expect(s, PauliString::on_atoms(s.space().n_atoms,
                                           {{atoms[0], a[0]}, {atoms[1], a[1]}, {atoms[2], a[2]}}));
}

double six_body(const QuantumState& s, const std::array<int, 3>& ta, const std::array<char, 3>& a,
                const std::array<int, 3>& tb, const std::array<char, 3>& b) {
    return expect(s, PauliString::on_atoms(s.space().n_atoms, {{ta[0], a[0]},
                                                               {ta[1], a[1]},
                                                               {ta[2], a[2]},
                                                               {tb[0], b[0]},
                                                               {tb[1], b[1]},
                                                               {tb[2], b[2]}}));
}

std::array<int, 3> class_order(const AddressingPattern& pattern, const std::array<int, 3>& tri) {
    return {atom_with_class(pattern, tri, AtomClass::Zero), atom_with_class(pattern, tri, AtomClass::One),
            atom_with_class(pattern, tri, AtomClass::Two)};
}

} // namespace

double chi_chi_full(const QuantumState& state, const std::array<int, 3>& tri_a, const std::array<int, 3>& tri_b) {
    if (state.space().n_atoms != 6) throw ConfigError("chi-chi correlator needs six atoms");
    const auto& T = chirality_terms();
    std::array<double, 6> ea{}, eb{};
    for (int k = 0; k < 6; ++k) {
        ea[k] = three_body(state, tri_a, T[k].axes);
        eb[k] = three_body(state, tri_b, T[k].axes);
    }
    double sum = 0.0;
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q)
            sum += T[p].sign * T[q].sign * (six_body(state, tri_a, T[p].axes, tri_b, T[q].axes) - ea[p] * eb[q]);
    return sum;
}

std::array<double, 6> chi_chi_connected_terms(const QuantumState& state, const AddressingPattern& pattern) {
    if (state.space().n_atoms != 6) throw ConfigError("chi-chi correlator needs six atoms");
    auto A = class_order(pattern, kTriangleA);
    auto B = class_order(pattern, kTriangleB);
    std::array<double, 6> out{};
    for (int k = 0; k < 6; ++k) {
        const auto& a = chirality_terms()[k].axes;
        out[k] = six_body(state, A, a, B, a) - three_body(state, A, a) * three_body(state, B, a);
    }
    return out;
}

double chi_chi_restricted(const QuantumState& state, const ArrayGeometry& geometry, const AddressingPattern& pattern) {
    auto terms = chi_chi_connected_terms(state, pattern);
    double s = 0.0;
    for (double t : terms) s += t;
    return eta_sign(geometry, pattern) * s;
}

} // namespace rydberg
