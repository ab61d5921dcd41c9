#include "rydberg/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rydberg {

void ArrayGeometry::validate() const {
    if (positions.empty()) throw ConfigError("geometry has no atoms");
    if (!(a > 0.0)) throw ConfigError("lattice constant must be positive");
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            if (!(distance(i, j) > 1e-9))
                throw ConfigError("atoms " + std::to_string(i) + " and " + std::to_string(j) +
                                  " coincide");
}

std::vector<int> AddressingPattern::atoms_of(AtomClass c) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (classes[i] == c) out.push_back(i);
    return out;
}

DisorderRealization DisorderRealization::none(int n_atoms) {
    DisorderRealization r;
    r.offset.assign(n_atoms, Vec3::Zero());
    r.velocity.assign(n_atoms, Vec3::Zero());
    return r;
}

ArrayGeometry build_triangle_array(double a, int n_triangles, double separation) {
    if (!(a > 0.0)) throw ConfigError("lattice constant must be positive");
    ArrayGeometry g;
    g.a = a;
    const double R = a / std::sqrt(3.0);  // circumradius
    if (n_triangles == 1) {
        // clockwise: 90, -30, -150 degrees
        for (int k = 0; k < 3; ++k) {
            double ang = kPi / 2.0 - k * 2.0 * kPi / 3.0;
            g.positions.emplace_back(R * std::cos(ang), R * std::sin(ang), 0.0);
        }
    } else if (n_triangles == 2) {
        if (separation < a) throw ConfigError("triangle separation must be at least a");
        const double c = separation / 2.0;
        // A points +x, B points -x
        g.positions.emplace_back(-c + R, 0.0, 0.0);
        g.positions.emplace_back(-c - R / 2.0, a / 2.0, 0.0);
        g.positions.emplace_back(-c - R / 2.0, -a / 2.0, 0.0);
        g.positions.emplace_back(c - R, 0.0, 0.0);
        g.positions.emplace_back(c + R / 2.0, a / 2.0, 0.0);
        g.positions.emplace_back(c + R / 2.0, -a / 2.0, 0.0);
    } else {
        throw ConfigError("n_triangles must be 1 or 2");
    }
    g.validate();
    return g;
}

DisorderRealization sample_disorder(const ArrayGeometry& geometry, const DisorderModel& model,
                                    std::uint64_t seed) {
    if (model.sigma_xy < 0 || model.sigma_z < 0 || model.sigma_v < 0)
        throw ConfigError("disorder sigmas must be non-negative");
    DisorderRealization r = DisorderRealization::none(geometry.size());
    r.seed = seed;
    if (!model.enabled) return r;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int i = 0; i < geometry.size(); ++i) {
        r.offset[i] = Vec3(model.sigma_xy * n01(rng), model.sigma_xy * n01(rng),
                           model.sigma_z * n01(rng));
        r.velocity[i] = Vec3(model.sigma_v * n01(rng), model.sigma_v * n01(rng),
                             model.sigma_v * n01(rng));
    }
    return r;
}

std::vector<Vec3> positions_at(const ArrayGeometry& geometry, const DisorderRealization& realization,
                               double t) {
    std::vector<Vec3> out(geometry.positions);
    if (realization.offset.empty()) return out;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] += realization.offset[i] + realization.velocity[i] * t;
    return out;
}

AddressingPattern triangle_pattern() {
    return {{AtomClass::Zero, AtomClass::One, AtomClass::Two}, "triangle"};
}

AddressingPattern two_triangle_pattern(int which) {
    using C = AtomClass;
    if (which == 1) return {{C::One, C::Zero, C::Two, C::One, C::Zero, C::Two}, "pattern-1"};
    if (which == 2) return {{C::One, C::Zero, C::Two, C::One, C::Two, C::Zero}, "pattern-2"};
    throw ConfigError("pattern must be 1 or 2");
}

std::array<int, 3> ccw_ordering(const ArrayGeometry& geometry, const std::array<int, 3>& atoms) {
    const Vec3& p0 = geometry.positions[atoms[0]];
    const Vec3& p1 = geometry.positions[atoms[1]];
    const Vec3& p2 = geometry.positions[atoms[2]];
    double cross = (p1 - p0).x() * (p2 - p0).y() - (p1 - p0).y() * (p2 - p0).x();
    if (std::abs(cross) < 1e-12) throw ConfigError("collinear atoms have no orientation");
    if (cross > 0) return atoms;
    return {atoms[0], atoms[2], atoms[1]};
}

int handedness(const ArrayGeometry& geometry, const AddressingPattern& pattern,
               const std::array<int, 3>& atoms) {
    auto ccw = ccw_ordering(geometry, atoms);
    std::array<int, 3> perm{pattern.multiplier(ccw[0]), pattern.multiplier(ccw[1]),
                            pattern.multiplier(ccw[2])};
    auto sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2})
        throw ConfigError("triangle does not carry one atom per class");
    int inversions = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (perm[i] > perm[j]) ++inversions;
    return inversions % 2 == 0 ? 1 : -1;
}

int eta_sign(const ArrayGeometry& geometry, const AddressingPattern& pattern) {
    if (geometry.size() != 6 || pattern.size() != 6)
        throw ConfigError("eta needs the two-triangle layout");
    return handedness(geometry, pattern, kTriangleA) * handedness(geometry, pattern, kTriangleB);
}

int atom_with_class(const AddressingPattern& pattern, const std::array<int, 3>& atoms, AtomClass c) {
    for (int i : atoms)
        if (pattern.classes[i] == c) return i;
    throw ConfigError("triangle lacks an atom of class " + std::to_string(static_cast<int>(c)));
}

} // namespace rydberg
