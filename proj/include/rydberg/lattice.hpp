#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rydberg/types.hpp"

namespace rydberg {

// Tweezer positions in um. `a` is the reference spacing at which the
// dipolar coupling equals J.
struct ArrayGeometry {
    std::vector<Vec3> positions;
    double a = 12.3;

    int size() const { return static_cast<int>(positions.size()); }
    double distance(int i, int j) const { return (positions[i] - positions[j]).norm(); }
    void validate() const;
};

enum class AtomClass : int { Zero = 0, One = 1, Two = 2 };

inline int multiplier(AtomClass c) { return static_cast<int>(c); }

struct AddressingPattern {
    std::vector<AtomClass> classes;
    std::string label;

    int size() const { return static_cast<int>(classes.size()); }
    int multiplier(int atom) const { return static_cast<int>(classes[atom]); }
    // Atoms carrying class c, in index order.
    std::vector<int> atoms_of(AtomClass c) const;
};

struct DisorderModel {
    double sigma_xy = 0.1;  // um
    double sigma_z = 0.6;   // um
    double sigma_v = 0.03;  // um/us
    bool enabled = true;
};

struct DisorderRealization {
    std::vector<Vec3> offset;    // um
    std::vector<Vec3> velocity;  // um/us
    std::uint64_t seed = 0;

    static DisorderRealization none(int n_atoms);
};

// One triangle: atoms 0,1,2 run clockwise seen from +z (so the
// counter-clockwise ordering is 0,2,1). Two triangles: side a, apexes on the
// x axis facing each other, centers at x = -separation/2 and +separation/2.
// Atoms 0..2 = A (apex, upper, lower), 3..5 = B (apex, upper, lower).
ArrayGeometry build_triangle_array(double a, int n_triangles, double separation = 0.0);

DisorderRealization sample_disorder(const ArrayGeometry& geometry, const DisorderModel& model,
                                    std::uint64_t seed);

std::vector<Vec3> positions_at(const ArrayGeometry& geometry, const DisorderRealization& realization,
                               double t);

// Single triangle, classes in atom order (0, 1, 2).
AddressingPattern triangle_pattern();

// Pattern 1: B is the mirror image of A across the y axis.
// Pattern 2: B is the point inversion of A.
AddressingPattern two_triangle_pattern(int which);

// The three atoms sorted counter-clockwise (viewed from +z), starting at
// the first entry of `atoms`.
std::array<int, 3> ccw_ordering(const ArrayGeometry& geometry, const std::array<int, 3>& atoms);

// Parity of the map from counter-clockwise position to class label,
// +1 for even, -1 for odd. Requires one atom per class.
int handedness(const ArrayGeometry& geometry, const AddressingPattern& pattern,
               const std::array<int, 3>& atoms);

// Product of the two triangles' handedness signs.
int eta_sign(const ArrayGeometry& geometry, const AddressingPattern& pattern);

// Triangle membership: triangles of the two-triangle layout.
inline constexpr std::array<int, 3> kTriangleA{0, 1, 2};
inline constexpr std::array<int, 3> kTriangleB{3, 4, 5};

// Atom of triangle `atoms` that carries class c.
int atom_with_class(const AddressingPattern& pattern, const std::array<int, 3>& atoms, AtomClass c);

} // namespace rydberg
