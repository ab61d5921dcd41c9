#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rydberg/lattice.hpp"
#include "rydberg/types.hpp"

namespace rydberg {

// Level order per atom. Qubit: (up, down). FiveLevel: (up, down, g, p6, r).
enum class AtomModel { Qubit, FiveLevel };

namespace level {
inline constexpr int up = 0;
inline constexpr int down = 1;
inline constexpr int g = 2;
inline constexpr int p6 = 3;
inline constexpr int r = 4;
} // namespace level

inline int local_dim(AtomModel m) { return m == AtomModel::Qubit ? 2 : 5; }

// Tensor-product layout; atom 0 is the most significant digit.
struct Space {
    AtomModel model = AtomModel::Qubit;
    int n_atoms = 1;

    int d() const { return local_dim(model); }
    Eigen::Index dim() const;
    Eigen::Index stride(int atom) const;  // d^(N-1-atom)
    int digit(Eigen::Index index, int atom) const { return static_cast<int>((index / stride(atom)) % d()); }
    bool operator==(const Space& o) const { return model == o.model && n_atoms == o.n_atoms; }
};

class QuantumState {
public:
    // Checked: norm, Hermiticity, trace and positivity within 1e-9.
    static QuantumState pure(const Space& space, Vec psi);
    static QuantumState mixed(const Space& space, Mat rho);
    // Dimension check only: propagated states, whose drift is bounded by the
    // integrator tolerance, and operators pushed through linear maps.
    static QuantumState pure_unchecked(const Space& space, Vec psi);
    static QuantumState mixed_unchecked(const Space& space, Mat rho);
    // Product state with every atom in `lvl`.
    static QuantumState uniform(const Space& space, int lvl);
    // Computational basis state from per-atom levels.
    static QuantumState product(const Space& space, const std::vector<int>& levels);

    bool is_pure() const { return pure_; }
    const Space& space() const { return space_; }
    const Vec& vector() const;
    const Mat& density() const;
    Vec& vector();
    Mat& density();
    Mat to_density() const;
    QuantumState as_mixed() const;
    // Throws NumericalError when the invariants are violated beyond tol.
    void check(double tol = 1e-9) const;

private:
    Space space_;
    bool pure_ = true;
    Vec psi_;
    Mat rho_;
};

struct CouplingConstants {
    double J = -0.82;                 // MHz at distance a
    double c6_upup = 0.040;           // MHz at distance a
    double c6_downdown = 0.006;       // MHz at distance a
    double a = 12.3;                  // um
};

struct HamiltonianTerm {
    Mat matrix;  // rad/us
    std::string label;
};

// Single-site operator `local` (d x d) on `atom`, identity elsewhere.
SpMat site_operator(const Mat& local, int atom, const Space& space);
// Product of single-site operators (identity where the entry is empty).
SpMat product_operator(const std::vector<Mat>& locals, const Space& space);

// Local Pauli matrices in the d-level basis (zero outside the qubit pair).
Mat local_pauli(char axis, AtomModel model);
Mat local_projector(int lvl, AtomModel model);
// |to><from| on one atom.
Mat local_transition(int to, int from, AtomModel model);

// axes: one of 'x','y','z','1' per atom.
HamiltonianTerm pauli_string(const std::string& axes, AtomModel model);
SpMat pauli_sparse(const std::string& axes, AtomModel model);

// Flip-flop pair operator sigma+_i sigma-_j + h.c. (dimensionless).
SpMat flip_flop(int i, int j, const Space& space);

HamiltonianTerm xy_hamiltonian(const std::vector<Vec3>& positions, const CouplingConstants& c,
                               AtomModel model = AtomModel::Qubit);
HamiltonianTerm lightshift_hamiltonian(const AddressingPattern& pattern, double delta_mhz,
                                       AtomModel model = AtomModel::Qubit);
HamiltonianTerm vdw_hamiltonian(const std::vector<Vec3>& positions, const CouplingConstants& c,
                                AtomModel model = AtomModel::Qubit);

struct Eigenpair {
    double value;
    Vec vector;
};

// k lowest eigenpairs, ascending. Eigenvalues in the units of H.
std::vector<Eigenpair> exact_spectrum(const HamiltonianTerm& H, int k = -1);
std::vector<Eigenpair> exact_spectrum(const Mat& H, int k = -1);

enum class Symmetry { MirrorY, Inversion };

// Atom permutation implementing the spatial symmetry; throws when the
// geometry (or the pattern's class layout) is not invariant.
std::vector<int> symmetry_permutation(Symmetry s, const ArrayGeometry& geometry,
                                      const AddressingPattern& pattern);
// Operator P|s_0..s_N-1> = |s'>, s'_perm[i] = s_i.
Mat permutation_operator(const std::vector<int>& perm, const Space& space);

// Symmetry eigenvalue of an eigenvector. If H is supplied, checks [H,S]=0.
int symmetry_label(const Vec& eigenvector, Symmetry s, const ArrayGeometry& geometry,
                   const AddressingPattern& pattern, const Mat* H = nullptr);

struct LabeledEigenpair {
    double value;
    Vec vector;
    int label;  // symmetry eigenvalue
};

// Full spectrum with degenerate blocks rotated into symmetry eigenstates.
std::vector<LabeledEigenpair> symmetry_resolved_spectrum(const Mat& H, const Mat& S,
                                                         double degeneracy_tol = 1e-7);

// Qubit-basis vector of n atoms re-expressed in the model's basis.
Vec embed_qubit_state(const Vec& psi, int n_atoms, AtomModel model);

// Single-excitation sector (one atom down, rest up) of an N-qubit operator.
std::vector<Eigen::Index> single_flip_sector(int n_atoms);
// Qubit basis indices with exactly n_down atoms in |down>.
std::vector<Eigen::Index> magnetization_sector(int n_atoms, int n_down);

} // namespace rydberg
