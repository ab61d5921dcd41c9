#include "rydberg/hilbert.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace rydberg {

Eigen::Index Space::dim() const {
    Eigen::Index n = 1;
    for (int i = 0; i < n_atoms; ++i) n *= d();
    return n;
}

Eigen::Index Space::stride(int atom) const {
    Eigen::Index s = 1;
    for (int i = atom + 1; i < n_atoms; ++i) s *= d();
    return s;
}

// ---------------------------------------------------------------- states

QuantumState QuantumState::pure(const Space& space, Vec psi) {
    QuantumState s = pure_unchecked(space, std::move(psi));
    s.check();
    return s;
}

QuantumState QuantumState::mixed(const Space& space, Mat rho) {
    QuantumState s = mixed_unchecked(space, std::move(rho));
    s.check();
    return s;
}

QuantumState QuantumState::pure_unchecked(const Space& space, Vec psi) {
    if (psi.size() != space.dim()) throw ConfigError("state vector has the wrong dimension");
    QuantumState s;
    s.space_ = space;
    s.pure_ = true;
    s.psi_ = std::move(psi);
    return s;
}

QuantumState QuantumState::mixed_unchecked(const Space& space, Mat rho) {
    if (rho.rows() != space.dim() || rho.cols() != space.dim())
        throw ConfigError("density matrix has the wrong dimension");
    QuantumState s;
    s.space_ = space;
    s.pure_ = false;
    s.rho_ = std::move(rho);
    return s;
}

QuantumState QuantumState::uniform(const Space& space, int lvl) {
    return product(space, std::vector<int>(space.n_atoms, lvl));
}

QuantumState QuantumState::product(const Space& space, const std::vector<int>& levels) {
    if (static_cast<int>(levels.size()) != space.n_atoms) throw ConfigError("one level per atom");
    Eigen::Index idx = 0;
    for (int i = 0; i < space.n_atoms; ++i) {
        if (levels[i] < 0 || levels[i] >= space.d()) throw ConfigError("level out of range");
        idx += levels[i] * space.stride(i);
    }
    Vec psi = Vec::Zero(space.dim());
    psi(idx) = 1.0;
    return pure(space, std::move(psi));
}

const Vec& QuantumState::vector() const {
    if (!pure_) throw ConfigError("state is a density matrix");
    return psi_;
}
Vec& QuantumState::vector() {
    if (!pure_) throw ConfigError("state is a density matrix");
    return psi_;
}
const Mat& QuantumState::density() const {
    if (pure_) throw ConfigError("state is a vector");
    return rho_;
}
Mat& QuantumState::density() {
    if (pure_) throw ConfigError("state is a vector");
    return rho_;
}

Mat QuantumState::to_density() const { return pure_ ? Mat(psi_ * psi_.adjoint()) : rho_; }

QuantumState QuantumState::as_mixed() const { return mixed_unchecked(space_, to_density()); }

void QuantumState::check(double tol) const {
    if (pure_) {
        if (std::abs(psi_.norm() - 1.0) > tol) throw NumericalError("state norm drifted");
        return;
    }
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw NumericalError("density matrix is not Hermitian");
    if (std::abs(rho_.trace() - 1.0) > tol) throw NumericalError("density matrix trace drifted");
    Eigen::SelfAdjointEigenSolver<Mat> es(rho_);
    if (es.eigenvalues().minCoeff() < -tol) throw NumericalError("density matrix is not PSD");
}

// ------------------------------------------------------------- operators

SpMat site_operator(const Mat& local, int atom, const Space& space) {
    const Eigen::Index D = space.dim();
    const Eigen::Index st = space.stride(atom);
    const int d = space.d();
    std::vector<Eigen::Triplet<cplx>> trip;
    for (Eigen::Index col = 0; col < D; ++col) {
        int a = space.digit(col, atom);
        for (int b = 0; b < d; ++b) {
            cplx v = local(b, a);
            if (v == cplx(0.0)) continue;
            trip.emplace_back(col + (b - a) * st, col, v);
        }
    }
    SpMat out(D, D);
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

SpMat product_operator(const std::vector<Mat>& locals, const Space& space) {
    SpMat out(space.dim(), space.dim());
    out.setIdentity();
    for (int i = 0; i < space.n_atoms; ++i) {
        if (locals[i].size() == 0) continue;
        out = SpMat(site_operator(locals[i], i, space) * out);
    }
    out.prune(cplx(0.0));
    return out;
}

Mat local_pauli(char axis, AtomModel model) {
    const int d = local_dim(model);
    Mat m = Mat::Zero(d, d);
    using namespace level;
    switch (axis) {
    case 'x':
        m(up, down) = 1.0;
        m(down, up) = 1.0;
        break;
    case 'y':
        m(up, down) = -kI;
        m(down, up) = kI;
        break;
    case 'z':
        m(up, up) = 1.0;
        m(down, down) = -1.0;
        break;
    case '1':
        m.setIdentity();
        break;
    default:
        throw ConfigError(std::string("unknown Pauli axis '") + axis + "'");
    }
    return m;
}

Mat local_projector(int lvl, AtomModel model) {
    Mat m = Mat::Zero(local_dim(model), local_dim(model));
    m(lvl, lvl) = 1.0;
    return m;
}

Mat local_transition(int to, int from, AtomModel model) {
    Mat m = Mat::Zero(local_dim(model), local_dim(model));
    m(to, from) = 1.0;
    return m;
}

SpMat pauli_sparse(const std::string& axes, AtomModel model) {
    Space space{model, static_cast<int>(axes.size())};
    if (axes.empty()) throw ConfigError("empty Pauli string");
    std::vector<Mat> locals(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) {
        Mat p = local_pauli(axes[i], model);  // validates the symbol
        if (axes[i] != '1') locals[i] = p;
    }
    return product_operator(locals, space);
}

HamiltonianTerm pauli_string(const std::string& axes, AtomModel model) {
    return {Mat(pauli_sparse(axes, model)), "pauli " + axes};
}

SpMat flip_flop(int i, int j, const Space& space) {
    using namespace level;
    Mat sp = local_transition(up, down, space.model);
    Mat sm = local_transition(down, up, space.model);
    SpMat a = site_operator(sp, i, space) * site_operator(sm, j, space);
    SpMat out = a + SpMat(a.adjoint());
    return out;
}

namespace {

void check_distinct(const std::vector<Vec3>& positions) {
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (!((positions[i] - positions[j]).norm() > 1e-9))
                throw ConfigError("coincident atoms " + std::to_string(i) + ", " + std::to_string(j));
}

} // namespace

HamiltonianTerm xy_hamiltonian(const std::vector<Vec3>& positions, const CouplingConstants& c,
                               AtomModel model) {
    if (positions.size() < 2) throw ConfigError("XY coupling needs at least two atoms");
    check_distinct(positions);
    Space space{model, static_cast<int>(positions.size())};
    SpMat H(space.dim(), space.dim());
    for (int i = 0; i < space.n_atoms; ++i)
        for (int j = i + 1; j < space.n_atoms; ++j) {
            double r = (positions[i] - positions[j]).norm();
            double coupling = angular(c.J) * std::pow(c.a / r, 3);
            H += coupling * flip_flop(i, j, space);
        }
    return {Mat(H), "xy"};
}

HamiltonianTerm lightshift_hamiltonian(const AddressingPattern& pattern, double delta_mhz,
                                       AtomModel model) {
    if (delta_mhz < 0) throw ConfigError("light shift must be non-negative");
    Space space{model, pattern.size()};
    SpMat H(space.dim(), space.dim());
    Mat pu = local_projector(level::up, model);  // (1 + sigma_z)/2 on the qubit pair
    for (int i = 0; i < space.n_atoms; ++i) {
        int n = pattern.multiplier(i);
        if (n == 0) continue;
        H += angular(n * delta_mhz) * site_operator(pu, i, space);
    }
    return {Mat(H), "lightshift"};
}

HamiltonianTerm vdw_hamiltonian(const std::vector<Vec3>& positions, const CouplingConstants& c,
                                AtomModel model) {
    if (positions.size() < 2) throw ConfigError("van der Waals term needs at least two atoms");
    check_distinct(positions);
    Space space{model, static_cast<int>(positions.size())};
    Mat pu = local_projector(level::up, model);
    Mat pd = local_projector(level::down, model);
    SpMat H(space.dim(), space.dim());
    for (int i = 0; i < space.n_atoms; ++i)
        for (int j = i + 1; j < space.n_atoms; ++j) {
            double r = (positions[i] - positions[j]).norm();
            double s6 = std::pow(c.a / r, 6);
            H += angular(c.c6_upup * s6) * (site_operator(pu, i, space) * site_operator(pu, j, space));
            H += angular(c.c6_downdown * s6) *
                 (site_operator(pd, i, space) * site_operator(pd, j, space));
        }
    return {Mat(H), "vdw"};
}

// --------------------------------------------------------------- spectra

std::vector<Eigenpair> exact_spectrum(const Mat& H, int k) {
    if (H.rows() != H.cols()) throw ConfigError("Hamiltonian is not square");
    if ((H - H.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw ConfigError("Hamiltonian is not Hermitian");
    if (k < 0) k = static_cast<int>(H.rows());
    if (k > H.rows()) throw ConfigError("requested more eigenpairs than the dimension");
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    std::vector<Eigenpair> out;
    for (int i = 0; i < k; ++i) out.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
    return out;
}

std::vector<Eigenpair> exact_spectrum(const HamiltonianTerm& H, int k) { return exact_spectrum(H.matrix, k); }

std::vector<int> symmetry_permutation(Symmetry s, const ArrayGeometry& geometry,
                                      const AddressingPattern& pattern) {
    // Reflection/inversion about the array centroid.
    Vec3 center = Vec3::Zero();
    for (const auto& p : geometry.positions) center += p;
    center /= geometry.size();
    std::vector<int> perm(geometry.size(), -1);
    for (int i = 0; i < geometry.size(); ++i) {
        Vec3 q = geometry.positions[i] - center;
        Vec3 image = s == Symmetry::MirrorY ? Vec3(-q.x(), q.y(), q.z()) : Vec3(-q.x(), -q.y(), q.z());
        image += center;
        for (int j = 0; j < geometry.size(); ++j)
            if ((geometry.positions[j] - image).norm() < 1e-6 * geometry.a) perm[i] = j;
        if (perm[i] < 0) throw ConfigError("geometry is not invariant under the symmetry");
        if (pattern.size() == geometry.size() && pattern.classes[i] != pattern.classes[perm[i]])
            throw ConfigError("addressing pattern is not invariant under the symmetry");
    }
    return perm;
}

Mat permutation_operator(const std::vector<int>& perm, const Space& space) {
    const Eigen::Index D = space.dim();
    Mat P = Mat::Zero(D, D);
    for (Eigen::Index col = 0; col < D; ++col) {
        Eigen::Index row = 0;
        for (int i = 0; i < space.n_atoms; ++i) row += space.digit(col, i) * space.stride(perm[i]);
        P(row, col) = 1.0;
    }
    return P;
}

int symmetry_label(const Vec& eigenvector, Symmetry s, const ArrayGeometry& geometry,
                   const AddressingPattern& pattern, const Mat* H) {
    Space space{AtomModel::Qubit, geometry.size()};
    if (eigenvector.size() != space.dim()) space.model = AtomModel::FiveLevel;
    Mat S = permutation_operator(symmetry_permutation(s, geometry, pattern), space);
    if (H && (*H * S - S * *H).cwiseAbs().maxCoeff() > 1e-8)
        throw ConfigError("symmetry does not commute with the Hamiltonian");
    Vec image = S * eigenvector;
    double n2 = eigenvector.squaredNorm();
    cplx overlap = eigenvector.dot(image) / n2;
    if ((image - overlap * eigenvector).norm() > 1e-6 * std::sqrt(n2))
        throw NumericalError("state is not a symmetry eigenstate");
    return overlap.real() > 0 ? 1 : -1;
}

std::vector<LabeledEigenpair> symmetry_resolved_spectrum(const Mat& H, const Mat& S,
                                                         double degeneracy_tol) {
    auto pairs = exact_spectrum(H);
    std::vector<LabeledEigenpair> out;
    std::size_t i = 0;
    double scale = std::max(1.0, std::abs(pairs.back().value) + std::abs(pairs.front().value));
    while (i < pairs.size()) {
        std::size_t j = i + 1;
        while (j < pairs.size() && pairs[j].value - pairs[j - 1].value < degeneracy_tol * scale) ++j;
        Mat block(H.rows(), static_cast<Eigen::Index>(j - i));
        for (std::size_t k = i; k < j; ++k) block.col(k - i) = pairs[k].vector;
        Mat Sb = block.adjoint() * S * block;
        Sb = 0.5 * (Sb + Sb.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Mat> es(Sb);
        for (Eigen::Index k = 0; k < Sb.rows(); ++k) {
            Vec v = block * es.eigenvectors().col(k);
            double lab = es.eigenvalues()(k);
            if (std::abs(std::abs(lab) - 1.0) > 1e-6)
                throw NumericalError("degenerate block does not resolve into symmetry sectors");
            out.push_back({pairs[i + k].value, v, lab > 0 ? 1 : -1});
        }
        i = j;
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const auto& a, const auto& b) { return a.value < b.value; });
    return out;
}

std::vector<Eigen::Index> single_flip_sector(int n_atoms) {
    std::vector<Eigen::Index> idx;
    for (int i = 0; i < n_atoms; ++i) idx.push_back(Eigen::Index(1) << (n_atoms - 1 - i));
    return idx;
}

std::vector<Eigen::Index> magnetization_sector(int n_atoms, int n_down) {
    if (n_down < 0 || n_down > n_atoms) throw ConfigError("invalid magnetization sector");
    std::vector<Eigen::Index> idx;
    for (Eigen::Index k = 0; k < (Eigen::Index(1) << n_atoms); ++k)
        if (std::popcount(static_cast<unsigned long long>(k)) == n_down) idx.push_back(k);
    return idx;
}

Vec embed_qubit_state(const Vec& psi, int n_atoms, AtomModel model) {
    Space q{AtomModel::Qubit, n_atoms}, t{model, n_atoms};
    if (psi.size() != q.dim()) throw ConfigError("qubit vector has the wrong dimension");
    Vec out = Vec::Zero(t.dim());
    for (Eigen::Index k = 0; k < q.dim(); ++k) {
        Eigen::Index m = 0;
        for (int i = 0; i < n_atoms; ++i) m += q.digit(k, i) * t.stride(i);
        out(m) = psi(k);
    }
    return out;
}

} // namespace rydberg
