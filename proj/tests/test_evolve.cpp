#include <gtest/gtest.h>

#include <cmath>

#include "oracle.hpp"
#include "rydberg/evolve.hpp"
#include "rydberg/montecarlo.hpp"
#include "rydberg/observables.hpp"
#include "rydberg/tomography.hpp"

using namespace rydberg;

namespace {

ArrayGeometry pair_geometry(double r) {
    ArrayGeometry g;
    g.positions = {Vec3(0, 0, 0), Vec3(r, 0, 0)};
    return g;
}

AddressingPattern uniform_pattern(int n, AtomClass c = AtomClass::Zero) {
    return {std::vector<AtomClass>(n, c), "test"};
}

double population(const QuantumState& s, Eigen::Index k) {
    return s.is_pure() ? std::norm(s.vector()(k)) : s.density()(k, k).real();
}

Mat total_z(int n) {
    Mat Z = Mat::Zero(Eigen::Index(1) << n, Eigen::Index(1) << n);
    for (int i = 0; i < n; ++i) {
        std::string s(n, '1');
        s[i] = 'z';
        Z += oracle::pauli_string(s);
    }
    return Z;
}

} // namespace

TEST(Evolve, ZeroHamiltonianLeavesState) {
    std::mt19937_64 rng(3);
    Space s{AtomModel::Qubit, 3};
    auto psi = QuantumState::pure(s, oracle::random_state(8, rng));
    EvolutionSpec spec;
    spec.hamiltonian = OperatorProgram::constant(Mat::Zero(8, 8));
    spec.t_end = 5.0;
    auto out = evolve_unitary(psi, spec);
    EXPECT_LT((out.vector() - psi.vector()).norm(), 1e-12);
}

TEST(Evolve, FlipFlopTransfer) {
    auto g = pair_geometry(12.3);
    auto pat = uniform_pattern(2);
    Space s{AtomModel::Qubit, 2};
    auto init = QuantumState::product(s, {level::up, level::down});
    auto out = run_sequence(init, PulseSequence{{Wait{1.0 / (4 * 0.82)}}}, g, pat);
    EXPECT_NEAR(population(out, oracle::index_of("du")), 1.0, 1e-8);
}

TEST(Evolve, AllUpStationary) {
    auto g = build_triangle_array(12.3, 1);
    auto pat = triangle_pattern();
    Space s{AtomModel::Qubit, 3};
    auto init = QuantumState::uniform(s, level::up);
    auto out = run_sequence(init, PulseSequence{{Wait{3.0}}}, g, pat);
    EXPECT_NEAR(std::abs(init.vector().dot(out.vector())), 1.0, 1e-10);
}

TEST(Evolve, NormDriftOverTenMicroseconds) {
    auto g = build_triangle_array(12.3, 2, 25.0);
    auto pat = two_triangle_pattern(1);
    auto init = ramp_initial_state(pat);
    AddressingRamp r;
    r.duration = 10.0;
    auto out = run_sequence(init, PulseSequence{{r}}, g, pat);
    EXPECT_LT(std::abs(out.vector().norm() - 1.0), 1e-8);
}

TEST(Evolve, MagnetizationConserved) {
    auto g = build_triangle_array(12.3, 1);
    auto pat = triangle_pattern();
    std::mt19937_64 rng(8);
    Space s{AtomModel::Qubit, 3};
    auto init = QuantumState::pure(s, oracle::random_state(8, rng));
    AddressingRamp r;
    r.duration = 2.0;
    auto out = run_sequence(init, PulseSequence{{r}}, g, pat);
    Mat Z = total_z(3);
    EXPECT_NEAR(oracle::expect(out.vector(), Z), oracle::expect(init.vector(), Z), 1e-8);
}

TEST(Evolve, GlobalZRotationCommutes) {
    auto g = build_triangle_array(12.3, 1);
    auto pat = uniform_pattern(3);
    std::mt19937_64 rng(9);
    Space s{AtomModel::Qubit, 3};
    Vec psi = oracle::random_state(8, rng);
    // exp(-i a Sz / 2) on every atom.
    Vec phases(8);
    for (int k = 0; k < 8; ++k) phases(k) = std::exp(-kI * 0.35 * oracle::expect(Vec(Vec::Unit(8, k)), total_z(3)));
    Vec rotated = phases.asDiagonal() * psi;
    auto a = run_sequence(QuantumState::pure(s, rotated), PulseSequence{{Wait{1.3}}}, g, pat);
    auto b = run_sequence(QuantumState::pure(s, psi), PulseSequence{{Wait{1.3}}}, g, pat);
    EXPECT_LT((a.vector() - phases.asDiagonal() * b.vector()).norm(), 1e-8);
}

TEST(Evolve, SingleAtomLifetime) {
    Space s{AtomModel::FiveLevel, 1};
    PhysicalModel ph;
    EvolutionSpec spec;
    spec.hamiltonian = OperatorProgram::constant(Mat::Zero(5, 5));
    spec.channels = lifetime_channels(s, ph);
    spec.t_end = 50.0;
    auto out = evolve_lindblad(QuantumState::uniform(s, level::up).as_mixed(), spec);
    double expected = std::exp(-50.0 * (1.0 / 260.0 + 1.0 / 157.0));
    EXPECT_NEAR(population(out, level::up), expected, 1e-4);
    EXPECT_NEAR(out.density().trace().real(), 1.0, 1e-7);
}

TEST(Evolve, LindbladWithoutChannelsMatchesUnitary) {
    auto g = build_triangle_array(12.3, 1);
    CouplingConstants c;
    Mat H = xy_hamiltonian(g.positions, c).matrix + lightshift_hamiltonian(triangle_pattern(), 1.0).matrix;
    std::mt19937_64 rng(4);
    Space s{AtomModel::Qubit, 3};
    auto psi = QuantumState::pure(s, oracle::random_state(8, rng));
    EvolutionSpec spec;
    spec.hamiltonian = OperatorProgram::constant(H);
    spec.t_end = 2.0;
    auto u = evolve_unitary(psi, spec);
    auto l = evolve_lindblad(psi.as_mixed(), spec);
    EXPECT_LT((l.density() - u.to_density()).cwiseAbs().maxCoeff(), 1e-6);
    spec.channels = lifetime_channels(Space{AtomModel::FiveLevel, 3}, PhysicalModel{});
    EXPECT_THROW(evolve_unitary(QuantumState::uniform(Space{AtomModel::FiveLevel, 3}, 0), spec), ConfigError);
}

TEST(Evolve, DepumpingLifetime) {
    ArrayGeometry g;
    g.positions = {Vec3(0, 0, 0)};
    AddressingPattern pat{{AtomClass::Two}, "2delta"};
    ExecutionContext ctx;
    ctx.geometry = &g;
    ctx.pattern = &pat;
    ctx.physics.model = AtomModel::FiveLevel;
    ctx.depumping = true;
    AddressingRamp r;
    r.tau = 1e9;  // constant addressing
    r.duration = 1.1;
    Space s{AtomModel::FiveLevel, 1};
    auto out = run_sequence(QuantumState::uniform(s, level::up), PulseSequence{{r}}, ctx);
    EXPECT_NEAR(population(out, level::up), std::exp(-1.0), 1e-3);
}

TEST(Evolve, LindbladTraceAndPositivity) {
    auto g = pair_geometry(12.3);
    auto pat = AddressingPattern{{AtomClass::Zero, AtomClass::One}, "pair"};
    ExecutionContext ctx;
    ctx.geometry = &g;
    ctx.pattern = &pat;
    ctx.physics.model = AtomModel::FiveLevel;
    ctx.lifetime = true;
    ctx.depumping = true;
    Space s{AtomModel::FiveLevel, 2};
    auto init = QuantumState::product(s, {level::up, level::down}).as_mixed();
    AddressingRamp r;
    r.duration = 5.0;
    auto out = run_sequence(init, PulseSequence{{r, Wait{5.0}}}, ctx);
    const Mat& rho = out.density();
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-7);
    EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat> es(rho);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-7);
}

TEST(Evolve, FreezeEmptiesDown) {
    auto g = pair_geometry(12.3);
    auto pat = uniform_pattern(2);
    ExecutionContext ctx;
    ctx.geometry = &g;
    ctx.pattern = &pat;
    ctx.physics.model = AtomModel::FiveLevel;
    Space s{AtomModel::FiveLevel, 2};
    auto init = QuantumState::product(s, {level::down, level::up});
    auto out = run_sequence(init, PulseSequence{{Freeze{}}}, ctx);
    double down = 0.0;
    for (Eigen::Index k = 0; k < s.dim(); ++k)
        if (s.digit(k, 0) == level::down || s.digit(k, 1) == level::down) down += population(out, k);
    EXPECT_LT(down, 1e-4);
}

TEST(Evolve, WPreparationIdeal) {
    auto g = build_triangle_array(12.3, 1);
    auto pat = triangle_pattern();
    Space s{AtomModel::Qubit, 3};
    auto out = run_sequence(QuantumState::uniform(s, level::up), PulseSequence{{GlobalPulse{w_prep_pulse()}}}, g, pat);
    EXPECT_GE(fidelity(out.to_density(), oracle::imprinted_w(0.0)), 0.97);
}

TEST(Evolve, WResonanceWithoutVdwIsTwoJ) {
    auto g = build_triangle_array(12.3, 1);
    PhysicalModel ph;
    ph.vdw = false;
    EXPECT_NEAR(w_resonance(g, ph), 2 * -0.82, 1e-9);
    ph.vdw = true;
    EXPECT_NEAR(w_resonance(g, ph), 2 * -0.82 - 2 * 0.040, 1e-9);
}

TEST(Evolve, AdiabaticTargetsReached) {
    auto g = build_triangle_array(12.3, 2, 25.0);
    for (int which : {1, 2}) {
        auto pat = two_triangle_pattern(which);
        auto tr = adiabatic_populations(pat, 0.55, g);
        const auto& pop = tr.populations.back();
        int target = which == 1 ? 0 : 1;
        EXPECT_GT(pop(target), 0.99) << "pattern " << which;
        // Target level shares the initial state's symmetry sector.
        EXPECT_EQ(tr.labels.back()[target], 1);
        if (which == 2) EXPECT_EQ(tr.labels.back()[0], -1);
    }
}

TEST(Evolve, SuddenQuenchSpreadsPopulation) {
    auto g = build_triangle_array(12.3, 2, 25.0);
    auto tr = adiabatic_populations(two_triangle_pattern(1), 0.01, g);
    EXPECT_LT(tr.populations.back().maxCoeff(), 0.9);
    EXPECT_THROW(adiabatic_populations(two_triangle_pattern(1), 0.0, g), ConfigError);
}

TEST(Evolve, FixedStepConvergenceOrder) {
    // Driven qubit against the closed form under constant H.
    Mat H = angular(0.5) * oracle::pauli('x') + angular(0.3) * oracle::pauli('z');
    Space s{AtomModel::Qubit, 1};
    auto init = QuantumState::uniform(s, level::up);
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    const double T = 1.0;
    Vec exact = es.eigenvectors() * (-kI * T * es.eigenvalues().cast<cplx>()).array().exp().matrix().asDiagonal() *
                es.eigenvectors().adjoint() * init.vector();
    double err[2];
    for (int k = 0; k < 2; ++k) {
        EvolutionSpec spec;
        spec.hamiltonian = OperatorProgram::constant(H);
        spec.t_end = T;
        spec.integrator.fixed_step = 0.02 / (1 << k);
        err[k] = (evolve_unitary(init, spec).vector() - exact).norm();
    }
    // Fifth-order local extrapolation: ratio near 2^5.
    EXPECT_GT(err[0] / err[1], 20.0);
    EXPECT_LT(err[0] / err[1], 50.0);
}

TEST(Evolve, ContextValidation) {
    auto g = build_triangle_array(12.3, 1);
    auto pat = triangle_pattern();
    ExecutionContext ctx;
    Space s{AtomModel::Qubit, 3};
    EXPECT_THROW(run_sequence(QuantumState::uniform(s, 0), PulseSequence{}, ctx), ConfigError);
    ctx.geometry = &g;
    ctx.pattern = &pat;
    ctx.physics.model = AtomModel::FiveLevel;
    EXPECT_THROW(run_sequence(QuantumState::uniform(s, 0), PulseSequence{}, ctx), ConfigError);
    ctx.physics.model = AtomModel::Qubit;
    auto same = run_sequence(QuantumState::uniform(s, 0), PulseSequence{}, ctx);
    EXPECT_EQ(same.vector(), QuantumState::uniform(s, 0).vector());
}
