#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle.hpp"
#include "rydberg/measure.hpp"
#include "rydberg/tomography.hpp"

using namespace rydberg;

namespace {

QuantumState pure3(const Vec& v) { return QuantumState::pure(Space{AtomModel::Qubit, 3}, v); }

ReadoutOptions no_loss(int n) {
    ReadoutOptions o;
    o.loss.assign(n, 0.0);
    return o;
}

} // namespace

TEST(Measure, OutcomeIndexConvention) {
    auto st = QuantumState::product(Space{AtomModel::Qubit, 3}, {level::up, level::down, level::up});
    Distribution p = outcome_distribution(st);
    EXPECT_EQ(p(oracle::index_of("udu")), 1.0);
    ShotRecord s{.outcome = 0b010, .n_atoms = 3};
    EXPECT_FALSE(s.down(0));
    EXPECT_TRUE(s.down(1));
    EXPECT_EQ(s.bitstring(), "udu");
}

TEST(Measure, FiveLevelImaging) {
    Space s{AtomModel::FiveLevel, 3};
    auto st = QuantumState::product(s, {level::g, level::r, level::p6});
    Distribution p = outcome_distribution(st);
    EXPECT_EQ(p(oracle::index_of("udu")), 1.0);
}

TEST(Measure, NoErrorsAllUp) {
    ErrorModel em;
    em.eps_up = em.eps_down = 0.0;
    Space s{AtomModel::Qubit, 3};
    auto shots = sample_shots(QuantumState::uniform(s, level::up), compile_measurement_basis(MeasurementBasis{}),
                              triangle_pattern(), em, 1000, 3);
    for (const auto& r : shots) EXPECT_EQ(r.outcome, 0u);
}

TEST(Measure, FalseDownRate) {
    ErrorModel em;
    Space s{AtomModel::Qubit, 3};
    const int n = 100000;
    auto opt = no_loss(3);
    auto shots = sample_shots(QuantumState::uniform(s, level::up), compile_measurement_basis(MeasurementBasis{}),
                              triangle_pattern(), em, n, 4, &opt);
    long downs = 0;
    for (const auto& r : shots) downs += r.down(0);
    double f = double(downs) / n;
    double se = std::sqrt(em.eps_up * (1 - em.eps_up) / n);
    EXPECT_NEAR(f, em.eps_up, 3 * se);
}

TEST(Measure, WShotsHaveOneDown) {
    ErrorModel em;
    em.eps_up = em.eps_down = 0.0;
    auto shots = sample_shots(pure3(w_state()), compile_measurement_basis(MeasurementBasis{}), triangle_pattern(),
                              em, 2000, 5);
    std::array<long, 3> per{};
    for (const auto& r : shots) {
        EXPECT_EQ(std::popcount(r.outcome), 1);
        for (int i = 0; i < 3; ++i) per[i] += r.down(i);
    }
    for (long c : per) EXPECT_NEAR(c / 2000.0, 1.0 / 3.0, 0.05);
}

TEST(Measure, ChannelIsColumnStochastic) {
    ErrorModel em;
    ReadoutOptions opt = readout_options(em, two_triangle_pattern(1), true);
    for (int o = 0; o < 64; ++o) {
        Distribution e = Distribution::Zero(64);
        e(o) = 1.0;
        Distribution q = apply_readout_channel(e, 6, em, opt);
        EXPECT_NEAR(q.sum(), 1.0, 1e-14);
        EXPECT_GE(q.minCoeff(), 0.0);
    }
}

TEST(Measure, ChannelMatchesKroneckerOracle) {
    ErrorModel em;
    auto opt = no_loss(3);
    Eigen::Matrix2d m;
    m << 1 - em.eps_up, em.eps_down, em.eps_up, 1 - em.eps_down;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(1, 1);
    for (int i = 0; i < 3; ++i) {
        Eigen::MatrixXd next(M.rows() * 2, M.cols() * 2);
        for (int r = 0; r < M.rows(); ++r)
            for (int c = 0; c < M.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = M(r, c) * m;
        M = next;
    }
    Distribution p = outcome_distribution(pure3(w_state()));
    EXPECT_LT((apply_readout_channel(p, 3, em, opt) - M * p).norm(), 1e-14);
}

TEST(Measure, LossReadsDown) {
    ErrorModel em;
    ReadoutOptions opt;
    opt.readout_errors = false;
    opt.loss = {1.0, 0.0, 0.0};
    Distribution p = outcome_distribution(QuantumState::uniform(Space{AtomModel::Qubit, 3}, level::up));
    Distribution q = apply_readout_channel(p, 3, em, opt);
    EXPECT_NEAR(q(oracle::index_of("duu")), 1.0, 1e-15);
}

TEST(Measure, ForcedUpReadsUp) {
    ErrorModel em;
    ReadoutOptions opt;
    opt.forced_up = {false, true, false};
    Distribution p = outcome_distribution(QuantumState::uniform(Space{AtomModel::Qubit, 3}, level::down));
    Distribution q = apply_readout_channel(p, 3, em, opt);
    double sum = 0.0;
    for (int o = 0; o < 8; ++o)
        if (!(o & 0b010)) sum += q(o);
    EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Measure, LossOnlyWithLocalStage) {
    ErrorModel em;
    auto pat = triangle_pattern();
    auto none = readout_options(em, pat, false);
    auto some = readout_options(em, pat, true);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(none.loss[i], 0.0);
    EXPECT_EQ(some.loss[atom_with_class(pat, kTriangleA, AtomClass::Zero)], 0.0);
    EXPECT_EQ(some.loss[atom_with_class(pat, kTriangleA, AtomClass::One)], em.loss_1);
    EXPECT_EQ(some.loss[atom_with_class(pat, kTriangleA, AtomClass::Two)], em.loss_2);
}

TEST(Measure, CorrectionRoundTrip) {
    ErrorModel em;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0, 1);
    Distribution p(8);
    for (int o = 0; o < 8; ++o) p(o) = u(rng);
    p /= p.sum();
    Distribution q = apply_readout_channel(p, 3, em, no_loss(3));
    EXPECT_LT((correct_detection_errors(q, 3, em) - p).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Measure, CorrectionIdentityWithoutErrors) {
    ErrorModel em;
    em.eps_up = em.eps_down = 0.0;
    Distribution p = Distribution::LinSpaced(8, 1, 8) / 36.0;
    EXPECT_LT((correct_detection_errors(p, 3, em) - p).norm(), 1e-15);
}

TEST(Measure, SingularCorrectionThrows) {
    ErrorModel em;
    em.eps_up = 0.5;
    em.eps_down = 0.5;
    EXPECT_THROW(correct_detection_errors(Distribution::Constant(8, 0.125), 3, em), NumericalError);
}

TEST(Measure, ClipAndRenormalize) {
    Distribution p(4);
    p << 0.6, -0.1, 0.3, 0.2;
    Distribution q = clip_and_renormalize(p);
    EXPECT_EQ(q(1), 0.0);
    EXPECT_NEAR(q.sum(), 1.0, 1e-15);
    EXPECT_NEAR(q(0), 0.6 / 1.1, 1e-15);
}

TEST(Measure, InvalidErrorModel) {
    ErrorModel em;
    em.eps_up = 1.2;
    EXPECT_THROW(em.validate(), ConfigError);
}

TEST(Measure, EstimateCorrelatorExamples) {
    // Half the shots all up, half with atom 0 down.
    std::vector<ShotRecord> shots(100);
    for (int k = 0; k < 100; ++k) shots[k] = ShotRecord{.outcome = std::uint32_t(k % 2 ? 0b100 : 0), .n_atoms = 3, .axes = "zzz"};
    auto e = estimate_correlator(shots, {"z11"});
    EXPECT_NEAR(e.value, 0.0, 1e-15);
    EXPECT_NEAR(e.std_error, std::sqrt(100.0 / 99.0 / 100.0), 1e-12);
    EXPECT_NEAR(estimate_correlator(shots, {"1zz"}).value, 1.0, 1e-15);
    EXPECT_THROW(estimate_correlator(shots, {"x11"}), ConfigError);
    EXPECT_THROW(estimate_correlator({}, {"z11"}), ConfigError);
}

TEST(Measure, CorrelatorFromDistribution) {
    Distribution p = outcome_distribution(pure3(w_state()));
    EXPECT_NEAR(correlator_from_distribution(p, 3, {"zzz"}), -1.0, 1e-12);
    EXPECT_NEAR(correlator_from_distribution(p, 3, {"1z1"}), 1.0 / 3.0, 1e-12);
}

TEST(Measure, ChiralityFromShots) {
    // Exact correlators of chi+ measured with finite shots, no SPAM.
    ErrorModel em;
    em.eps_up = em.eps_down = 0.0;
    auto g = build_triangle_array(12.3, 1);
    auto pat = triangle_pattern();
    auto meas = chirality_measurements(g, pat, kTriangleA);
    auto st = pure3(chi_state(+1));
    auto ccw = ccw_ordering(g, kTriangleA);
    std::array<double, 6> terms{}, errs{};
    for (int k = 0; k < 6; ++k) {
        auto prog = compile_measurement_basis(meas[k].basis);
        ReadoutOptions opt = readout_options(em, pat, prog.has_local(), false, false);
        auto shots = sample_shots(st, prog, pat, em, 500, 100 + k, &opt);
        auto e = estimate_correlator(shots, {shots[0].axes});
        terms[k] = e.value;
        errs[k] = e.std_error;
    }
    auto r = chirality_from_terms(terms, errs);
    double exact = chirality(st, ccw).value;
    EXPECT_NEAR(r.value, exact, 3 * std::max(r.std_error, 0.05));
}

TEST(Measure, HistogramConverges) {
    Distribution p = outcome_distribution(pure3(chi_state(+1)).as_mixed());
    std::vector<double> dev;
    for (int n : {100, 10000, 1000000}) {
        auto shots = sample_distribution(p, 3, n, 17, "zzz");
        dev.push_back((histogram(shots, 3) - p).cwiseAbs().maxCoeff());
    }
    EXPECT_GT(dev[0], dev[2]);
    EXPECT_LT(dev[2], 3e-3);
}

TEST(Measure, SamplingDeterministicInSeed) {
    Distribution p = Distribution::Constant(8, 0.125);
    auto a = sample_distribution(p, 3, 50, 77, "zzz");
    auto b = sample_distribution(p, 3, 50, 77, "zzz");
    auto c = sample_distribution(p, 3, 50, 78, "zzz");
    bool same = true, diff = false;
    for (int k = 0; k < 50; ++k) {
        same &= a[k].outcome == b[k].outcome;
        diff |= a[k].outcome != c[k].outcome;
    }
    EXPECT_TRUE(same);
    EXPECT_TRUE(diff);
}

TEST(Measure, ConnectedEstimate) {
    // Atoms 0 and 1 flip together, atom 2 never: <AB> = 1 with <A> = <B> = 0.
    std::vector<ShotRecord> shots;
    for (int k = 0; k < 200; ++k) shots.push_back({.outcome = std::uint32_t(k % 2 ? 0b110 : 0), .n_atoms = 3, .axes = "zzz"});
    auto e = estimate_connected(shots, {"z11"}, {"1z1"});
    EXPECT_NEAR(e.value, 1.0, 1e-12);
    // A constant factor carries no connected part.
    auto f = estimate_connected(shots, {"1z1"}, {"11z"});
    EXPECT_NEAR(f.value, 0.0, 1e-12);
    std::vector<ShotRecord> c2;
    for (int k = 0; k < 200; ++k) c2.push_back({.outcome = std::uint32_t(k % 2 ? 0b011 : 0), .n_atoms = 3, .axes = "zzz"});
    EXPECT_NEAR(estimate_connected(c2, {"1z1"}, {"11z"}).value, 1.0, 1e-12);
}

TEST(Measure, AtomAxesFollowClasses) {
    auto pat = two_triangle_pattern(1);
    std::string axes = atom_axes(MeasurementBasis::parse("xyz"), pat);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(axes[i], "xyz"[pat.multiplier(i)]);
}
