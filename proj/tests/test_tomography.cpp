#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "rydberg/tomography.hpp"

using namespace rydberg;

namespace {

// Projector probability of outcome o when atom i measures axes[i];
// read up means the +1 eigenvalue.
double projector_prob(const Mat& rho, const std::string& axes, int o) {
    Mat P = Mat::Identity(1, 1);
    for (int i = 0; i < 3; ++i) {
        int s = (o >> (2 - i)) & 1 ? -1 : 1;
        P = oracle::kron(P, 0.5 * (Mat::Identity(2, 2) + double(s) * oracle::pauli(axes[i])));
    }
    return oracle::expect(rho, P);
}

TomographyDataset shot_dataset(const Vec& psi, int shots, std::uint64_t seed, const ErrorModel& em) {
    std::vector<std::vector<ShotRecord>> per;
    auto st = QuantumState::pure(Space{AtomModel::Qubit, 3}, psi);
    int k = 0;
    for (const auto& b : all_bases()) {
        auto prog = compile_measurement_basis(b);
        ReadoutOptions opt = readout_options(em, triangle_pattern(), prog.has_local(), true, false);
        per.push_back(sample_shots(st, prog, triangle_pattern(), em, shots, seed + k++, &opt));
    }
    return dataset_from_shots(per);
}

} // namespace

TEST(Tomography, ForwardModelExamples) {
    Mat mixed = Mat::Identity(8, 8) / 8.0;
    for (const auto& b : all_bases())
        EXPECT_LT((forward_model(mixed, b) - Eigen::VectorXd::Constant(8, 0.125)).norm(), 1e-12);
    Vec w = w_state();
    Distribution p = forward_model(w * w.adjoint(), MeasurementBasis::parse("zzz"));
    for (const char* s : {"duu", "udu", "uud"}) EXPECT_NEAR(p(oracle::index_of(s)), 1.0 / 3.0, 1e-12);
    Vec up = Vec::Zero(8);
    up(0) = 1;
    EXPECT_LT((forward_model(up * up.adjoint(), MeasurementBasis::parse("xxx")) - Eigen::VectorXd::Constant(8, 0.125)).norm(),
              1e-12);
}

TEST(Tomography, ForwardModelMatchesProjectors) {
    std::mt19937_64 rng(31);
    Mat rho = oracle::random_density(8, rng);
    for (const auto& b : all_bases()) {
        Distribution p = forward_model(rho, b);
        for (int o = 0; o < 8; ++o) EXPECT_NEAR(p(o), projector_prob(rho, b.label(), o), 1e-12) << b.label();
    }
}

TEST(Tomography, CholeskyRoundTrip) {
    EXPECT_LT((CholeskyParams::identity().density() - Mat::Identity(8, 8) / 8.0).norm(), 1e-14);
    std::mt19937_64 rng(32);
    Mat T = Mat::Zero(8, 8);
    std::normal_distribution<double> n;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j <= i; ++j) T(i, j) = i == j ? cplx(std::abs(n(rng)) + 0.1, 0) : cplx(n(rng), n(rng));
    EXPECT_LT((CholeskyParams::from_matrix(T).matrix() - T).norm(), 1e-14);
}

TEST(Tomography, DensityValidForRandomParameters) {
    std::mt19937_64 rng(33);
    std::normal_distribution<double> n;
    for (int t = 0; t < 50; ++t) {
        CholeskyParams p;
        for (int k = 0; k < kTomoParams; ++k) p.t(k) = n(rng);
        Mat rho = p.density();
        EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
        EXPECT_LT((rho - rho.adjoint()).norm(), 1e-13);
        Eigen::SelfAdjointEigenSolver<Mat> es(rho);
        EXPECT_GT(es.eigenvalues().minCoeff(), -1e-13);
    }
}

TEST(Tomography, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(34);
    TomographyCost cost(forward_dataset(oracle::random_density(8, rng)));
    std::normal_distribution<double> n;
    CholeskyParams p;
    for (int k = 0; k < kTomoParams; ++k) p.t(k) = n(rng);
    Eigen::VectorXd g;
    double f = cost.value_and_gradient(p, g);
    EXPECT_NEAR(f, cost.value(p), 1e-14);
    const double h = 1e-6;
    for (int k = 0; k < kTomoParams; ++k) {
        CholeskyParams a = p, b = p;
        a.t(k) += h;
        b.t(k) -= h;
        double fd = (cost.value(a) - cost.value(b)) / (2 * h);
        EXPECT_NEAR(g(k), fd, 1e-6 * std::max(1.0, std::abs(fd))) << k;
    }
}

TEST(Tomography, UniformDataGivesMaximallyMixed) {
    TomographyDataset d = forward_dataset(Mat::Identity(8, 8) / 8.0);
    auto r = mle_reconstruct(d);
    EXPECT_LT((r.rho - Mat::Identity(8, 8) / 8.0).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Tomography, ExactWRecovered) {
    Vec w = w_state();
    auto r = mle_reconstruct(forward_dataset(w * w.adjoint()));
    EXPECT_GT(fidelity(r.rho, w), 0.999);
}

TEST(Tomography, RandomFullRankRecovered) {
    std::mt19937_64 rng(35);
    for (int t = 0; t < 3; ++t) {
        Mat rho = oracle::random_density(8, rng);
        auto r = mle_reconstruct(forward_dataset(rho));
        EXPECT_LT(trace_distance(r.rho, rho), 1e-4);
    }
}

TEST(Tomography, CostHistoryNonIncreasing) {
    std::mt19937_64 rng(36);
    auto r = mle_reconstruct(forward_dataset(oracle::random_density(8, rng)));
    ASSERT_GE(r.cost_history.size(), 2u);
    for (std::size_t k = 1; k < r.cost_history.size(); ++k)
        EXPECT_LE(r.cost_history[k], r.cost_history[k - 1] + 1e-15);
    EXPECT_TRUE(r.converged);
}

TEST(Tomography, ShotDataOfChiPlus) {
    // Expected fidelity at 500 shots per basis, averaged over datasets.
    ErrorModel em;
    em.eps_up = em.eps_down = 0.0;
    Vec chi = chi_state(+1);
    double sum = 0.0;
    for (int d = 0; d < 5; ++d) sum += fidelity(mle_reconstruct(shot_dataset(chi, 500, 400 + 100 * d, em)).rho, chi);
    EXPECT_GT(sum / 5, 0.97);
}

TEST(Tomography, CorrectionImprovesFidelity) {
    ErrorModel em;
    Vec w = w_state();
    auto data = shot_dataset(w, 2000, 500, em);
    double raw = fidelity(mle_reconstruct(data).rho, w);
    double corr = fidelity(mle_reconstruct(correct_dataset(data, em)).rho, w);
    EXPECT_GT(corr, raw);
}

TEST(Tomography, FidelityAndWitness) {
    Vec w = w_state();
    Mat rho = w * w.adjoint();
    EXPECT_NEAR(fidelity(rho, w), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(Mat::Identity(8, 8) / 8.0, w), 0.125, 1e-12);
    EXPECT_NEAR(fidelity(rho, chi_state(+1)), 0.0, 1e-12);
    EXPECT_TRUE(entanglement_witness(rho, w));
    EXPECT_FALSE(entanglement_witness(Mat::Identity(8, 8) / 8.0, w));
    Mat mix = 0.6 * rho + 0.4 * Mat::Identity(8, 8) / 8.0;
    EXPECT_NEAR(fidelity(mix, w), 0.65, 1e-12);
    EXPECT_FALSE(entanglement_witness(mix, w));
}

TEST(Tomography, TraceDistance) {
    Vec w = w_state(), c = chi_state(+1);
    EXPECT_NEAR(trace_distance(w * w.adjoint(), c * c.adjoint()), 1.0, 1e-12);
    EXPECT_NEAR(trace_distance(w * w.adjoint(), w * w.adjoint()), 0.0, 1e-12);
}

TEST(Tomography, TargetStates) {
    EXPECT_NEAR(oracle::expect(w_state(), oracle::pauli_string("zzz")), -1.0, 1e-12);
    EXPECT_LT((chi_state(+1) - oracle::imprinted_w(2 * kPi / 3)).norm(), 1e-12);
    EXPECT_LT((chi_state(-1) - oracle::imprinted_w(4 * kPi / 3)).norm(), 1e-12);
}

TEST(Tomography, DatasetValidation) {
    TomographyDataset d = forward_dataset(Mat::Identity(8, 8) / 8.0);
    EXPECT_TRUE(d.missing_bases().empty());
    d.bases.pop_back();
    d.probabilities.pop_back();
    d.shots.pop_back();
    ASSERT_EQ(d.missing_bases().size(), 1u);
    EXPECT_EQ(d.missing_bases()[0], "zzz");
    d.probabilities[0](0) += 0.1;
    EXPECT_THROW(d.validate(), ConfigError);
    EXPECT_THROW(forward_model(Mat::Identity(4, 4), MeasurementBasis{}), ConfigError);
}
