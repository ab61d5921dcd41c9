#include <gtest/gtest.h>

#include <cmath>

#include "rydberg/montecarlo.hpp"

using namespace rydberg;

namespace {

ExperimentPlan ramsey_plan(int realizations, ErrorToggles t) {
    ExperimentPlan p;
    p.kind = PlanKind::Ramsey;
    p.name = "ramsey_test";
    p.sweep = default_sweep(PlanKind::Ramsey);
    p.realizations = realizations;
    p.toggles = t;
    return p;
}

ErrorToggles ramsey_noise() {
    ErrorToggles t = ErrorToggles::all_off();
    t.lightshift = t.jitter = t.pulses = true;
    return t;
}

ExperimentPlan adiabatic_plan(int pattern, double separation, ErrorToggles t) {
    ExperimentPlan p;
    p.kind = PlanKind::Adiabatic;
    p.pattern = pattern;
    p.separation = separation;
    p.sweep = {3.0};
    p.realizations = 2;
    p.toggles = t;
    return p;
}

} // namespace

TEST(MonteCarlo, ToggleNames) {
    ErrorToggles t;
    ASSERT_EQ(ErrorToggles::names().size(), 10u);
    for (const auto& n : ErrorToggles::names()) {
        EXPECT_TRUE(t.get(n));
        t.set(n, false);
        EXPECT_FALSE(t.get(n));
    }
    EXPECT_THROW(t.set("gravity", true), ConfigError);
    EXPECT_THROW(t.get("gravity"), ConfigError);
    EXPECT_EQ(ErrorToggles::all_off().required_model(), AtomModel::Qubit);
    EXPECT_EQ(ErrorToggles::all_on().required_model(), AtomModel::FiveLevel);
}

TEST(MonteCarlo, DeriveSeedStable) {
    EXPECT_EQ(derive_seed(1, 1, 0, 0), derive_seed(1, 1, 0, 0));
    EXPECT_NE(derive_seed(1, 1, 0, 0), derive_seed(1, 1, 0, 1));
    EXPECT_NE(derive_seed(1, 1, 0, 0), derive_seed(1, 2, 0, 0));
    EXPECT_NE(derive_seed(1, 1, 0, 0), derive_seed(1, 1, 1, 0));
    EXPECT_NE(derive_seed(1, 1, 0, 0), derive_seed(2, 1, 0, 0));
}

TEST(MonteCarlo, PlanValidation) {
    ExperimentPlan p = ramsey_plan(1, ErrorToggles::all_off());
    p.realizations = 0;
    EXPECT_THROW(p.validate(), ConfigError);
    p.realizations = 1;
    p.pattern = 3;
    EXPECT_THROW(p.validate(), ConfigError);
    p.pattern = 0;
    p.sweep.clear();
    EXPECT_THROW(run_plan(p), ConfigError);
    EXPECT_THROW(parse_plan_kind("rabi"), ConfigError);
    EXPECT_EQ(parse_plan_kind(to_string(PlanKind::WBudget)), PlanKind::WBudget);
}

TEST(MonteCarlo, ReduceStatistics) {
    SweepRow r = reduce(0.5, "x", {1.0, 2.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(r.mean, 2.5);
    EXPECT_NEAR(r.std, std::sqrt(5.0 / 3.0), 1e-15);
    EXPECT_NEAR(r.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
    EXPECT_EQ(r.n, 4);
}

TEST(MonteCarlo, RealizeKeepsIndexOrder) {
    auto s = realize_serial(50, [](int r) { return r * r; });
    auto p = realize_parallel(50, [](int r) { return r * r; });
    EXPECT_EQ(s, p);
    EXPECT_THROW(realize_parallel(4, [](int r) -> int {
                     if (r == 2) throw NumericalError("x");
                     return r;
                 }),
                 NumericalError);
}

TEST(MonteCarlo, RamseyIdealQuadratures) {
    auto res = run_plan(ramsey_plan(1, ErrorToggles::all_off()));
    auto c0 = res.series("sz_class0"), c1 = res.series("sz_class1"), c2 = res.series("sz_class2");
    for (std::size_t k = 0; k < c0.size(); ++k) {
        EXPECT_NEAR(c2[k], 0.0, 1e-9);
        EXPECT_NEAR(c0[k] * c0[k] + c1[k] * c1[k], 1.0, 1e-9);
    }
    double mx0 = 0, mx1 = 0;
    for (std::size_t k = 0; k < c0.size(); ++k) {
        mx0 = std::max(mx0, std::abs(c0[k]));
        mx1 = std::max(mx1, std::abs(c1[k]));
    }
    EXPECT_GT(mx0, 0.99);
    EXPECT_GT(mx1, 0.99);
}

TEST(MonteCarlo, Deterministic) {
    auto p = ramsey_plan(6, ramsey_noise());
    p.shots = 50;
    auto a = run_plan(p), b = run_plan(p);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        EXPECT_EQ(a.rows[k].mean, b.rows[k].mean);
        EXPECT_EQ(a.rows[k].std, b.rows[k].std);
    }
    EXPECT_EQ(a.realization_seeds, b.realization_seeds);
    p.seed = 2;
    auto c = run_plan(p);
    bool differ = false;
    for (std::size_t k = 0; k < a.rows.size(); ++k) differ |= a.rows[k].mean != c.rows[k].mean;
    EXPECT_TRUE(differ);
}

TEST(MonteCarlo, SerialMatchesParallel) {
    auto p = ramsey_plan(8, ramsey_noise());
    p.shots = 40;
    p.parallel = false;
    auto s = run_plan(p);
    p.parallel = true;
    auto q = run_plan(p);
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
        EXPECT_EQ(s.rows[k].mean, q.rows[k].mean);
        EXPECT_EQ(s.rows[k].std, q.rows[k].std);
    }
}

TEST(MonteCarlo, StandardErrorShrinks) {
    auto few = run_plan(ramsey_plan(20, ramsey_noise()));
    auto many = run_plan(ramsey_plan(80, ramsey_noise()));
    double se_few = 0, se_many = 0;
    for (const auto& r : few.rows) se_few += r.std_error;
    for (const auto& r : many.rows) se_many += r.std_error;
    ASSERT_GT(se_few, 0.0);
    // Expected ratio 2; allow sampling scatter of the std estimates.
    EXPECT_GT(se_few / se_many, 1.5);
    EXPECT_LT(se_few / se_many, 2.7);
}

TEST(MonteCarlo, ReadoutReducesContrast) {
    auto ideal = run_plan(ramsey_plan(1, ErrorToggles::all_off()));
    ErrorToggles t = ErrorToggles::all_off();
    t.readout = true;
    auto noisy = run_plan(ramsey_plan(1, t));
    double a = 0, b = 0;
    for (double v : ideal.series("sz_class0")) a = std::max(a, std::abs(v));
    for (double v : noisy.series("sz_class0")) b = std::max(b, std::abs(v));
    ErrorModel em;
    EXPECT_NEAR(b, a * (1 - em.eps_up - em.eps_down), 0.02);
}

TEST(MonteCarlo, NoiseDrawsIndependentOfOtherToggles) {
    ExperimentPlan p = ramsey_plan(1, ErrorToggles::all_on());
    auto g = p.geometry();
    auto a = draw_noise(p, g, AtomModel::Qubit, 99);
    p.toggles.jitter = false;
    auto b = draw_noise(p, g, AtomModel::Qubit, 99);
    EXPECT_EQ(a.lightshift_scale, b.lightshift_scale);
    EXPECT_EQ(b.jitter, 0.0);
    EXPECT_EQ(a.disorder.offset[1], b.disorder.offset[1]);
}

TEST(MonteCarlo, BudgetMonotone) {
    ExperimentPlan p;
    p.kind = PlanKind::WBudget;
    p.realizations = 6;
    auto rows = error_budget(p);
    ASSERT_EQ(rows.front().mechanism, "none");
    EXPECT_GT(rows.front().fidelity, 0.97);
    for (const auto& r : rows) {
        double se = r.std / std::sqrt(double(p.realizations));
        EXPECT_LE(r.fidelity, rows.front().fidelity + 1e-3 + 3 * se) << r.mechanism;
    }
    EXPECT_LT(rows.back().fidelity, rows.front().fidelity);
}

TEST(MonteCarlo, WResonanceIsTriangleOnly) {
    EXPECT_THROW(w_resonance(build_triangle_array(12.3, 2, 25.0), PhysicalModel{}), ConfigError);
}

TEST(MonteCarlo, AdiabaticSigns) {
    ErrorToggles off = ErrorToggles::all_off();
    auto s1 = adiabatic_experiment(adiabatic_plan(1, 25.0, off));
    auto s2 = adiabatic_experiment(adiabatic_plan(2, 25.0, off));
    EXPECT_LT(s1.chichi_exact[0], -0.5);
    EXPECT_GT(s2.chichi_exact[0], 0.5);
    EXPECT_GT(s1.p0[0], 0.9);
    EXPECT_GT(s2.p1[0], 0.9);
    auto far = adiabatic_experiment(adiabatic_plan(1, 72.0, off));
    EXPECT_LT(std::abs(far.chichi_exact[0]), std::abs(s1.chichi_exact[0]));
}

TEST(MonteCarlo, AdiabaticRejectsOtherKinds) {
    EXPECT_THROW(adiabatic_experiment(ramsey_plan(1, ErrorToggles::all_off())), ConfigError);
}
