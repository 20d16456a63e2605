#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "essmc/scenarios.hpp"

using namespace essmc;

namespace {

ScenarioTiming short_timing()
{
    ScenarioTiming t;
    t.t_end = 0.2;
    t.record_stride = 1000;
    return t;
}

}  // namespace

TEST(Scenario, KindNames)
{
    EXPECT_EQ(scenario_kind_from("scan"), ScenarioKind::Scan);
    EXPECT_EQ(scenario_kind_from("machining"), ScenarioKind::Stabilization);
    EXPECT_EQ(scenario_kind_from(to_string(ScenarioKind::Stabilization)), ScenarioKind::Stabilization);
    EXPECT_THROW(scenario_kind_from("milling"), ConfigError);
}

TEST(Scenario, MechanicalDefaults)
{
    const MechanicalParams m;
    EXPECT_NEAR(m.natural_frequency(), std::sqrt(0.73 / 0.0005), 1e-12);
    EXPECT_NO_THROW(m.validate());
    const MechanicalParams w = machining_defaults();
    EXPECT_NEAR(w.k, 73.0, 1e-12);
    EXPECT_NEAR(w.U_force, 20.0, 1e-12);
    EXPECT_NEAR(w.phi.amplitude, w.Phi, 0.0);
    MechanicalParams bad;
    bad.U_force = 1e-5;
    EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Scenario, DefaultComparisonSet)
{
    const auto set = default_comparison_set(0.2);
    ASSERT_EQ(set.size(), 3u);
    EXPECT_EQ(set[0].params.kind, ControllerKind::Sosmc);
    EXPECT_DOUBLE_EQ(set[0].params.beta1, 0.65);
    EXPECT_DOUBLE_EQ(set[1].params.beta1, 0.85);
    EXPECT_DOUBLE_EQ(set[1].params.beta2, 0.27);
    EXPECT_DOUBLE_EQ(set[2].params.beta1, 0.97);
    EXPECT_DOUBLE_EQ(set[2].params.beta2, 0.05);
    for (const auto& c : set) EXPECT_DOUBLE_EQ(c.params.u_max, 0.2);
}

TEST(Scenario, ScanTracksSurfaceWithLessFuel)
{
    const MechanicalParams m;
    const ComparisonReport r = compare_controllers(ScenarioKind::Scan, m, default_comparison_set(m.U_force),
                                                   short_timing());
    ASSERT_EQ(r.entries.size(), 3u);
    EXPECT_NEAR(r.info.surface_p2p, m.target_p2p, 1e-15);
    EXPECT_LT(r.info.delta_ratio_physical, 1.0);
    for (const auto& e : r.entries) {
        EXPECT_TRUE(e.fuel_below_bound) << e.label;
        EXPECT_LT(e.tracking_max, 0.05 * m.X) << e.label;
        EXPECT_EQ(e.clamp_count, 0) << e.label;
        EXPECT_FALSE(std::isnan(e.t_reach));
    }
    EXPECT_LT(r.entries[1].final_E, 0.95 * r.entries[0].final_E);
    EXPECT_LT(r.entries[2].final_E, 0.95 * r.entries[0].final_E);

    const ScenarioTrace& tr = r.traces[1];
    ASSERT_EQ(tr.t.size(), 201u);
    for (std::size_t k = 0; k < tr.t.size(); ++k) EXPECT_NEAR(tr.rel[k], tr.x[k] - tr.x0[k], 1e-20);
}

TEST(Scenario, SharedSeedGivesIdenticalRuns)
{
    const MechanicalParams m;
    const auto set = default_comparison_set(m.U_force);
    const ComparisonReport a = compare_controllers(ScenarioKind::Scan, m, set, short_timing());
    const ComparisonReport b = compare_controllers(ScenarioKind::Scan, m, set, short_timing());
    EXPECT_EQ(a.traces[2].x, b.traces[2].x);
    EXPECT_EQ(a.entries[2].final_E, b.entries[2].final_E);
}

TEST(Scenario, StabilizationHoldsReference)
{
    const MechanicalParams m = machining_defaults();
    const ComparisonReport r = compare_controllers(ScenarioKind::Stabilization, m, default_comparison_set(m.U_force),
                                                   short_timing());
    for (const auto& e : r.entries) EXPECT_LT(e.tracking_max, 1e-6) << e.label;
}

TEST(Scenario, CouplingBeyondBoundIsAnError)
{
    MechanicalParams m;
    m.F = 1e-9;
    m.U_force = 0.2;
    EXPECT_THROW(
        compare_controllers(ScenarioKind::Scan, m, default_comparison_set(m.U_force), short_timing()),
        DomainError);
}

TEST(Scenario, InfeasibleControllerRejected)
{
    const MechanicalParams m;
    auto set = default_comparison_set(m.U_force);
    set[1].params.beta1 = 0.2;
    set[1].params.beta2 = 0.1;
    EXPECT_THROW(compare_controllers(ScenarioKind::Scan, m, set, short_timing()), InfeasibleError);
}

TEST(Scenario, CsvHeader)
{
    const MechanicalParams m;
    ScenarioTiming t = short_timing();
    t.t_end = 0.01;
    const ComparisonReport r = run_scan_scenario(m, default_comparison_set(m.U_force)[0], t);
    std::ostringstream os;
    write_scenario_csv(os, r.traces[0]);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,x,x0,x_minus_x0,sigma,u,E");
}
