#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "feederopt/ieee33.hpp"
#include "feederopt/scenario.hpp"

using namespace feederopt;

namespace {

ObjectiveWeights raw_weights(double w1, double w2) {
    ObjectiveWeights w;
    w.w1 = w1;
    w.w2 = w2;
    w.normalized = false;
    w.p_loss_ref_kw = 1.0;
    w.v_dev_ref = 1.0;
    return w;
}

// Two-hour toy instance on a 3-bus chain: heavy load in hour 0, light load
// in hour 1, a single sector, 10 homes per bus.
struct ToyProblem {
    RadialNetwork net;
    SectorMap sectors;
    HourlyProfileSet profiles;

    ToyProblem()
        : net({{1, 0, 0, 0, 0}, {2, 0, 0, 10, 0}, {3, 0, 0, 10, 0}},
              {{1, 2, 2.0, 1.0, 400}, {2, 3, 3.0, 1.5, 400}}, 11.0, 1.0),
          sectors(SectorMap::default_map(net, 1)) {
        profiles = HourlyProfileSet::zeros(net);
        for (int id : {2, 3}) {
            profiles.p_res_kw[id][0] = 500.0;
            profiles.p_res_kw[id][1] = 50.0;
        }
    }

    EvalSetup setup() const {
        EvalSetup s;
        s.net = &net;
        s.sectors = &sectors;
        s.profiles = &profiles;
        s.alpha = 0.5;
        s.battery.beta = 0.5;
        s.battery.e_bt_user_kwh = 10.0;
        s.battery.p_max_kw_per_home = 5.0;
        s.battery.soc_init_pct = 50.0;
        s.flags = {true, true};
        s.horizon_hours = 2;
        return s;
    }
};

} // namespace

TEST_CASE("PSO matches exhaustive enumeration on the 2-dimensional toy") {
    ToyProblem toy;
    EvalSetup setup = toy.setup();
    const ObjectiveWeights w = raw_weights(1.0, 1.0);

    // brute-force oracle: 11 x 11 grid over the per-home command box
    double grid_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10; ++i) {
        for (int j = 0; j <= 10; ++j) {
            DispatchSchedule s(1, 2);
            s.set(1, 0, -5.0 + i);
            s.set(1, 1, -5.0 + j);
            grid_best = std::min(grid_best, evaluate_day(setup, s, w).cost);
        }
    }

    SwarmConfig cfg;
    cfg.particles = 30;
    cfg.iterations = 60;
    cfg.seed = 21;
    const ScheduleOptimum opt = optimize_schedule(setup, w, cfg);
    CHECK(opt.breakdown.cost <= grid_best * 1.02);
    // discharging into the heavy hour must beat doing nothing
    const CostBreakdown zero = evaluate_day(setup, DispatchSchedule(1, 2), w);
    CHECK(opt.breakdown.cost < zero.cost);
    CHECK(opt.schedule.at(1, 0) < 0.0);
}

TEST_CASE("optimizer never does harm") {
    ToyProblem toy;
    EvalSetup setup = toy.setup();
    setup.battery.beta = 0.0; // no dispatchable energy: nothing can improve
    const ObjectiveWeights w = raw_weights(1.0, 1.0);

    SwarmConfig cfg;
    cfg.particles = 10;
    cfg.iterations = 10;
    cfg.seed = 4;
    const ScheduleOptimum opt = optimize_schedule(setup, w, cfg);
    const CostBreakdown zero = evaluate_day(setup, DispatchSchedule(1, 2), w);
    CHECK(opt.breakdown.cost <= zero.cost + 1e-12);
    CHECK(opt.breakdown.cost == Catch::Approx(zero.cost));
}

TEST_CASE("scenario runner") {
    const RadialNetwork net = ieee33::network();
    const SectorMap sectors = SectorMap::default_map(net, 7);
    SyntheticProfileParams sp;
    sp.ev.seed = 3;
    sp.ev.vehicles_per_bus = 5;
    sp.solar_peak_kw = 2.0;
    const HourlyProfileSet profiles = synth_profiles(net, sp);

    ScenarioInputs inputs;
    inputs.net = &net;
    inputs.sectors = &sectors;
    inputs.profiles = &profiles;
    inputs.battery.beta = 0.3;
    inputs.swarm.particles = 8;
    inputs.swarm.iterations = 10;
    inputs.swarm.seed = 17;

    SECTION("grid-only with zero profiles costs nothing") {
        const HourlyProfileSet zeros = HourlyProfileSet::zeros(net);
        ScenarioInputs zin = inputs;
        zin.profiles = &zeros;
        const ScenarioResult r = run_scenario({ScenarioKind::grid_only, 0.7, 0.3}, zin);
        CHECK(r.breakdown.cost == Catch::Approx(0.0).margin(1e-9));
        CHECK(r.voltage_band_ok);
    }
    SECTION("trajectories cover the requested buses for all 24 hours") {
        const ScenarioResult r = run_scenario({ScenarioKind::grid_ev, 0.7, 0.3}, inputs);
        REQUIRE(r.v_traj_pu.count(18) == 1);
        REQUIRE(r.v_traj_pu.count(33) == 1);
        CHECK(r.v_traj_pu.at(18).size() == 24);
        CHECK(r.v_traj_pu.at(33).size() == 24);
        for (double v : r.v_traj_pu.at(18))
            CHECK((v > 0.5 && v < 1.5));
    }
    SECTION("proposed never exceeds the matching baseline") {
        const ScenarioResult base = run_scenario({ScenarioKind::grid_ev_nbbsr, 0.7, 0.3}, inputs);
        const ScenarioResult prop = run_scenario({ScenarioKind::proposed, 0.7, 0.3}, inputs);
        CHECK(prop.breakdown.cost <= base.breakdown.cost + 1e-9);
        CHECK(base.improvements.empty());
        // proposed runs carry reductions against all three baselines
        REQUIRE(prop.improvements.size() == 3);
        CHECK(prop.improvements[0].baseline_name == "grid_only");
        CHECK(prop.improvements[2].baseline_name == "grid_ev_nbbsr");
        REQUIRE(prop.improvements[2].cost_reduction_pct.has_value());
        const double expected =
            (base.breakdown.cost - prop.breakdown.cost) / base.breakdown.cost * 100.0;
        CHECK(*prop.improvements[2].cost_reduction_pct == Catch::Approx(expected));
    }
    SECTION("band feasibility flag agrees with the trajectories") {
        ScenarioInputs all_buses = inputs;
        all_buses.trajectory_buses.clear();
        for (const Bus& b : net.buses())
            if (b.id != kSlackBusId)
                all_buses.trajectory_buses.push_back(b.id);
        const ScenarioResult r = run_scenario({ScenarioKind::grid_ev, 0.7, 0.3}, all_buses);
        int violations = 0;
        for (const auto& [bus, series] : r.v_traj_pu)
            for (double v : series)
                if (std::abs(v - 1.0) > all_buses.voltage_band)
                    ++violations;
        CHECK(r.voltage_band_ok == (violations == 0 && r.all_hours_converged));
        CHECK(r.band_violation_bus_hours == violations);
    }
}

TEST_CASE("alpha/beta sweep") {
    const RadialNetwork net = ieee33::network();
    const SectorMap sectors = SectorMap::default_map(net, 7);
    SyntheticProfileParams sp;
    sp.ev.seed = 3;
    sp.ev.vehicles_per_bus = 5;
    sp.solar_peak_kw = 2.0;
    const HourlyProfileSet profiles = synth_profiles(net, sp);

    ScenarioInputs inputs;
    inputs.net = &net;
    inputs.sectors = &sectors;
    inputs.profiles = &profiles;
    inputs.swarm.particles = 6;
    inputs.swarm.iterations = 6;

    SECTION("singleton sweep's argmin is its only cell") {
        const SweepResult r = sweep_alpha_beta({0.7}, {0.3}, inputs, 1);
        REQUIRE(r.cells.size() == 1);
        CHECK(r.argmin_index == 0);
        CHECK(r.cells[0].ok);
    }
    SECTION("grid shape and argmin rescan") {
        const SweepResult r = sweep_alpha_beta({0.0, 0.7}, {0.0, 0.3}, inputs, 1);
        REQUIRE(r.cells.size() == 4);
        REQUIRE(r.argmin_index >= 0);
        for (const SweepCell& c : r.cells)
            if (c.ok)
                CHECK(r.cells[r.argmin_index].breakdown.cost <= c.breakdown.cost);
    }
    SECTION("sweeps are reproducible cell by cell") {
        const SweepResult a = sweep_alpha_beta({0.5, 0.7}, {0.3}, inputs, 42);
        const SweepResult b = sweep_alpha_beta({0.5, 0.7}, {0.3}, inputs, 42);
        REQUIRE(a.cells.size() == b.cells.size());
        for (std::size_t i = 0; i < a.cells.size(); ++i)
            CHECK(a.cells[i].breakdown.cost == b.cells[i].breakdown.cost);
    }
    SECTION("cell seeds differ across cells but not across runs") {
        CHECK(cell_seed(1, 0.5, 0.3) != cell_seed(1, 0.7, 0.3));
        CHECK(cell_seed(1, 0.5, 0.3) != cell_seed(1, 0.5, 0.0));
        CHECK(cell_seed(1, 0.5, 0.3) == cell_seed(1, 0.5, 0.3));
        CHECK(cell_seed(2, 0.5, 0.3) != cell_seed(1, 0.5, 0.3));
    }
    SECTION("empty grids are rejected") {
        CHECK_THROWS_AS(sweep_alpha_beta({}, {0.3}, inputs, 1), ConfigError);
        CHECK_THROWS_AS(sweep_alpha_beta({0.5}, {1.5}, inputs, 1), ConfigError);
    }
    SECTION("a failing cell is recorded, not fatal") {
        ScenarioInputs broken = inputs;
        broken.trajectory_buses = {999}; // no such bus
        const SweepResult r = sweep_alpha_beta({0.5}, {0.0, 0.3}, broken, 1);
        REQUIRE(r.cells.size() == 2);
        for (const SweepCell& c : r.cells) {
            CHECK_FALSE(c.ok);
            CHECK_FALSE(c.error.empty());
        }
        CHECK(r.argmin_index == -1);
    }
}

TEST_CASE("improvement report") {
    CostBreakdown proposed;
    proposed.p_loss_total_kw = 3527.4;
    proposed.avg_v_dev_pct = 4.34;
    proposed.cost = 16.55407;

    SECTION("identical baseline gives zero deltas") {
        const auto rows = improvement_report({{"self", proposed}}, proposed);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].loss_reduction_pct.value() == Catch::Approx(0.0));
        CHECK(rows[0].dev_reduction_pct.value() == Catch::Approx(0.0));
        CHECK(rows[0].cost_reduction_pct.value() == Catch::Approx(0.0));
    }
    SECTION("loss 7541.6 -> 3527.4 is a 53.2% reduction") {
        CostBreakdown grid_ev;
        grid_ev.p_loss_total_kw = 7541.6;
        grid_ev.avg_v_dev_pct = 7.41;
        grid_ev.cost = 28.6454;
        const auto rows = improvement_report({{"grid_ev", grid_ev}}, proposed);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].loss_reduction_pct.value() == Catch::Approx(53.2).margin(0.05));
    }
    SECTION("zero baseline is flagged undefined") {
        CostBreakdown zero;
        const auto rows = improvement_report({{"zero", zero}}, proposed);
        REQUIRE(rows.size() == 1);
        CHECK_FALSE(rows[0].loss_reduction_pct.has_value());
        CHECK_FALSE(rows[0].cost_reduction_pct.has_value());
    }
}
