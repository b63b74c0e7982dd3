// Acceptance suite: exercises the toolkit end to end and prints one PASS/FAIL
// line per criterion. Exits non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "feederopt/feederopt.hpp"

namespace fs = std::filesystem;
using namespace feederopt;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << ": " << name;
    if (!detail.empty())
        std::cout << " [" << detail << "]";
    std::cout << "\n";
    if (!pass)
        ++g_failures;
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ObjectiveWeights raw_weights(double w1, double w2) {
    ObjectiveWeights w;
    w.w1 = w1;
    w.w2 = w2;
    w.normalized = false;
    w.p_loss_ref_kw = 1.0;
    w.v_dev_ref = 1.0;
    return w;
}

// ---- criterion 1: base-case losses ----------------------------------------

void criterion_base_case() {
    const RadialNetwork net = RadialNetwork::from_csv(fs::path(FEEDEROPT_DATA_DIR) /
                                                          "ieee33_buses.csv",
                                                      fs::path(FEEDEROPT_DATA_DIR) /
                                                          "ieee33_lines.csv",
                                                      11.0, 1.0);
    const auto t0 = Clock::now();
    const PowerFlowSolution sol = solve(net, BusInjection::nominal(net));
    const double dt = seconds_since(t0);

    const double p_err = std::abs(sol.p_loss_kw - 281.58) / 281.58;
    const double q_err = std::abs(sol.q_loss_kvar - 187.95) / 187.95;
    std::ostringstream detail;
    detail << "p_loss=" << sol.p_loss_kw << " kW (ref 281.58, err " << p_err * 100.0
           << "%), q_loss=" << sol.q_loss_kvar << " kVAr (ref 187.95, err " << q_err * 100.0
           << "%), solve " << dt * 1e3 << " ms";
    report(1, "base-case load flow at 11 kV within 2%",
           sol.converged && p_err < 0.02 && q_err < 0.02 && dt < 1.0, detail.str());
}

// ---- criterion 2: closed-form oracles --------------------------------------

void criterion_oracles() {
    bool pass = true;
    std::ostringstream detail;

    // 2-bus: V^2 - V + R P = 0
    {
        std::vector<Bus> buses{{1, 0, 0, 0, 0}, {2, 0, 0, 0, 0}};
        std::vector<Line> lines{{1, 2, 1.0, 0.0, 400}};
        const RadialNetwork net(buses, lines, 11.0, 1.0);
        BusInjection inj = BusInjection::zeros(net);
        inj.p_kw[net.index_of(2)] = 1000.0;
        SolveOptions opts;
        opts.tol_pu = 1e-12;
        const PowerFlowSolution sol = solve(net, inj, opts);
        const double r_pu = 1.0 / 121.0;
        const double v2 = (1.0 + std::sqrt(1.0 - 4.0 * r_pu)) / 2.0;
        const double err = std::abs(sol.v_pu[net.index_of(2)] - v2);
        pass &= sol.converged && err < 1e-8;
        detail << "2-bus |dV|=" << err;
    }
    // 3-bus chain, loads at both buses, bisection oracle
    {
        std::vector<Bus> buses{{1, 0, 0, 0, 0}, {2, 0, 0, 0, 0}, {3, 0, 0, 0, 0}};
        std::vector<Line> lines{{1, 2, 2.0, 0.0, 400}, {2, 3, 3.0, 0.0, 400}};
        const RadialNetwork net(buses, lines, 11.0, 1.0);
        BusInjection inj = BusInjection::zeros(net);
        inj.p_kw[net.index_of(2)] = 400.0;
        inj.p_kw[net.index_of(3)] = 700.0;
        SolveOptions opts;
        opts.tol_pu = 1e-13;
        const PowerFlowSolution sol = solve(net, inj, opts);

        const double r1 = 2.0 / 121.0, r2 = 3.0 / 121.0, p2 = 0.4, p3 = 0.7;
        auto v3_of = [&](double v2) {
            return (v2 + std::sqrt(v2 * v2 - 4.0 * r2 * p3)) / 2.0;
        };
        auto residual = [&](double v2) {
            return v2 - (1.0 - r1 * (p2 / v2 + p3 / v3_of(v2)));
        };
        double lo = 0.5, hi = 1.0;
        for (int i = 0; i < 200; ++i) {
            const double mid = (lo + hi) / 2.0;
            (residual(mid) > 0.0 ? hi : lo) = mid;
        }
        const double v2 = (lo + hi) / 2.0;
        const double err2 = std::abs(sol.v_pu[net.index_of(2)] - v2);
        const double err3 = std::abs(sol.v_pu[net.index_of(3)] - v3_of(v2));
        pass &= sol.converged && err2 < 1e-8 && err3 < 1e-8;
        detail << ", 3-bus |dV2|=" << err2 << " |dV3|=" << err3;
    }
    report(2, "solver matches closed-form oracles to 1e-8 p.u.", pass, detail.str());
}

// ---- criterion 3: conservation ---------------------------------------------

void criterion_conservation() {
    const RadialNetwork net = ieee33::network();
    std::mt19937_64 rng(2024);
    auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    double worst = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 100; ++trial) {
        BusInjection inj = BusInjection::zeros(net);
        double sum_p = 0.0;
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            if (static_cast<int>(i) == net.slack_index())
                continue;
            inj.p_kw[i] = net.buses()[i].p_load_kw * 1.5 * u01();
            inj.q_kvar[i] = net.buses()[i].q_load_kvar * 1.5 * u01();
            sum_p += inj.p_kw[i];
        }
        const PowerFlowSolution sol = solve(net, inj);
        pass &= sol.converged;
        const double mismatch_pu =
            std::abs(sol.slack_p_kw - (sum_p + sol.p_loss_kw)) / (net.base_mva() * 1000.0);
        worst = std::max(worst, mismatch_pu);
    }
    pass &= worst < 1e-6;
    std::ostringstream detail;
    detail << "100 random injection sets, worst |mismatch| = " << worst << " x base power";
    report(3, "slack power equals loads plus losses within 1e-6 x base", pass, detail.str());
}

// ---- criterion 4: battery bookkeeping --------------------------------------

void criterion_battery() {
    const RadialNetwork net = ieee33::network();
    const SectorMap sectors = SectorMap::default_map(net, 7);
    BatteryParams params;
    params.beta = 0.3;
    const double alpha = 0.7; // 28 battery homes, e_max 84 kWh, start 42 kWh
    std::mt19937_64 rng(77);
    auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    bool pass = true;
    int feasible_runs = 0, infeasible_runs = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        // half the schedules are small enough to stay in bounds by construction
        const double amplitude = (trial % 2 == 0) ? params.p_max_kw_per_home : 0.04;
        DispatchSchedule s(7, 24);
        for (int sec = 1; sec <= 7; ++sec)
            for (int t = 0; t < 24; ++t)
                s.set(sec, t, (u01() - 0.5) * 2.0 * amplitude);
        const FleetTrajectory traj = simulate_schedule(net, sectors, alpha, params, s);

        bool crossing = false;
        for (const auto& [bus, e] : traj.e_kwh) {
            const int sector = sectors.sector_of(bus, net);
            double raw = e.front(), cmd_sum = 0.0;
            for (int h = 0; h < 24; ++h) {
                raw += s.at(sector, h) * 28.0;
                cmd_sum += s.at(sector, h) * 28.0;
                if (raw < -1e-12 || raw > 84.0 + 1e-12) {
                    crossing = true;
                    raw = std::clamp(raw, 0.0, 84.0);
                }
            }
            if (traj.penalty_kwh == 0.0 && std::abs((e.back() - e.front()) - cmd_sum) > 1e-9)
                pass = false;
            for (double soc : traj.soc_pct.at(bus))
                if (soc < 0.0 || soc > 100.0)
                    pass = false;
        }
        if ((traj.penalty_kwh > 0.0) != crossing)
            pass = false;
        (traj.penalty_kwh == 0.0 ? feasible_runs : infeasible_runs)++;
    }
    std::ostringstream detail;
    detail << feasible_runs << " feasible / " << infeasible_runs << " infeasible schedules";
    report(4, "telescoping, SOC bounds and penalty-iff-crossing over 1000 schedules",
           pass && feasible_runs > 100 && infeasible_runs > 100, detail.str());
}

// ---- criterion 5: PSO sanity -----------------------------------------------

void criterion_pso() {
    auto sphere = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x)
            s += v * v;
        return s;
    };
    const SearchSpace space = SearchSpace::box(10, -5.0, 5.0);
    SwarmConfig cfg; // defaults: 50 particles x 300 iterations
    cfg.seed = 1;
    const SwarmResult a = optimize(sphere, space, cfg);
    const SwarmResult b = optimize(sphere, space, cfg);

    bool monotone = true;
    for (std::size_t i = 1; i < a.history.size(); ++i)
        monotone &= a.history[i] <= a.history[i - 1];
    const bool identical = a.best_cost == b.best_cost && a.best_position == b.best_position &&
                           a.history == b.history && a.evaluations == b.evaluations;
    std::ostringstream detail;
    detail << "best=" << a.best_cost << ", bit-identical=" << (identical ? "yes" : "no");
    report(5, "sphere < 1e-6 with defaults, seed-deterministic, monotone history",
           a.best_cost < 1e-6 && identical && monotone, detail.str());
}

// ---- criterion 6: small-instance optimality --------------------------------

void criterion_small_instance() {
    const auto t0 = Clock::now();
    const RadialNetwork net({{1, 0, 0, 0, 0}, {2, 0, 0, 10, 0}, {3, 0, 0, 10, 0}},
                            {{1, 2, 2.0, 1.0, 400}, {2, 3, 3.0, 1.5, 400}}, 11.0, 1.0);
    const SectorMap sectors = SectorMap::default_map(net, 1);
    HourlyProfileSet profiles = HourlyProfileSet::zeros(net);
    for (int id : {2, 3}) {
        profiles.p_res_kw[id][0] = 500.0;
        profiles.p_res_kw[id][1] = 50.0;
    }
    EvalSetup setup;
    setup.net = &net;
    setup.sectors = &sectors;
    setup.profiles = &profiles;
    setup.alpha = 0.5;
    setup.battery.beta = 0.5;
    setup.horizon_hours = 2;
    const ObjectiveWeights w = raw_weights(1.0, 1.0);

    double grid_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
            DispatchSchedule s(1, 2);
            s.set(1, 0, -5.0 + i);
            s.set(1, 1, -5.0 + j);
            grid_best = std::min(grid_best, evaluate_day(setup, s, w).cost);
        }

    SwarmConfig cfg;
    cfg.particles = 30;
    cfg.iterations = 60;
    cfg.seed = 21;
    const ScheduleOptimum opt = optimize_schedule(setup, w, cfg);
    const double dt = seconds_since(t0);
    const double gap = (opt.breakdown.cost - grid_best) / grid_best;
    std::ostringstream detail;
    detail << "grid best=" << grid_best << ", pso=" << opt.breakdown.cost << ", gap "
           << gap * 100.0 << "%, " << dt << " s";
    report(6, "PSO within 2% of the 121-cell exhaustive oracle", gap <= 0.02 && dt < 10.0,
           detail.str());
}

// ---- criteria 7 + 8: desk sweep, never-do-harm, voltage band ----------------

struct DeskCell {
    double alpha, beta;
    std::uint64_t seed;
    ScenarioResult result;
    double zero_cost;
};

void criterion_desk_sweep() {
    const auto t0 = Clock::now();
    const RadialNetwork net = ieee33::network();
    const SectorMap sectors = SectorMap::default_map(net, 7);
    SyntheticProfileParams sp; // default synthetic profiles
    sp.ev.seed = 1;
    const HourlyProfileSet profiles = synth_profiles(net, sp);

    ScenarioInputs inputs;
    inputs.net = &net;
    inputs.sectors = &sectors;
    inputs.profiles = &profiles;
    inputs.swarm.particles = 20;
    inputs.swarm.iterations = 50;
    inputs.swarm.stall_iters = 50;
    inputs.trajectory_buses.clear();
    for (const Bus& b : net.buses())
        if (b.id != kSlackBusId)
            inputs.trajectory_buses.push_back(b.id);

    const std::vector<double> alphas{0.0, 0.5, 0.7};
    const std::vector<double> betas{0.0, 0.15, 0.3};
    const std::vector<std::uint64_t> seeds{1, 2, 3};

    std::vector<DeskCell> cells;
    bool never_harm = true;
    for (double a : alphas) {
        for (double b : betas) {
            for (std::uint64_t seed : seeds) {
                if (b == 0.15 && seed != 1)
                    continue; // medians only compare the beta extremes
                ScenarioInputs cell_inputs = inputs;
                cell_inputs.swarm.seed = cell_seed(seed, a, b);
                DeskCell cell;
                cell.alpha = a;
                cell.beta = b;
                cell.seed = seed;
                cell.result = run_scenario({ScenarioKind::proposed, a, b}, cell_inputs);

                EvalSetup setup = cell_inputs.eval_setup(a, b);
                setup.flags = {true, true};
                const ObjectiveWeights wres = resolve_weights(setup, cell_inputs.weights);
                cell.zero_cost =
                    evaluate_day(setup, DispatchSchedule(7, 24), wres).cost;
                if (cell.result.breakdown.cost > cell.zero_cost + 1e-9)
                    never_harm = false;
                cells.push_back(std::move(cell));
            }
        }
    }

    bool medians_ok = true;
    auto median3 = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    for (double a : alphas) {
        std::vector<double> at_zero, at_full;
        for (const DeskCell& c : cells) {
            if (c.alpha != a)
                continue;
            if (c.beta == 0.0)
                at_zero.push_back(c.result.breakdown.cost);
            if (c.beta == 0.3)
                at_full.push_back(c.result.breakdown.cost);
        }
        if (at_zero.size() != 3 || at_full.size() != 3 ||
            median3(at_full) > median3(at_zero) + 1e-9)
            medians_ok = false;
    }

    const double dt = seconds_since(t0);
    std::ostringstream detail;
    detail << cells.size() << " optimizer runs at 20x50, " << dt << " s";
    report(7, "desk sweep: proposed <= zero schedule everywhere, beta trend in medians",
           never_harm && medians_ok && dt < 600.0, detail.str());

    // criterion 8: any run claiming feasibility must have every bus-hour in band;
    // the flag must agree with the recorded trajectories either way
    bool band_consistent = true;
    int feasible_claims = 0;
    for (const DeskCell& c : cells) {
        int violations = 0;
        for (const auto& [bus, series] : c.result.v_traj_pu)
            for (double v : series)
                if (std::abs(v - 1.0) > c.result.voltage_band)
                    ++violations;
        const bool expect_ok = violations == 0 && c.result.all_hours_converged;
        if (c.result.voltage_band_ok != expect_ok)
            band_consistent = false;
        if (c.result.voltage_band_ok) {
            ++feasible_claims;
            if (violations > 0)
                band_consistent = false;
        }
    }
    std::ostringstream detail8;
    detail8 << feasible_claims << " run(s) claim in-band feasibility; flag consistent with "
            << "24x32 trajectories in all " << cells.size() << " runs";
    report(8, "voltage-band feasibility claims are backed by every bus-hour", band_consistent,
           detail8.str());
}

// ---- criterion 9: reference values in reports -------------------------------

void criterion_reports() {
    const RadialNetwork net = ieee33::network();
    const SectorMap sectors = SectorMap::default_map(net, 7);
    SyntheticProfileParams sp;
    sp.ev.vehicles_per_bus = 3;
    const HourlyProfileSet profiles = synth_profiles(net, sp);
    ScenarioInputs inputs;
    inputs.net = &net;
    inputs.sectors = &sectors;
    inputs.profiles = &profiles;
    inputs.swarm.particles = 6;
    inputs.swarm.iterations = 5;

    const fs::path dir = fs::temp_directory_path() / "feederopt_acceptance_reports";
    fs::remove_all(dir);
    const ScenarioResult res = run_scenario({ScenarioKind::grid_ev, 0.7, 0.3}, inputs);
    emit_scenario_report(dir / "scenario", res, net);
    const SweepResult sweep = sweep_alpha_beta({0.7}, {0.3}, inputs, 1);
    emit_sweep_report(dir / "sweep", sweep);

    const std::string scenario_summary = slurp(dir / "scenario" / "summary.txt");
    const std::string scenario_json = slurp(dir / "scenario" / "scenario.json");
    const std::string sweep_summary = slurp(dir / "sweep" / "summary.txt");

    const bool pass =
        scenario_summary.find("paper reference (unpublished inputs)") != std::string::npos &&
        scenario_summary.find("7541.60000") != std::string::npos && // grid_ev reference loss
        scenario_json.find("paper reference (unpublished inputs)") != std::string::npos &&
        scenario_json.find("16.55407") != std::string::npos &&
        sweep_summary.find("paper reference (unpublished inputs)") != std::string::npos &&
        sweep_summary.find("16.55407") != std::string::npos;
    fs::remove_all(dir);
    report(9, "reports print labeled reference values beside computed results", pass,
           "reference rows are labels only; no assertion against them");
}

// ---- criterion 10: byte-identical re-runs -----------------------------------

void criterion_reproducibility() {
#ifndef FEEDEROPT_CLI_PATH
    report(10, "CLI re-runs are byte-identical", false, "CLI path not configured");
#else
    const fs::path work = fs::temp_directory_path() / "feederopt_acceptance_cli";
    fs::remove_all(work);
    fs::create_directories(work);
    {
        std::ofstream cfg(work / "run.cfg");
        cfg << "[swarm]\nparticles = 6\niterations = 5\n"
            << "[profiles]\nev_vehicles_per_bus = 3\n";
    }
    auto run = [&](const std::string& args, const fs::path& out) {
        std::ostringstream cmd;
        cmd << '"' << FEEDEROPT_CLI_PATH << "\" " << args << " --config \""
            << (work / "run.cfg").string() << "\" --out \"" << out.string()
            << "\" > \"" << (out.string() + ".stdout") << "\" 2>/dev/null";
        return std::system(cmd.str().c_str());
    };
    bool pass = true;
    std::string detail;
    const std::vector<std::pair<std::string, std::string>> cases{
        {"loadflow --network ieee33 --hour-load nominal", "loadflow"},
        {"scenario --name grid_ev --seed 7 --alpha 0.7 --beta 0.3", "scen"},
        {"sweep --alphas 0.7 --betas 0.3 --seed 9", "sweep"},
    };
    for (const auto& [args, tag] : cases) {
        // run twice into the same directory and compare every produced file,
        // including the captured stdout
        const fs::path out = work / tag;
        if (run(args, out) != 0) {
            pass = false;
            detail = "CLI invocation failed";
            break;
        }
        std::vector<std::pair<fs::path, std::string>> first_pass;
        for (const auto& entry : fs::directory_iterator(out))
            first_pass.emplace_back(entry.path(), slurp(entry.path()));
        first_pass.emplace_back(out.string() + ".stdout", slurp(out.string() + ".stdout"));
        if (first_pass.empty() || run(args, out) != 0) {
            pass = false;
            detail = "re-run failed";
            break;
        }
        for (const auto& [path, bytes] : first_pass) {
            if (!fs::exists(path) || slurp(path) != bytes) {
                pass = false;
                detail = "mismatch in " + path.filename().string();
            }
        }
    }
    fs::remove_all(work);
    report(10, "CLI re-runs with identical config and seed are byte-identical", pass, detail);
#endif
}

} // namespace

int main() {
    criterion_base_case();
    criterion_oracles();
    criterion_conservation();
    criterion_battery();
    criterion_pso();
    criterion_small_instance();
    criterion_desk_sweep();
    criterion_reports();
    criterion_reproducibility();
    if (g_failures > 0) {
        std::cout << g_failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all acceptance criteria passed\n";
    return 0;
}
