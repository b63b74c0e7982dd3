#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "feederopt/objective.hpp"
#include "feederopt/pso.hpp"

namespace feederopt {

enum class ScenarioKind {
    grid_only,     // residential load only
    grid_ev,       // residential + EV charging
    grid_ev_nbbsr, // residential + EV + solar injection
    proposed,      // all components + optimized battery dispatch
};

inline ScenarioKind scenario_kind_from_string(const std::string& s) {
    if (s == "grid_only")
        return ScenarioKind::grid_only;
    if (s == "grid_ev")
        return ScenarioKind::grid_ev;
    if (s == "grid_ev_nbbsr")
        return ScenarioKind::grid_ev_nbbsr;
    if (s == "proposed")
        return ScenarioKind::proposed;
    throw ConfigError("unknown scenario '" + s +
                      "' (grid_only, grid_ev, grid_ev_nbbsr, proposed)");
}

inline std::string to_string(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::grid_only:
        return "grid_only";
    case ScenarioKind::grid_ev:
        return "grid_ev";
    case ScenarioKind::grid_ev_nbbsr:
        return "grid_ev_nbbsr";
    case ScenarioKind::proposed:
        return "proposed";
    }
    return "?";
}

inline LoadFlags flags_for(ScenarioKind k) {
    switch (k) {
    case ScenarioKind::grid_only:
        return {false, false};
    case ScenarioKind::grid_ev:
        return {true, false};
    default:
        return {true, true};
    }
}

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::proposed;
    double alpha = 0.7;
    double beta = 0.3;

    void validate() const {
        if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0)
            throw ConfigError("alpha and beta must lie in [0, 1]");
    }
};

struct ImprovementRow {
    std::string baseline_name;
    // (baseline - proposed) / baseline x 100; empty when the baseline is zero
    std::optional<double> loss_reduction_pct;
    std::optional<double> dev_reduction_pct;
    std::optional<double> cost_reduction_pct;
};

inline std::vector<ImprovementRow>
improvement_report(const std::vector<std::pair<std::string, CostBreakdown>>& baselines,
                   const CostBreakdown& proposed) {
    auto reduction = [](double base, double prop) -> std::optional<double> {
        if (base == 0.0)
            return std::nullopt;
        return (base - prop) / base * 100.0;
    };
    std::vector<ImprovementRow> rows;
    rows.reserve(baselines.size());
    for (const auto& [name, base] : baselines) {
        ImprovementRow row;
        row.baseline_name = name;
        row.loss_reduction_pct = reduction(base.p_loss_total_kw, proposed.p_loss_total_kw);
        row.dev_reduction_pct = reduction(base.avg_v_dev_pct, proposed.avg_v_dev_pct);
        row.cost_reduction_pct = reduction(base.cost, proposed.cost);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Shared inputs for scenario runs and sweeps. Non-owning pointers into
// caller-owned immutable data.
struct ScenarioInputs {
    const RadialNetwork* net = nullptr;
    const SectorMap* sectors = nullptr;
    const HourlyProfileSet* profiles = nullptr;
    BatteryParams battery;       // beta is overridden per scenario/cell
    ObjectiveWeights weights;    // references resolved on first use
    SwarmConfig swarm;
    SolveOptions solve_opts;
    std::vector<int> trajectory_buses{18, 33};
    double voltage_band = 0.10;
    int horizon_hours = kHoursPerDay;

    EvalSetup eval_setup(double alpha, double beta) const {
        EvalSetup s;
        s.net = net;
        s.sectors = sectors;
        s.profiles = profiles;
        s.alpha = alpha;
        s.battery = battery;
        s.battery.beta = beta;
        s.solve_opts = solve_opts;
        s.horizon_hours = horizon_hours;
        return s;
    }
};

struct ScenarioResult {
    ScenarioSpec spec;
    CostBreakdown breakdown;
    std::map<int, std::vector<double>> v_traj_pu; // bus id -> per-hour |V|
    bool all_hours_converged = true;
    bool voltage_band_ok = false;
    double voltage_band = 0.10;
    int band_violation_bus_hours = 0;
    std::optional<DispatchSchedule> schedule; // proposed only
    std::optional<SwarmResult> swarm;         // proposed only
    std::optional<FleetTrajectory> fleet;     // proposed only
    // proposed only: percentage reductions against the three baselines
    std::vector<ImprovementRow> improvements;
};

// Run one scenario: the three baselines evaluate the zero schedule under the
// matching load flags, the proposed scenario optimizes the dispatch. Returns
// the breakdown plus 24-hour voltage trajectories for the requested buses
// (defaults 18 and 33, the end buses of the two long branches).
inline ScenarioResult run_scenario(const ScenarioSpec& spec, const ScenarioInputs& inputs) {
    spec.validate();
    EvalSetup setup = inputs.eval_setup(spec.alpha, spec.beta);
    setup.flags = flags_for(spec.kind);
    const ObjectiveWeights weights = resolve_weights(setup, inputs.weights);

    ScenarioResult res;
    res.spec = spec;
    res.voltage_band = inputs.voltage_band;

    DayTrace trace;
    if (spec.kind == ScenarioKind::proposed) {
        ScheduleOptimum opt = optimize_schedule(setup, weights, inputs.swarm);
        res.breakdown = evaluate_day(setup, opt.schedule, weights, &trace);
        res.fleet = simulate_schedule(*setup.net, *setup.sectors, setup.alpha, setup.battery,
                                      opt.schedule);
        res.schedule = std::move(opt.schedule);
        res.swarm = std::move(opt.swarm);
    } else {
        const DispatchSchedule zero(setup.sectors->sector_count(), setup.horizon_hours);
        res.breakdown = evaluate_day(setup, zero, weights, &trace);
    }

    for (int bus_id : inputs.trajectory_buses) {
        const int idx = inputs.net->index_of(bus_id);
        auto& series = res.v_traj_pu[bus_id];
        series.reserve(trace.v_pu.size());
        for (const auto& row : trace.v_pu)
            series.push_back(row[idx]);
    }

    const int slack = inputs.net->slack_index();
    for (std::size_t t = 0; t < trace.v_pu.size(); ++t) {
        if (!trace.hour_converged[t]) {
            res.all_hours_converged = false;
            continue;
        }
        for (std::size_t i = 0; i < trace.v_pu[t].size(); ++i)
            if (static_cast<int>(i) != slack &&
                std::abs(trace.v_pu[t][i] - inputs.net->v_rated_pu()) > inputs.voltage_band)
                ++res.band_violation_bus_hours;
    }
    res.voltage_band_ok = res.all_hours_converged && res.band_violation_bus_hours == 0;

    if (spec.kind == ScenarioKind::proposed) {
        std::vector<std::pair<std::string, CostBreakdown>> baselines;
        for (ScenarioKind k :
             {ScenarioKind::grid_only, ScenarioKind::grid_ev, ScenarioKind::grid_ev_nbbsr})
            baselines.emplace_back(to_string(k), scenario_baseline(setup, weights, flags_for(k)));
        res.improvements = improvement_report(baselines, res.breakdown);
    }
    return res;
}

inline std::uint64_t cell_seed(std::uint64_t base_seed, double alpha, double beta) {
    std::uint64_t s = mix_seed(base_seed, std::bit_cast<std::uint64_t>(alpha));
    return mix_seed(s, std::bit_cast<std::uint64_t>(beta));
}

struct SweepCell {
    double alpha = 0.0;
    double beta = 0.0;
    bool ok = false;
    std::string error;
    CostBreakdown breakdown;
};

struct SweepResult {
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<SweepCell> cells; // row-major, alpha outer
    int argmin_index = -1;

    const SweepCell& cell(std::size_t ai, std::size_t bi) const {
        return cells[ai * betas.size() + bi];
    }
};

// Optimize the proposed scenario for every (alpha, beta) combination. Cells
// are independent: each gets its own seed derived from the base seed, and a
// failed cell is recorded rather than aborting the sweep.
inline SweepResult sweep_alpha_beta(const std::vector<double>& alphas,
                                    const std::vector<double>& betas,
                                    const ScenarioInputs& inputs, std::uint64_t base_seed) {
    if (alphas.empty() || betas.empty())
        throw ConfigError("sweep needs at least one alpha and one beta");
    for (double a : alphas)
        if (a < 0.0 || a > 1.0)
            throw ConfigError("sweep alpha outside [0, 1]");
    for (double b : betas)
        if (b < 0.0 || b > 1.0)
            throw ConfigError("sweep beta outside [0, 1]");

    SweepResult res;
    res.alphas = alphas;
    res.betas = betas;
    res.cells.reserve(alphas.size() * betas.size());
    for (double a : alphas) {
        for (double b : betas) {
            SweepCell cell;
            cell.alpha = a;
            cell.beta = b;
            ScenarioInputs cell_inputs = inputs;
            cell_inputs.swarm.seed = cell_seed(base_seed, a, b);
            try {
                const ScenarioResult r =
                    run_scenario(ScenarioSpec{ScenarioKind::proposed, a, b}, cell_inputs);
                cell.breakdown = r.breakdown;
                cell.ok = true;
            } catch (const Error& e) {
                cell.error = e.what();
            }
            res.cells.push_back(std::move(cell));
        }
    }
    for (std::size_t i = 0; i < res.cells.size(); ++i) {
        if (!res.cells[i].ok)
            continue;
        if (res.argmin_index < 0 ||
            res.cells[i].breakdown.cost < res.cells[res.argmin_index].breakdown.cost)
            res.argmin_index = static_cast<int>(i);
    }
    return res;
}

} // namespace feederopt
