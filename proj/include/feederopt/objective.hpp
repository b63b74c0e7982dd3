#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "feederopt/battery.hpp"
#include "feederopt/load_flow.hpp"
#include "feederopt/network.hpp"
#include "feederopt/profiles.hpp"

namespace feederopt {

struct ObjectiveWeights {
    double w1 = 0.5; // weight on total active loss
    double w2 = 0.5; // weight on total voltage deviation
    // Normalized mode scores loss and deviation relative to the grid-only
    // baseline so the two terms are commensurable; raw mode sums them in
    // native units (kW and p.u.).
    bool normalized = true;
    double p_loss_ref_kw = 0.0; // grid-only daily loss; 0 = unresolved
    double v_dev_ref = 0.0;     // grid-only daily deviation; 0 = unresolved
    double penalty_coeff = 1.0; // cost per kWh of battery bound overshoot
    double unconverged_hour_penalty = 0.0; // 0 = auto (10x the reference cost)

    void validate() const {
        if (w1 < 0.0 || w2 < 0.0 || (w1 == 0.0 && w2 == 0.0))
            throw ConfigError("objective weights must be non-negative and not both zero");
        if (penalty_coeff <= 0.0)
            throw ConfigError("penalty_coeff must be positive");
    }

    bool refs_resolved() const { return p_loss_ref_kw > 0.0 && v_dev_ref > 0.0; }
};

struct CostBreakdown {
    double p_loss_total_kw = 0.0;  // summed over converged hourly snapshots
    double q_loss_total_kvar = 0.0;
    double v_dev_total_pu = 0.0;   // sum of |1 - V| over non-slack buses and hours
    double avg_v_dev_pct = 0.0;    // v_dev_total / (buses x hours) x 100
    double battery_penalty_kwh = 0.0;
    int unconverged_hours = 0;
    double penalty = 0.0; // combined infeasibility term in cost units
    double cost = 0.0;
    std::vector<double> p_loss_kw_by_hour; // per hour; unconverged hours hold 0
};

struct LoadFlags {
    bool include_ev = true;
    bool include_solar = true;
};

// Per-hour voltage record of a day evaluation, for trajectory reports.
struct DayTrace {
    std::vector<std::vector<double>> v_pu; // [hour][bus index]
    std::vector<bool> hour_converged;
};

// Everything an evaluation needs besides the schedule and weights. Holds
// non-owning pointers; the referenced objects are immutable and must outlive
// the evaluation.
struct EvalSetup {
    const RadialNetwork* net = nullptr;
    const SectorMap* sectors = nullptr;
    const HourlyProfileSet* profiles = nullptr;
    double alpha = 0.7;
    BatteryParams battery;
    LoadFlags flags;
    SolveOptions solve_opts;
    int horizon_hours = kHoursPerDay;

    void validate() const {
        if (!net || !sectors || !profiles)
            throw ConfigError("evaluation setup is missing network, sectors or profiles");
        if (alpha < 0.0 || alpha > 1.0)
            throw ConfigError("alpha must lie in [0, 1]");
        if (horizon_hours < 1 || horizon_hours > kHoursPerDay)
            throw ConfigError("horizon_hours must lie in 1..24");
        battery.validate();
        solve_opts.validate();
        profiles->validate(*net);
    }
};

namespace detail {

inline double reference_cost(const ObjectiveWeights& w) {
    if (w.normalized)
        return w.w1 + w.w2;
    return w.w1 * std::max(w.p_loss_ref_kw, 1.0) + w.w2 * std::max(w.v_dev_ref, 1.0);
}

} // namespace detail

// Evaluate one 24-hour day of operation under a dispatch schedule: roll the
// batteries, compose hourly injections, run the load flow, and accumulate
// loss and voltage deviation. Deterministic and pure, so swarm evaluations
// may run concurrently.
//
// Hours that fail to converge (or collapse) contribute a flat penalty
// instead of their garbage sums.
inline CostBreakdown evaluate_day(const EvalSetup& setup, const DispatchSchedule& schedule,
                                  const ObjectiveWeights& weights, DayTrace* trace = nullptr) {
    setup.validate();
    weights.validate();
    if (weights.normalized && !weights.refs_resolved())
        throw ConfigError("normalized objective requires resolved reference values "
                          "(see resolve_weights)");
    const RadialNetwork& net = *setup.net;
    if (schedule.sectors() != setup.sectors->sector_count() ||
        schedule.hours() != setup.horizon_hours)
        throw ConfigError("schedule dimensions " + std::to_string(schedule.sectors()) + "x" +
                          std::to_string(schedule.hours()) + " do not match " +
                          std::to_string(setup.sectors->sector_count()) + "x" +
                          std::to_string(setup.horizon_hours));

    const FleetTrajectory fleet =
        simulate_schedule(net, *setup.sectors, setup.alpha, setup.battery, schedule);

    const std::size_t n = net.bus_count();
    std::vector<MixConfig> mix(n);
    for (std::size_t i = 0; i < n; ++i)
        mix[i] = MixConfig::for_bus(setup.alpha, net.buses()[i].n_residences);

    CostBreakdown out;
    out.battery_penalty_kwh = fleet.penalty_kwh;
    out.p_loss_kw_by_hour.assign(setup.horizon_hours, 0.0);
    if (trace) {
        trace->v_pu.assign(setup.horizon_hours, std::vector<double>(n, 0.0));
        trace->hour_converged.assign(setup.horizon_hours, false);
    }

    BusInjection inj = BusInjection::zeros(net);
    const int slack = net.slack_index();
    for (int t = 0; t < setup.horizon_hours; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i) == slack) {
                inj.p_kw[i] = 0.0;
                inj.q_kvar[i] = 0.0;
                continue;
            }
            const Bus& bus = net.buses()[i];
            double p = setup.profiles->p_res_kw.at(bus.id)[t];
            if (setup.flags.include_ev)
                p += setup.profiles->p_ev_kw.at(bus.id)[t];
            if (setup.flags.include_solar)
                p -= mix[i].n_nbbsr * setup.profiles->p_solar_unit_kw[t];
            auto it = fleet.p_actual_kw.find(bus.id);
            if (it != fleet.p_actual_kw.end())
                p += it->second[t];
            inj.p_kw[i] = p;
            inj.q_kvar[i] = setup.profiles->q_res_kvar.at(bus.id)[t];
        }

        bool hour_ok = false;
        try {
            const PowerFlowSolution sol = solve(net, inj, setup.solve_opts);
            if (sol.converged) {
                hour_ok = true;
                out.p_loss_total_kw += sol.p_loss_kw;
                out.q_loss_total_kvar += sol.q_loss_kvar;
                out.p_loss_kw_by_hour[t] = sol.p_loss_kw;
                for (std::size_t i = 0; i < n; ++i)
                    if (static_cast<int>(i) != slack)
                        out.v_dev_total_pu += std::abs(net.v_rated_pu() - sol.v_pu[i]);
                if (trace)
                    trace->v_pu[t] = sol.v_pu;
            }
        } catch (const InfeasibleError&) {
            // voltage collapse; handled as an unconverged hour
        }
        if (!hour_ok)
            ++out.unconverged_hours;
        if (trace)
            trace->hour_converged[t] = hour_ok;
    }

    const std::size_t non_slack = n - 1;
    out.avg_v_dev_pct =
        100.0 * out.v_dev_total_pu / (static_cast<double>(non_slack) * setup.horizon_hours);

    const double loss_term =
        weights.normalized ? out.p_loss_total_kw / weights.p_loss_ref_kw : out.p_loss_total_kw;
    const double dev_term =
        weights.normalized ? out.v_dev_total_pu / weights.v_dev_ref : out.v_dev_total_pu;
    const double unconv = weights.unconverged_hour_penalty > 0.0
                              ? weights.unconverged_hour_penalty
                              : 10.0 * detail::reference_cost(weights);
    out.penalty =
        weights.penalty_coeff * out.battery_penalty_kwh + unconv * out.unconverged_hours;
    out.cost = weights.w1 * loss_term + weights.w2 * dev_term + out.penalty;
    return out;
}

// Baseline scenarios run the zero schedule with a chosen subset of load
// components (grid-only / +EV / +EV+solar).
inline CostBreakdown scenario_baseline(const EvalSetup& setup, const ObjectiveWeights& weights,
                                       LoadFlags flags, DayTrace* trace = nullptr) {
    EvalSetup s = setup;
    s.flags = flags;
    const DispatchSchedule zero(s.sectors->sector_count(), s.horizon_hours);
    return evaluate_day(s, zero, weights, trace);
}

// Fill the normalization references from the grid-only baseline (residential
// load only, no schedule). No-op when already resolved or in raw mode.
inline ObjectiveWeights resolve_weights(const EvalSetup& setup, ObjectiveWeights weights) {
    weights.validate();
    if (!weights.normalized || weights.refs_resolved())
        return weights;
    ObjectiveWeights raw = weights;
    raw.normalized = false;
    raw.p_loss_ref_kw = raw.v_dev_ref = 1.0;
    const CostBreakdown base = scenario_baseline(setup, raw, LoadFlags{false, false});
    // zero-load networks normalize against 1 so costs stay finite
    weights.p_loss_ref_kw = base.p_loss_total_kw > 0.0 ? base.p_loss_total_kw : 1.0;
    weights.v_dev_ref = base.v_dev_total_pu > 0.0 ? base.v_dev_total_pu : 1.0;
    return weights;
}

} // namespace feederopt
