#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "feederopt/csv.hpp"
#include "feederopt/errors.hpp"
#include "feederopt/mix.hpp"
#include "feederopt/network.hpp"

namespace feederopt {

struct BatteryParams {
    double beta = 0.3;               // permitted fraction of home storage the utility may dispatch
    double e_bt_user_kwh = 10.0;     // nominal storage per battery home
    double p_max_kw_per_home = 5.0;  // charge/discharge limit per home
    double soc_init_pct = 50.0;
    bool capacity_from_all_homes = false; // count every residence instead of battery homes only
    double roundtrip_efficiency = 1.0;    // hook; 1.0 = lossless storage

    void validate() const {
        if (beta < 0.0 || beta > 1.0)
            throw ConfigError("beta must lie in [0, 1]");
        if (e_bt_user_kwh < 0.0)
            throw ConfigError("e_bt_user_kwh must be non-negative");
        if (p_max_kw_per_home <= 0.0)
            throw ConfigError("p_max_kw_per_home must be positive");
        if (soc_init_pct < 0.0 || soc_init_pct > 100.0)
            throw ConfigError("soc_init_pct must lie in [0, 100]");
        if (roundtrip_efficiency <= 0.0 || roundtrip_efficiency > 1.0)
            throw ConfigError("roundtrip_efficiency must lie in (0, 1]");
    }
};

// Dispatchable energy at a bus: permitted fraction x homes x per-home storage.
inline double capacity_kwh(const BatteryParams& params, int n_users) {
    if (n_users < 0)
        throw ConfigError("n_users must be non-negative");
    return params.beta * n_users * params.e_bt_user_kwh;
}

struct BusBatteryState {
    double e_max_kwh = 0.0;
    double e_kwh = 0.0;

    double soc_pct() const { return e_max_kwh > 0.0 ? 100.0 * e_kwh / e_max_kwh : 0.0; }
};

struct StepResult {
    BusBatteryState state;
    double overshoot_kwh = 0.0; // magnitude of the bound crossing, 0 when feasible
    double p_actual_kw = 0.0;   // grid-side power actually absorbed/delivered
};

// One energy bookkeeping step. Commands that would push the stored energy
// outside [0, e_max] are clamped and the overshoot reported so the optimizer
// can penalize the schedule instead of crashing. The actual grid-side power
// reflects the clamp: an empty battery delivers nothing.
inline StepResult step_energy(const BusBatteryState& state, double p_bt_kw, double dt_h,
                              double roundtrip_efficiency = 1.0) {
    if (dt_h <= 0.0)
        throw ConfigError("dt_h must be positive");
    const double eta = std::sqrt(roundtrip_efficiency);
    const double stored_delta = p_bt_kw > 0.0 ? p_bt_kw * dt_h * eta : p_bt_kw * dt_h / eta;
    const double e_raw = state.e_kwh + stored_delta;
    const double e_clamped = std::min(std::max(e_raw, 0.0), state.e_max_kwh);

    StepResult r;
    r.state = {state.e_max_kwh, e_clamped};
    r.overshoot_kwh = std::abs(e_raw - e_clamped);
    const double actual_delta = e_clamped - state.e_kwh;
    r.p_actual_kw = actual_delta >= 0.0 ? actual_delta / (dt_h * eta) : actual_delta * eta / dt_h;
    return r;
}

inline double soc_pct(const BusBatteryState& state) { return state.soc_pct(); }

// Battery power commands per sector and hour, kW per participating home
// (positive = charge). Bus-level power is the command times the bus's
// battery home count.
class DispatchSchedule {
public:
    DispatchSchedule(int sectors, int hours = 24) : sectors_(sectors), hours_(hours) {
        if (sectors_ < 1 || hours_ < 1)
            throw ConfigError("schedule dimensions must be positive");
        p_kw_.assign(static_cast<std::size_t>(sectors_) * hours_, 0.0);
    }

    static DispatchSchedule from_flat(int sectors, int hours, std::span<const double> values) {
        DispatchSchedule s(sectors, hours);
        if (values.size() != s.p_kw_.size())
            throw ConfigError("schedule vector length " + std::to_string(values.size()) +
                              " does not match " + std::to_string(sectors) + " x " +
                              std::to_string(hours));
        std::copy(values.begin(), values.end(), s.p_kw_.begin());
        return s;
    }

    int sectors() const { return sectors_; }
    int hours() const { return hours_; }
    const std::vector<double>& flat() const { return p_kw_; }

    double at(int sector, int hour) const { return p_kw_[index(sector, hour)]; }
    void set(int sector, int hour, double kw) { p_kw_[index(sector, hour)] = kw; }

    void validate_against(const BatteryParams& params) const {
        for (double v : p_kw_)
            if (!std::isfinite(v) || std::abs(v) > params.p_max_kw_per_home + 1e-12)
                throw ConfigError("schedule command " + std::to_string(v) +
                                  " exceeds the per-home power limit");
    }

    void write_csv(std::ostream& os) const {
        os << "sector,hour,p_kw\n";
        for (int s = 1; s <= sectors_; ++s)
            for (int t = 0; t < hours_; ++t) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%d,%d,%.5f\n", s, t, at(s, t));
                os << buf;
            }
    }

    static DispatchSchedule read_csv(const std::filesystem::path& path, int sectors, int hours = 24) {
        CsvTable t = CsvTable::read_file(path);
        t.require_columns({"sector", "hour", "p_kw"});
        DispatchSchedule out(sectors, hours);
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const int s = static_cast<int>(t.int_cell(r, 0));
            const int h = static_cast<int>(t.int_cell(r, 1));
            if (s < 1 || s > sectors || h < 0 || h >= hours)
                throw SchemaError(path.string() + ": (sector " + std::to_string(s) + ", hour " +
                                  std::to_string(h) + ") outside the schedule dimensions");
            out.set(s, h, t.double_cell(r, 2));
        }
        return out;
    }

private:
    std::size_t index(int sector, int hour) const {
        if (sector < 1 || sector > sectors_ || hour < 0 || hour >= hours_)
            throw ConfigError("schedule index (sector " + std::to_string(sector) + ", hour " +
                              std::to_string(hour) + ") out of range");
        return static_cast<std::size_t>(sector - 1) * hours_ + hour;
    }

    int sectors_;
    int hours_;
    std::vector<double> p_kw_;
};

struct FleetTrajectory {
    // bus id -> series of length hours+1 (index 0 = initial state)
    std::map<int, std::vector<double>> e_kwh;
    std::map<int, std::vector<double>> soc_pct;
    // bus id -> grid-side battery power per hour (after clamping)
    std::map<int, std::vector<double>> p_actual_kw;
    double penalty_kwh = 0.0; // summed bound overshoot; 0 iff the schedule is feasible
};

// Roll the fleet through the schedule hour by hour. The sector command is
// applied to every bus in the sector, scaled by that bus's battery home
// count. Pure given immutable inputs.
inline FleetTrajectory simulate_schedule(const RadialNetwork& net, const SectorMap& sectors,
                                         double alpha, const BatteryParams& params,
                                         const DispatchSchedule& schedule, double dt_h = 1.0) {
    params.validate();
    if (schedule.sectors() != sectors.sector_count())
        throw ConfigError("schedule has " + std::to_string(schedule.sectors()) +
                          " sectors but the map has " + std::to_string(sectors.sector_count()));

    FleetTrajectory out;
    const int hours = schedule.hours();
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const Bus& bus = net.buses()[i];
        const int sector = sectors.sector_of_index(static_cast<int>(i));
        if (sector == 0)
            continue;
        const MixConfig mix = MixConfig::for_bus(alpha, bus.n_residences);
        const int homes = params.capacity_from_all_homes ? mix.total_homes() : mix.n_bbsr;
        BusBatteryState state;
        state.e_max_kwh = capacity_kwh(params, homes);
        state.e_kwh = params.soc_init_pct / 100.0 * state.e_max_kwh;

        auto& e_series = out.e_kwh[bus.id];
        auto& soc_series = out.soc_pct[bus.id];
        auto& p_series = out.p_actual_kw[bus.id];
        e_series.reserve(hours + 1);
        soc_series.reserve(hours + 1);
        p_series.reserve(hours);
        e_series.push_back(state.e_kwh);
        soc_series.push_back(state.soc_pct());
        for (int t = 0; t < hours; ++t) {
            const double p_bus_kw = schedule.at(sector, t) * homes;
            const StepResult step = step_energy(state, p_bus_kw, dt_h, params.roundtrip_efficiency);
            state = step.state;
            out.penalty_kwh += step.overshoot_kwh;
            e_series.push_back(state.e_kwh);
            soc_series.push_back(state.soc_pct());
            p_series.push_back(step.p_actual_kw);
        }
    }
    return out;
}

} // namespace feederopt
