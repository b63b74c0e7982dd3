#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "feederopt/csv.hpp"
#include "feederopt/errors.hpp"
#include "feederopt/mix.hpp"
#include "feederopt/network.hpp"

namespace feederopt {

inline constexpr int kHoursPerDay = 24;

using HourlySeries = std::array<double, kHoursPerDay>;

// 24-hour load series per bus plus the shared per-home solar generation
// curve. Immutable once built; shared read-only by concurrent evaluations.
struct HourlyProfileSet {
    std::map<int, HourlySeries> p_res_kw;   // residential active load
    std::map<int, HourlySeries> q_res_kvar; // residential reactive load
    std::map<int, HourlySeries> p_ev_kw;    // EV charging load
    HourlySeries p_solar_unit_kw{};         // generation per solar home

    static HourlyProfileSet zeros(const RadialNetwork& net) {
        HourlyProfileSet p;
        for (const Bus& b : net.buses()) {
            if (b.id == kSlackBusId)
                continue;
            p.p_res_kw[b.id] = {};
            p.q_res_kvar[b.id] = {};
            p.p_ev_kw[b.id] = {};
        }
        return p;
    }

    void validate(const RadialNetwork& net) const {
        for (const Bus& b : net.buses()) {
            if (b.id == kSlackBusId)
                continue;
            if (!p_res_kw.count(b.id) || !q_res_kvar.count(b.id) || !p_ev_kw.count(b.id))
                throw SchemaError("profile set has no series for bus " + std::to_string(b.id));
        }
        auto finite = [](const HourlySeries& s) {
            for (double v : s)
                if (!std::isfinite(v))
                    return false;
            return true;
        };
        for (const auto& [bus, s] : p_res_kw)
            if (!finite(s) || !finite(q_res_kvar.at(bus)) || !finite(p_ev_kw.at(bus)))
                throw SchemaError("profile series at bus " + std::to_string(bus) + " is not finite");
        for (double v : p_solar_unit_kw)
            if (!std::isfinite(v) || v < 0.0)
                throw SchemaError("per-unit solar series must be finite and non-negative");
    }
};

// Feeder-level solar injection at a bus: solar-home fraction x homes x unit
// curve. With the integer-realized mix this is exactly n_nbbsr x unit.
inline HourlySeries net_solar(const Bus&, const MixConfig& mix, const HourlySeries& p_solar_unit) {
    HourlySeries out{};
    for (int t = 0; t < kHoursPerDay; ++t)
        out[t] = static_cast<double>(mix.n_nbbsr) * p_solar_unit[t];
    return out;
}

struct InjectionEntry {
    double p_kw = 0.0;
    double q_kvar = 0.0;
};

// Net consumption at one bus for one hour: residential plus EV minus solar
// generation plus battery power (charge > 0 adds load, discharge reduces it).
// EV and solar run at unity power factor, so reactive load is residential only.
inline InjectionEntry compose_bus_injection(const Bus& bus, const MixConfig& mix,
                                            const HourlyProfileSet& profiles, int hour,
                                            double battery_kw) {
    if (hour < 0 || hour >= kHoursPerDay)
        throw ConfigError("hour must lie in 0..23");
    const HourlySeries& res = profiles.p_res_kw.at(bus.id);
    const HourlySeries& ev = profiles.p_ev_kw.at(bus.id);
    const HourlySeries& q = profiles.q_res_kvar.at(bus.id);
    const double solar = mix.n_nbbsr * profiles.p_solar_unit_kw[hour];
    return {res[hour] + ev[hour] - solar + battery_kw, q[hour]};
}

struct EvProfileParams {
    HourlySeries start_hour_pmf{}; // probability of a charging session starting each hour
    double charger_kw = 7.0;
    int session_hours = 2;
    int vehicles_per_bus = 10;
    std::uint64_t seed = 1;

    void validate() const {
        double sum = 0.0;
        for (double p : start_hour_pmf) {
            if (!(p >= 0.0))
                throw ConfigError("EV start-hour pmf entries must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ConfigError("EV start-hour pmf must sum to 1, got " + std::to_string(sum));
        if (charger_kw < 0.0)
            throw ConfigError("charger_kw must be non-negative");
        if (session_hours < 0 || session_hours > kHoursPerDay)
            throw ConfigError("session_hours must lie in 0..24");
        if (vehicles_per_bus < 0)
            throw ConfigError("vehicles_per_bus must be non-negative");
    }
};

namespace detail {

// 53-bit uniform in [0, 1); keeps sampling independent of any library's
// distribution internals so fixed seeds reproduce bit-identically.
inline double uniform53(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    return detail::splitmix64(base ^ detail::splitmix64(salt));
}

// Draw session start hours from the pmf and stack the charger power for the
// session duration, wrapping at midnight. Reproducible for a fixed seed.
inline HourlySeries synth_ev_profile(const EvProfileParams& params) {
    params.validate();
    HourlySeries out{};
    std::mt19937_64 rng(params.seed);
    for (int v = 0; v < params.vehicles_per_bus; ++v) {
        const double u = detail::uniform53(rng);
        double acc = 0.0;
        int start = kHoursPerDay - 1;
        for (int t = 0; t < kHoursPerDay; ++t) {
            acc += params.start_hour_pmf[t];
            if (u < acc) {
                start = t;
                break;
            }
        }
        for (int k = 0; k < params.session_hours; ++k)
            out[(start + k) % kHoursPerDay] += params.charger_kw;
    }
    return out;
}

enum class ResidentialShape {
    flat,        // nominal spot loads held constant all day
    double_peak, // morning and evening peaks
};

inline ResidentialShape residential_shape_from_string(const std::string& s) {
    if (s == "flat")
        return ResidentialShape::flat;
    if (s == "double_peak")
        return ResidentialShape::double_peak;
    throw ConfigError("unknown residential shape '" + s + "' (flat, double_peak)");
}

// Hourly multipliers applied to the nominal spot loads; evening peak at 1.0.
inline constexpr HourlySeries kDoublePeakShape = {
    0.48, 0.44, 0.42, 0.41, 0.42, 0.47, 0.60, 0.78, 0.74, 0.64, 0.58, 0.55,
    0.54, 0.53, 0.55, 0.60, 0.72, 0.88, 1.00, 0.97, 0.88, 0.74, 0.62, 0.53,
};

// Weekday start-hour weights peaked in the evening; normalized at use.
inline constexpr HourlySeries kDefaultEvStartWeights = {
    0.5, 0.3, 0.2, 0.1, 0.1, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2,
    1.5, 1.5, 1.8, 2.5, 4.5, 7.5, 10.0, 9.0, 7.0, 4.5, 2.5, 1.2,
};

inline HourlySeries normalized_pmf(const HourlySeries& weights) {
    double sum = 0.0;
    for (double w : weights)
        sum += w;
    if (sum <= 0.0)
        throw ConfigError("pmf weights must have a positive sum");
    HourlySeries out{};
    for (int t = 0; t < kHoursPerDay; ++t)
        out[t] = weights[t] / sum;
    // absorb rounding so the pmf sums to 1 exactly
    double acc = 0.0;
    for (int t = 0; t < kHoursPerDay - 1; ++t)
        acc += out[t];
    out[kHoursPerDay - 1] = std::max(0.0, 1.0 - acc);
    return out;
}

// Clipped half-sine over daylight hours.
inline HourlySeries synth_solar_unit(double peak_kw, int sunrise = 6, int sunset = 18) {
    if (peak_kw < 0.0)
        throw ConfigError("solar peak must be non-negative");
    if (sunrise < 0 || sunset > kHoursPerDay || sunrise >= sunset)
        throw ConfigError("daylight window must satisfy 0 <= sunrise < sunset <= 24");
    HourlySeries out{};
    for (int t = sunrise; t <= sunset && t < kHoursPerDay; ++t) {
        const double phase = std::numbers::pi * (t - sunrise) / (sunset - sunrise);
        out[t] = std::max(0.0, peak_kw * std::sin(phase));
    }
    return out;
}

struct SyntheticProfileParams {
    ResidentialShape residential_shape = ResidentialShape::double_peak;
    double solar_peak_kw = 10.0; // per-home cap from the downscaled plant data
    EvProfileParams ev{normalized_pmf(kDefaultEvStartWeights)};
};

// Parameterized stand-ins for the measured curves, which are not published:
// residential scales each bus's spot load by a daily shape, EV sessions are
// drawn per bus from the start-hour pmf (bus-salted seed), and solar is a
// clipped sine. Deterministic for a fixed seed.
inline HourlyProfileSet synth_profiles(const RadialNetwork& net,
                                       const SyntheticProfileParams& params) {
    params.ev.validate();
    HourlyProfileSet out;
    const HourlySeries shape = params.residential_shape == ResidentialShape::flat
                                   ? [] { HourlySeries s; s.fill(1.0); return s; }()
                                   : kDoublePeakShape;
    for (const Bus& b : net.buses()) {
        if (b.id == kSlackBusId)
            continue;
        HourlySeries res{}, q{}, ev{};
        for (int t = 0; t < kHoursPerDay; ++t) {
            res[t] = b.p_load_kw * shape[t];
            q[t] = b.q_load_kvar * shape[t];
        }
        EvProfileParams bus_ev = params.ev;
        bus_ev.seed = mix_seed(params.ev.seed, static_cast<std::uint64_t>(b.id));
        ev = synth_ev_profile(bus_ev);
        out.p_res_kw[b.id] = res;
        out.q_res_kvar[b.id] = q;
        out.p_ev_kw[b.id] = ev;
    }
    out.p_solar_unit_kw = synth_solar_unit(params.solar_peak_kw);
    out.validate(net);
    return out;
}

// Bus profile CSV: bus_id,hour,p_res_kw,q_res_kvar,p_ev_kw with one row per
// non-slack bus and hour; solar CSV: hour,p_solar_unit_kw with 24 rows.
inline HourlyProfileSet load_profiles_csv(const RadialNetwork& net,
                                          const std::filesystem::path& bus_profiles_path,
                                          const std::filesystem::path& solar_path) {
    CsvTable t = CsvTable::read_file(bus_profiles_path);
    t.require_columns({"bus_id", "hour", "p_res_kw", "q_res_kvar", "p_ev_kw"});
    HourlyProfileSet out = HourlyProfileSet::zeros(net);
    std::map<int, std::array<bool, kHoursPerDay>> seen;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const int bus_id = static_cast<int>(t.int_cell(r, 0));
        const int hour = static_cast<int>(t.int_cell(r, 1));
        if (!net.has_bus(bus_id) || bus_id == kSlackBusId)
            throw SchemaError(t.source() + ": row " + std::to_string(r + 1) +
                              ": bus " + std::to_string(bus_id) + " is not a non-slack bus");
        if (hour < 0 || hour >= kHoursPerDay)
            throw SchemaError(t.source() + ": row " + std::to_string(r + 1) +
                              ": hour " + std::to_string(hour) + " outside 0..23");
        if (seen[bus_id][hour])
            throw SchemaError(t.source() + ": duplicate entry for (bus " +
                              std::to_string(bus_id) + ", hour " + std::to_string(hour) + ")");
        seen[bus_id][hour] = true;
        out.p_res_kw[bus_id][hour] = t.double_cell(r, 2);
        out.q_res_kvar[bus_id][hour] = t.double_cell(r, 3);
        out.p_ev_kw[bus_id][hour] = t.double_cell(r, 4);
    }
    std::string gaps;
    int gap_count = 0;
    for (const Bus& b : net.buses()) {
        if (b.id == kSlackBusId)
            continue;
        for (int h = 0; h < kHoursPerDay; ++h) {
            if (!seen[b.id][h]) {
                ++gap_count;
                if (gap_count <= 8)
                    gaps += (gaps.empty() ? "" : ", ") + std::string("(bus ") +
                            std::to_string(b.id) + ", hour " + std::to_string(h) + ")";
            }
        }
    }
    if (gap_count > 0)
        throw SchemaError(t.source() + ": missing " + std::to_string(gap_count) +
                          " bus-hour entries: " + gaps + (gap_count > 8 ? ", ..." : ""));

    CsvTable st = CsvTable::read_file(solar_path);
    st.require_columns({"hour", "p_solar_unit_kw"});
    std::array<bool, kHoursPerDay> solar_seen{};
    for (std::size_t r = 0; r < st.rows(); ++r) {
        const int hour = static_cast<int>(st.int_cell(r, 0));
        if (hour < 0 || hour >= kHoursPerDay)
            throw SchemaError(st.source() + ": hour " + std::to_string(hour) + " outside 0..23");
        if (solar_seen[hour])
            throw SchemaError(st.source() + ": duplicate hour " + std::to_string(hour));
        solar_seen[hour] = true;
        const double v = st.double_cell(r, 1);
        if (v < 0.0)
            throw SchemaError(st.source() + ": p_solar_unit_kw must be non-negative at hour " +
                              std::to_string(hour));
        out.p_solar_unit_kw[hour] = v;
    }
    for (int h = 0; h < kHoursPerDay; ++h)
        if (!solar_seen[h])
            throw SchemaError(st.source() + ": missing hour " + std::to_string(h));

    out.validate(net);
    return out;
}

} // namespace feederopt
