#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "feederopt/config.hpp"
#include "feederopt/load_flow.hpp"
#include "feederopt/paper_reference.hpp"
#include "feederopt/scenario.hpp"

#include <nlohmann/json.hpp>

namespace feederopt {

// Tables print floats with 5 decimals; outputs carry no timestamps, so a
// re-run with the same config and seed is byte-identical.
inline std::string fmt_fixed(double v, int decimals = 5) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

struct ReportManifest {
    std::vector<std::filesystem::path> files;
};

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw IoError("cannot write " + path.string());
    return os;
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

} // namespace detail

inline nlohmann::json breakdown_to_json(const CostBreakdown& b) {
    return {{"p_loss_total_kw", b.p_loss_total_kw},
            {"q_loss_total_kvar", b.q_loss_total_kvar},
            {"v_dev_total_pu", b.v_dev_total_pu},
            {"avg_v_dev_pct", b.avg_v_dev_pct},
            {"battery_penalty_kwh", b.battery_penalty_kwh},
            {"unconverged_hours", b.unconverged_hours},
            {"penalty", b.penalty},
            {"cost", b.cost},
            {"p_loss_kw_by_hour", b.p_loss_kw_by_hour}};
}

inline nlohmann::json solution_to_json(const RadialNetwork& net, const PowerFlowSolution& sol) {
    nlohmann::json j;
    j["converged"] = sol.converged;
    j["iterations"] = sol.iterations;
    j["p_loss_kw"] = sol.p_loss_kw;
    j["q_loss_kvar"] = sol.q_loss_kvar;
    j["slack_p_kw"] = sol.slack_p_kw;
    j["slack_q_kvar"] = sol.slack_q_kvar;
    nlohmann::json buses = nlohmann::json::array();
    for (std::size_t i = 0; i < net.bus_count(); ++i)
        buses.push_back({{"bus", net.buses()[i].id},
                         {"v_pu", sol.v_pu[i]},
                         {"v_angle_rad", sol.v_angle_rad[i]}});
    j["buses"] = buses;
    nlohmann::json lines = nlohmann::json::array();
    for (std::size_t k = 0; k < net.line_count(); ++k)
        lines.push_back({{"from", net.lines()[k].from_bus},
                         {"to", net.lines()[k].to_bus},
                         {"i_a", sol.i_line_a[k]},
                         {"ampacity_a", net.lines()[k].ampacity_a}});
    j["lines"] = lines;
    return j;
}

// run_meta.json: the fully resolved configuration of the run, written by
// every subcommand as its reproducibility record.
inline std::filesystem::path write_run_meta(const std::filesystem::path& outdir,
                                            const RunConfig& cfg, const std::string& command) {
    detail::ensure_dir(outdir);
    nlohmann::json j;
    j["command"] = command;
    j["config"] = cfg.to_json();
    const auto path = outdir / "run_meta.json";
    auto os = detail::open_out(path);
    os << j.dump(2) << "\n";
    return path;
}

inline std::filesystem::path write_voltages_csv(const std::filesystem::path& outdir,
                                                const ScenarioResult& res) {
    const auto path = outdir / "voltages.csv";
    auto os = detail::open_out(path);
    os << "bus,hour,v_pu\n";
    for (const auto& [bus, series] : res.v_traj_pu)
        for (std::size_t h = 0; h < series.size(); ++h)
            os << bus << "," << h << "," << fmt_fixed(series[h]) << "\n";
    return path;
}

inline nlohmann::json scenario_to_json(const ScenarioResult& res) {
    nlohmann::json j;
    j["scenario"] = to_string(res.spec.kind);
    j["alpha"] = res.spec.alpha;
    j["beta"] = res.spec.beta;
    j["breakdown"] = breakdown_to_json(res.breakdown);
    j["voltage_band"] = res.voltage_band;
    j["voltage_band_ok"] = res.voltage_band_ok;
    j["band_violation_bus_hours"] = res.band_violation_bus_hours;
    j["all_hours_converged"] = res.all_hours_converged;
    nlohmann::json traj;
    for (const auto& [bus, series] : res.v_traj_pu)
        traj[std::to_string(bus)] = series;
    j["v_traj_pu"] = traj;
    if (res.schedule) {
        nlohmann::json rows = nlohmann::json::array();
        for (int s = 1; s <= res.schedule->sectors(); ++s)
            rows.push_back(std::vector<double>(
                res.schedule->flat().begin() + static_cast<long>(s - 1) * res.schedule->hours(),
                res.schedule->flat().begin() + static_cast<long>(s) * res.schedule->hours()));
        j["schedule_kw_per_home"] = rows;
    }
    if (res.swarm) {
        j["swarm"] = {{"best_cost", res.swarm->best_cost},
                      {"evaluations", res.swarm->evaluations},
                      {"iterations_run", res.swarm->iterations_run}};
    }
    if (res.fleet) {
        nlohmann::json fleet;
        for (const auto& [bus, e] : res.fleet->e_kwh)
            fleet[std::to_string(bus)] = {{"e_kwh", e},
                                          {"soc_pct", res.fleet->soc_pct.at(bus)},
                                          {"p_actual_kw", res.fleet->p_actual_kw.at(bus)}};
        j["battery"] = {{"penalty_kwh", res.fleet->penalty_kwh}, {"buses", fleet}};
    }
    if (!res.improvements.empty()) {
        nlohmann::json rows = nlohmann::json::array();
        for (const ImprovementRow& row : res.improvements) {
            nlohmann::json r;
            r["baseline"] = row.baseline_name;
            auto put = [&r](const char* key, const std::optional<double>& v) {
                if (v)
                    r[key] = *v;
                else
                    r[key] = nullptr; // undefined: the baseline was zero
            };
            put("loss_reduction_pct", row.loss_reduction_pct);
            put("dev_reduction_pct", row.dev_reduction_pct);
            put("cost_reduction_pct", row.cost_reduction_pct);
            rows.push_back(std::move(r));
        }
        j["improvements"] = rows;
    }
    // quoted results from the source study, for side-by-side comparison
    nlohmann::json ref;
    ref["label"] = std::string(reference::kLabel);
    for (const auto& row : reference::kTable2)
        ref[std::string(row.name)] = {{"p_loss_kw", row.p_loss_kw},
                                      {"avg_v_dev_pct", row.avg_v_dev_pct},
                                      {"cost", row.cost}};
    j["reference"] = ref;
    return j;
}

inline const reference::ScenarioRow* reference_row_for(ScenarioKind kind) {
    for (const auto& row : reference::kTable2)
        if (row.name == to_string(kind))
            return &row;
    return nullptr;
}

inline std::filesystem::path write_scenario_summary(const std::filesystem::path& outdir,
                                                    const ScenarioResult& res,
                                                    const RadialNetwork& net) {
    const auto path = outdir / "summary.txt";
    auto os = detail::open_out(path);
    const CostBreakdown& b = res.breakdown;
    os << "scenario: " << to_string(res.spec.kind) << " (alpha=" << fmt_fixed(res.spec.alpha)
       << ", beta=" << fmt_fixed(res.spec.beta) << ")\n";
    os << "network: " << net.bus_count() << " buses / " << net.line_count() << " lines, base "
       << fmt_fixed(net.base_kv()) << " kV / " << fmt_fixed(net.base_mva()) << " MVA\n\n";
    os << "cost breakdown\n";
    os << "  p_loss_total_kw     = " << fmt_fixed(b.p_loss_total_kw) << "\n";
    os << "  q_loss_total_kvar   = " << fmt_fixed(b.q_loss_total_kvar) << "\n";
    os << "  v_dev_total_pu      = " << fmt_fixed(b.v_dev_total_pu) << "\n";
    os << "  avg_v_dev_pct       = " << fmt_fixed(b.avg_v_dev_pct) << "\n";
    os << "  battery_penalty_kwh = " << fmt_fixed(b.battery_penalty_kwh) << "\n";
    os << "  unconverged_hours   = " << b.unconverged_hours << "\n";
    os << "  cost                = " << fmt_fixed(b.cost) << "\n\n";
    os << "voltage band +/-" << fmt_fixed(res.voltage_band * 100.0, 0) << "%: "
       << (res.voltage_band_ok ? "OK"
                               : "VIOLATED (" + std::to_string(res.band_violation_bus_hours) +
                                     " bus-hours)")
       << "\n\n";
    os << "comparison against " << reference::kLabel << "\n";
    os << "  metric          computed        reference\n";
    const reference::ScenarioRow* ref = reference_row_for(res.spec.kind);
    auto line = [&](const char* metric, double computed, double reference_value) {
        os << "  " << metric;
        for (std::size_t i = std::string(metric).size(); i < 16; ++i)
            os << ' ';
        std::string c = fmt_fixed(computed);
        os << c;
        for (std::size_t i = c.size(); i < 16; ++i)
            os << ' ';
        os << fmt_fixed(reference_value) << "\n";
    };
    if (ref) {
        line("p_loss_kw", b.p_loss_total_kw, ref->p_loss_kw);
        line("avg_v_dev_pct", b.avg_v_dev_pct, ref->avg_v_dev_pct);
        line("cost", b.cost, ref->cost);
    }
    if (!res.improvements.empty()) {
        const reference::ScenarioRow& ref_prop = reference::kTable2.back();
        auto ref_cut = [&](double base, double prop) { return (base - prop) / base * 100.0; };
        os << "\nreduction vs baselines, percent (computed | reference)\n";
        for (const ImprovementRow& row : res.improvements) {
            const reference::ScenarioRow* base_ref = nullptr;
            for (const auto& r : reference::kTable2)
                if (r.name == row.baseline_name)
                    base_ref = &r;
            auto cell = [&](const std::optional<double>& v) {
                return v ? fmt_fixed(*v, 1) : std::string("undefined");
            };
            os << "  vs " << row.baseline_name;
            for (std::size_t i = row.baseline_name.size(); i < 16; ++i)
                os << ' ';
            os << "loss " << cell(row.loss_reduction_pct);
            if (base_ref)
                os << " | " << fmt_fixed(ref_cut(base_ref->p_loss_kw, ref_prop.p_loss_kw), 1);
            os << ", dev " << cell(row.dev_reduction_pct);
            if (base_ref)
                os << " | " << fmt_fixed(ref_cut(base_ref->avg_v_dev_pct, ref_prop.avg_v_dev_pct), 1);
            os << ", cost " << cell(row.cost_reduction_pct);
            if (base_ref)
                os << " | " << fmt_fixed(ref_cut(base_ref->cost, ref_prop.cost), 1);
            os << "\n";
        }
    }
    os << "\nnote: reference inputs (measured EV/solar/residential curves) are unpublished;\n"
          "computed values use the configured profiles and are not expected to match.\n";
    return path;
}

// Scenario report: summary.txt, scenario.json, voltages.csv and, for the
// proposed scenario, schedule.csv.
inline ReportManifest emit_scenario_report(const std::filesystem::path& outdir,
                                           const ScenarioResult& res, const RadialNetwork& net) {
    detail::ensure_dir(outdir);
    ReportManifest m;
    m.files.push_back(write_scenario_summary(outdir, res, net));
    {
        const auto path = outdir / "scenario.json";
        auto os = detail::open_out(path);
        os << scenario_to_json(res).dump(2) << "\n";
        m.files.push_back(path);
    }
    m.files.push_back(write_voltages_csv(outdir, res));
    if (res.schedule) {
        const auto path = outdir / "schedule.csv";
        auto os = detail::open_out(path);
        res.schedule->write_csv(os);
        m.files.push_back(path);
    }
    return m;
}

// Sweep CSV in the shape of the study's cost table: one row per alpha, one
// value column per beta.
inline ReportManifest emit_sweep_report(const std::filesystem::path& outdir,
                                        const SweepResult& sweep) {
    ReportManifest m;
    if (sweep.cells.empty())
        return m;
    detail::ensure_dir(outdir);
    {
        const auto path = outdir / "sweep.csv";
        auto os = detail::open_out(path);
        os << "alpha";
        for (double b : sweep.betas)
            os << ",beta_" << fmt_fixed(b);
        os << "\n";
        for (std::size_t ai = 0; ai < sweep.alphas.size(); ++ai) {
            os << fmt_fixed(sweep.alphas[ai]);
            for (std::size_t bi = 0; bi < sweep.betas.size(); ++bi) {
                const SweepCell& c = sweep.cell(ai, bi);
                os << "," << (c.ok ? fmt_fixed(c.breakdown.cost) : "nan");
            }
            os << "\n";
        }
        m.files.push_back(path);
    }
    {
        const auto path = outdir / "summary.txt";
        auto os = detail::open_out(path);
        os << "sweep: " << sweep.alphas.size() << " alpha values x " << sweep.betas.size()
           << " beta values = " << sweep.cells.size() << " cells\n";
        if (sweep.argmin_index >= 0) {
            const SweepCell& best = sweep.cells[sweep.argmin_index];
            os << "computed minimum: cost " << fmt_fixed(best.breakdown.cost) << " at alpha="
               << fmt_fixed(best.alpha) << ", beta=" << fmt_fixed(best.beta) << "\n";
        } else {
            os << "computed minimum: none (all cells failed)\n";
        }
        os << reference::kLabel << ": cost " << fmt_fixed(reference::kBestCost) << " at alpha="
           << fmt_fixed(reference::kBestAlpha) << ", beta=" << fmt_fixed(reference::kBestBeta)
           << "\n";
        // cell-by-cell comparison when the grid matches the reference grid
        const bool same_grid =
            sweep.alphas.size() == reference::kTable1Alphas.size() &&
            sweep.betas.size() == reference::kTable1Betas.size() &&
            std::equal(sweep.alphas.begin(), sweep.alphas.end(), reference::kTable1Alphas.begin(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; }) &&
            std::equal(sweep.betas.begin(), sweep.betas.end(), reference::kTable1Betas.begin(),
                       [](double a, double b) { return std::abs(a - b) < 1e-12; });
        if (same_grid) {
            os << "\ncomputed | reference cost per cell (" << reference::kLabel << ")\n";
            for (std::size_t ai = 0; ai < sweep.alphas.size(); ++ai) {
                os << "alpha=" << fmt_fixed(sweep.alphas[ai], 2) << ":";
                for (std::size_t bi = 0; bi < sweep.betas.size(); ++bi) {
                    const SweepCell& c = sweep.cell(ai, bi);
                    os << " " << (c.ok ? fmt_fixed(c.breakdown.cost) : "nan") << "|"
                       << fmt_fixed(reference::kTable1Cost[ai][bi]);
                }
                os << "\n";
            }
        }
        int failed = 0;
        for (const SweepCell& c : sweep.cells)
            if (!c.ok)
                ++failed;
        if (failed > 0) {
            os << failed << " failed cells:\n";
            for (const SweepCell& c : sweep.cells)
                if (!c.ok)
                    os << "  alpha=" << fmt_fixed(c.alpha) << ", beta=" << fmt_fixed(c.beta)
                       << ": " << c.error << "\n";
        }
        m.files.push_back(path);
    }
    return m;
}

} // namespace feederopt
