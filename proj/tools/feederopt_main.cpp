// feederopt command line: load-flow snapshots, scenario runs, alpha/beta
// sweeps and dispatch optimization on radial feeders.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "feederopt/feederopt.hpp"

namespace {

using namespace feederopt;

struct CommonOpts {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> network;
    std::optional<double> base_kv;
    std::optional<double> base_mva;
    std::optional<double> alpha;
    std::optional<double> beta;
    bool progress = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "run configuration file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master RNG seed");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--network", o.network, "network source: ieee33 or csv");
    cmd->add_option("--base-kv", o.base_kv, "base voltage (kV)");
    cmd->add_option("--base-mva", o.base_mva, "base power (MVA)");
    cmd->add_option("--alpha", o.alpha, "solar-only home fraction");
    cmd->add_option("--beta", o.beta, "permitted battery percentage");
    cmd->add_flag("--progress", o.progress, "optimizer progress lines (iter,best_cost,evals) to stderr");
}

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig cfg;
    if (o.config_path)
        cfg.apply_file(*o.config_path);
    if (o.seed)
        cfg.seed = *o.seed;
    if (o.out_dir)
        cfg.out_dir = *o.out_dir;
    if (o.network)
        cfg.network = *o.network;
    if (o.base_kv)
        cfg.base_kv = *o.base_kv;
    if (o.base_mva)
        cfg.base_mva = *o.base_mva;
    if (o.alpha)
        cfg.alpha = *o.alpha;
    if (o.beta)
        cfg.beta = *o.beta;
    if (o.progress)
        cfg.swarm.progress_to_stderr = true;
    return cfg;
}

int run_loadflow(const CommonOpts& common, const std::string& hour_load) {
    RunConfig cfg = resolve_config(common);
    cfg.validate();
    const Workspace ws = build_workspace(cfg);

    BusInjection inj = BusInjection::zeros(ws.net);
    if (hour_load == "nominal") {
        inj = BusInjection::nominal(ws.net);
    } else {
        int hour = 0;
        try {
            hour = std::stoi(hour_load);
        } catch (const std::exception&) {
            throw ConfigError("--hour-load must be 'nominal' or an hour 0..23");
        }
        if (hour < 0 || hour >= kHoursPerDay)
            throw ConfigError("--hour-load hour outside 0..23");
        for (std::size_t i = 0; i < ws.net.bus_count(); ++i) {
            const Bus& bus = ws.net.buses()[i];
            if (bus.id == kSlackBusId)
                continue;
            const MixConfig mix = MixConfig::for_bus(cfg.alpha, bus.n_residences);
            const InjectionEntry e =
                compose_bus_injection(bus, mix, ws.profiles, hour, 0.0);
            inj.p_kw[i] = e.p_kw;
            inj.q_kvar[i] = e.q_kvar;
        }
    }
    const PowerFlowSolution sol = solve(ws.net, inj);
    nlohmann::json j = solution_to_json(ws.net, sol);
    j["ampacity_violations"] = check_ampacity(ws.net, sol).size();
    j["voltage_band"] = cfg.voltage_band;
    j["voltage_band_violations"] = check_voltage_band(ws.net, sol, cfg.voltage_band).size();
    std::cout << j.dump(2) << "\n";
    write_run_meta(cfg.out_dir, cfg, "loadflow");
    return 0;
}

int run_validate(const CommonOpts& common) {
    RunConfig cfg = resolve_config(common);
    cfg.validate();
    const Workspace ws = build_workspace(cfg);
    write_run_meta(cfg.out_dir, cfg, "validate");
    std::cout << "OK: " << ws.net.bus_count() << " buses, " << ws.net.line_count() << " lines, "
              << ws.sectors.sector_count() << " sectors\n";
    return 0;
}

int run_scenario_cmd(const CommonOpts& common, std::optional<std::string> name, bool optimize_only) {
    RunConfig cfg = resolve_config(common);
    if (name)
        cfg.scenario = *name;
    if (optimize_only)
        cfg.scenario = "proposed";
    cfg.validate();
    const Workspace ws = build_workspace(cfg);
    const ScenarioInputs inputs = make_inputs(cfg, ws);

    ScenarioSpec spec;
    spec.kind = scenario_kind_from_string(cfg.scenario);
    spec.alpha = cfg.alpha;
    spec.beta = cfg.beta;
    const ScenarioResult res = run_scenario(spec, inputs);

    write_run_meta(cfg.out_dir, cfg, optimize_only ? "optimize" : "scenario");
    const ReportManifest m = emit_scenario_report(cfg.out_dir, res, ws.net);
    for (const auto& f : m.files)
        std::cerr << "wrote " << f.string() << "\n";
    std::cout << "cost " << fmt_fixed(res.breakdown.cost) << " (p_loss "
              << fmt_fixed(res.breakdown.p_loss_total_kw) << " kW, avg dev "
              << fmt_fixed(res.breakdown.avg_v_dev_pct) << " %)\n";
    return 0;
}

int run_sweep(const CommonOpts& common, std::optional<std::string> alphas_csv,
              std::optional<std::string> betas_csv) {
    RunConfig cfg = resolve_config(common);
    if (alphas_csv)
        cfg.sweep_alphas = detail::to_list<double>("--alphas", *alphas_csv, detail::to_double);
    if (betas_csv)
        cfg.sweep_betas = detail::to_list<double>("--betas", *betas_csv, detail::to_double);
    cfg.validate();
    const Workspace ws = build_workspace(cfg);
    const ScenarioInputs inputs = make_inputs(cfg, ws);

    const SweepResult sweep = sweep_alpha_beta(cfg.sweep_alphas, cfg.sweep_betas, inputs, cfg.seed);
    write_run_meta(cfg.out_dir, cfg, "sweep");
    const ReportManifest m = emit_sweep_report(cfg.out_dir, sweep);
    for (const auto& f : m.files)
        std::cerr << "wrote " << f.string() << "\n";
    if (sweep.argmin_index >= 0) {
        const SweepCell& best = sweep.cells[sweep.argmin_index];
        std::cout << "best cost " << fmt_fixed(best.breakdown.cost) << " at alpha="
                  << fmt_fixed(best.alpha) << ", beta=" << fmt_fixed(best.beta) << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"radial feeder battery-dispatch simulation and optimization"};
    app.require_subcommand(1);

    CommonOpts loadflow_opts;
    std::string hour_load = "nominal";
    CLI::App* cmd_loadflow = app.add_subcommand("loadflow", "solve one hour of load flow");
    add_common(cmd_loadflow, loadflow_opts);
    cmd_loadflow->add_option("--hour-load", hour_load,
                             "'nominal' spot loads or an hour 0..23 of the profile set");

    CommonOpts validate_opts;
    CLI::App* cmd_validate = app.add_subcommand("validate", "check config and datasets");
    add_common(cmd_validate, validate_opts);

    CommonOpts scenario_opts;
    std::optional<std::string> scenario_name;
    CLI::App* cmd_scenario = app.add_subcommand("scenario", "run one scenario");
    add_common(cmd_scenario, scenario_opts);
    cmd_scenario->add_option("--name", scenario_name,
                             "grid_only, grid_ev, grid_ev_nbbsr or proposed");

    CommonOpts optimize_opts;
    CLI::App* cmd_optimize = app.add_subcommand("optimize", "optimize the dispatch schedule");
    add_common(cmd_optimize, optimize_opts);

    CommonOpts sweep_opts;
    std::optional<std::string> alphas_csv, betas_csv;
    CLI::App* cmd_sweep = app.add_subcommand("sweep", "run the alpha/beta grid");
    add_common(cmd_sweep, sweep_opts);
    cmd_sweep->add_option("--alphas", alphas_csv, "comma-separated alpha values");
    cmd_sweep->add_option("--betas", betas_csv, "comma-separated beta values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_loadflow->parsed())
            return run_loadflow(loadflow_opts, hour_load);
        if (cmd_validate->parsed())
            return run_validate(validate_opts);
        if (cmd_scenario->parsed())
            return run_scenario_cmd(scenario_opts, scenario_name, false);
        if (cmd_optimize->parsed())
            return run_scenario_cmd(optimize_opts, std::nullopt, true);
        if (cmd_sweep->parsed())
            return run_sweep(sweep_opts, alphas_csv, betas_csv);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const TopologyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const feederopt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
