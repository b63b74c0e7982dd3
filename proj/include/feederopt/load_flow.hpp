#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "feederopt/network.hpp"

namespace feederopt {

// Net consumption per bus for a single hour, indexed like net.buses().
// Positive = consumption, negative = injection. The slack entry is ignored.
struct BusInjection {
    std::vector<double> p_kw;
    std::vector<double> q_kvar;

    static BusInjection zeros(const RadialNetwork& net) {
        BusInjection inj;
        inj.p_kw.assign(net.bus_count(), 0.0);
        inj.q_kvar.assign(net.bus_count(), 0.0);
        return inj;
    }

    // nominal spot loads from the dataset
    static BusInjection nominal(const RadialNetwork& net) {
        BusInjection inj = zeros(net);
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            inj.p_kw[i] = net.buses()[i].p_load_kw;
            inj.q_kvar[i] = net.buses()[i].q_load_kvar;
        }
        return inj;
    }

    void validate(const RadialNetwork& net) const {
        if (p_kw.size() != net.bus_count() || q_kvar.size() != net.bus_count())
            throw ConfigError("injection vector length does not match bus count");
        for (std::size_t i = 0; i < p_kw.size(); ++i)
            if (!std::isfinite(p_kw[i]) || !std::isfinite(q_kvar[i]))
                throw ConfigError("injection at bus " + std::to_string(net.buses()[i].id) +
                                  " is not finite");
    }
};

struct SolveOptions {
    double tol_pu = 1e-8;       // max per-bus voltage change between sweeps
    int max_iter = 100;
    double collapse_v_pu = 0.3; // below this the case is treated as voltage collapse

    void validate() const {
        if (tol_pu <= 0.0)
            throw ConfigError("load flow tolerance must be positive");
        if (max_iter < 1)
            throw ConfigError("load flow max_iter must be at least 1");
    }
};

struct PowerFlowSolution {
    std::vector<double> v_pu;        // per bus, magnitude
    std::vector<double> v_angle_rad; // per bus
    std::vector<double> i_line_a;    // per line, magnitude
    double p_loss_kw = 0.0;
    double q_loss_kvar = 0.0;
    double slack_p_kw = 0.0;   // active power drawn from the substation
    double slack_q_kvar = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Backward/forward sweep for radial feeders. Loads are constant power:
// each backward sweep recomputes bus currents from S/V at the latest voltage,
// accumulates branch currents leaf-to-slack (KCL), and the forward sweep
// propagates voltage drops slack-to-leaf (Ohm). Flat start.
//
// Non-convergence within max_iter is reported via the converged flag so the
// optimizer can penalize it; only voltage collapse throws.
inline PowerFlowSolution solve(const RadialNetwork& net, const BusInjection& inj,
                               const SolveOptions& opts = {}) {
    opts.validate();
    inj.validate(net);

    const PerUnitNetwork pu = net.to_per_unit();
    const auto& order = net.traversal_order();
    const auto& parent_line = net.parent_line();
    const auto& parent_bus = net.parent_bus();
    const auto& children = net.children();
    const std::size_t n = net.bus_count();
    const double s_base_kw = net.base_mva() * 1000.0;

    std::vector<std::complex<double>> s_pu(n);
    for (std::size_t i = 0; i < n; ++i)
        s_pu[i] = {inj.p_kw[i] / s_base_kw, inj.q_kvar[i] / s_base_kw};
    s_pu[net.slack_index()] = 0.0; // the substation balances, its own load is not modeled

    std::vector<std::complex<double>> v(n, {1.0, 0.0});
    std::vector<std::complex<double>> i_branch(net.line_count(), {0.0, 0.0});

    PowerFlowSolution sol;
    sol.iterations = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        ++sol.iterations;
        // backward sweep: accumulate branch currents towards the slack
        for (auto rit = order.rbegin(); rit != order.rend(); ++rit) {
            const int b = *rit;
            if (parent_line[b] < 0)
                continue;
            std::complex<double> i_sum = std::conj(s_pu[b] / v[b]);
            for (int c : children[b])
                i_sum += i_branch[parent_line[c]];
            i_branch[parent_line[b]] = i_sum;
        }
        // forward sweep: propagate voltage drops away from the slack
        double max_dv = 0.0;
        for (int b : order) {
            const int k = parent_line[b];
            if (k < 0)
                continue;
            const std::complex<double> z{pu.line_r_pu[k], pu.line_x_pu[k]};
            const std::complex<double> v_new = v[parent_bus[b]] - z * i_branch[k];
            max_dv = std::max(max_dv, std::abs(v_new - v[b]));
            v[b] = v_new;
            if (std::abs(v_new) < opts.collapse_v_pu)
                throw InfeasibleError("voltage collapse at bus " +
                                      std::to_string(net.buses()[b].id) + " (|V| = " +
                                      std::to_string(std::abs(v_new)) + " p.u.)");
        }
        if (max_dv < opts.tol_pu) {
            sol.converged = true;
            break;
        }
    }

    sol.v_pu.resize(n);
    sol.v_angle_rad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        sol.v_pu[i] = std::abs(v[i]);
        sol.v_angle_rad[i] = std::arg(v[i]);
    }
    sol.i_line_a.resize(net.line_count());
    for (std::size_t k = 0; k < net.line_count(); ++k) {
        const double i_mag = std::abs(i_branch[k]);
        sol.i_line_a[k] = i_mag * pu.i_base_a;
        sol.p_loss_kw += i_mag * i_mag * pu.line_r_pu[k] * s_base_kw;
        sol.q_loss_kvar += i_mag * i_mag * pu.line_x_pu[k] * s_base_kw;
    }
    std::complex<double> s_slack{0.0, 0.0};
    for (int c : children[net.slack_index()])
        s_slack += v[net.slack_index()] * std::conj(i_branch[net.parent_line()[c]]);
    sol.slack_p_kw = s_slack.real() * s_base_kw;
    sol.slack_q_kvar = s_slack.imag() * s_base_kw;
    return sol;
}

struct AmpacityViolation {
    int line_index;
    int from_bus;
    int to_bus;
    double i_a;
    double limit_a;
    double margin_a; // i_a - limit_a, positive when violated
};

// Pure report; pre: sol converged.
inline std::vector<AmpacityViolation> check_ampacity(const RadialNetwork& net,
                                                     const PowerFlowSolution& sol) {
    std::vector<AmpacityViolation> out;
    for (std::size_t k = 0; k < net.line_count(); ++k) {
        const Line& l = net.lines()[k];
        if (sol.i_line_a[k] > l.ampacity_a)
            out.push_back({static_cast<int>(k), l.from_bus, l.to_bus, sol.i_line_a[k],
                           l.ampacity_a, sol.i_line_a[k] - l.ampacity_a});
    }
    return out;
}

struct VoltageViolation {
    int bus_id;
    double v_pu;
    double deviation_pu; // |v - 1|
};

inline std::vector<VoltageViolation> check_voltage_band(const RadialNetwork& net,
                                                        const PowerFlowSolution& sol,
                                                        double band) {
    if (band <= 0.0 || band >= 1.0)
        throw ConfigError("voltage band must lie in (0, 1)");
    std::vector<VoltageViolation> out;
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const double dev = std::abs(sol.v_pu[i] - net.v_rated_pu());
        if (dev > band)
            out.push_back({net.buses()[i].id, sol.v_pu[i], dev});
    }
    return out;
}

} // namespace feederopt
