#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <future>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "feederopt/objective.hpp"
#include "feederopt/profiles.hpp"

namespace feederopt {

struct SwarmConfig {
    int particles = 50;
    int iterations = 300;
    double inertia_w = 0.72;
    double c1 = 1.49; // cognitive pull
    double c2 = 1.49; // social pull
    double v_max_frac = 0.5; // velocity clamp as a fraction of each dimension's range
    std::uint64_t seed = 1;
    int stall_iters = 50; // stop after this many iterations without improvement
    int threads = 1;      // worker pool for fitness evaluations; f must be pure
    bool progress_to_stderr = false;

    void validate() const {
        if (particles < 2)
            throw ConfigError("swarm needs at least 2 particles");
        if (iterations < 1)
            throw ConfigError("iterations must be at least 1");
        if (inertia_w < 0.0 || inertia_w > 1.0)
            throw ConfigError("inertia_w must lie in [0, 1]");
        if (c1 < 0.0 || c2 < 0.0)
            throw ConfigError("c1 and c2 must be non-negative");
        if (v_max_frac <= 0.0 || v_max_frac > 1.0)
            throw ConfigError("v_max_frac must lie in (0, 1]");
        if (stall_iters < 1)
            throw ConfigError("stall_iters must be at least 1");
        if (threads < 1)
            throw ConfigError("threads must be at least 1");
    }
};

struct SearchSpace {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t dims() const { return lower.size(); }

    static SearchSpace box(std::size_t dims, double lo, double hi) {
        SearchSpace s;
        s.lower.assign(dims, lo);
        s.upper.assign(dims, hi);
        return s;
    }

    void validate() const {
        if (lower.empty() || lower.size() != upper.size())
            throw ConfigError("search space bounds are empty or mismatched");
        for (std::size_t d = 0; d < lower.size(); ++d)
            if (!(lower[d] < upper[d]))
                throw ConfigError("search space dimension " + std::to_string(d) +
                                  ": lower bound must be below upper bound");
    }
};

struct SwarmResult {
    std::vector<double> best_position;
    double best_cost = 0.0;
    std::vector<double> history; // global best after init and after each iteration
    std::size_t evaluations = 0;
    int iterations_run = 0;
};

namespace detail {

// Evaluate one population. Each slot is written by exactly one worker, and
// all random draws happened before this point, so the outcome is identical
// for any worker count.
inline void evaluate_population(const std::function<double(std::span<const double>)>& f,
                                const std::vector<std::vector<double>>& pos,
                                std::vector<double>& cost, int threads) {
    const int np = static_cast<int>(pos.size());
    if (threads <= 1 || np < 2) {
        for (int p = 0; p < np; ++p)
            cost[p] = f(pos[p]);
        return;
    }
    const int workers = std::min(threads, np);
    std::vector<std::future<void>> tasks;
    tasks.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        tasks.push_back(std::async(std::launch::async, [&, w]() {
            for (int p = w; p < np; p += workers)
                cost[p] = f(pos[p]);
        }));
    }
    for (auto& t : tasks)
        t.get(); // rethrows worker exceptions
}

} // namespace detail

// Global-best PSO over a box. Velocities are clamped per dimension, positions
// clipped to the bounds with the violating velocity component zeroed.
// Deterministic for a fixed seed: all random draws happen on one stream in a
// fixed order, before the (parallelizable) fitness evaluations of an
// iteration.
inline SwarmResult optimize(const std::function<double(std::span<const double>)>& f,
                            const SearchSpace& space, const SwarmConfig& cfg,
                            std::span<const std::vector<double>> seeded_positions = {}) {
    cfg.validate();
    space.validate();
    const std::size_t dims = space.dims();
    const int np = cfg.particles;

    std::vector<double> v_max(dims);
    for (std::size_t d = 0; d < dims; ++d)
        v_max[d] = cfg.v_max_frac * (space.upper[d] - space.lower[d]);

    std::mt19937_64 rng(cfg.seed);
    auto u01 = [&rng]() { return detail::uniform53(rng); };
    auto clip = [&](std::vector<double>& x, std::vector<double>& vel) {
        for (std::size_t d = 0; d < dims; ++d) {
            if (x[d] < space.lower[d]) {
                x[d] = space.lower[d];
                vel[d] = 0.0;
            } else if (x[d] > space.upper[d]) {
                x[d] = space.upper[d];
                vel[d] = 0.0;
            }
        }
    };

    std::vector<std::vector<double>> pos(np, std::vector<double>(dims));
    std::vector<std::vector<double>> vel(np, std::vector<double>(dims, 0.0));
    for (int p = 0; p < np; ++p) {
        if (static_cast<std::size_t>(p) < seeded_positions.size()) {
            if (seeded_positions[p].size() != dims)
                throw ConfigError("seeded position dimension mismatch");
            pos[p] = seeded_positions[p];
            std::vector<double> dummy(dims, 0.0);
            clip(pos[p], dummy);
        } else {
            for (std::size_t d = 0; d < dims; ++d)
                pos[p][d] = space.lower[d] + u01() * (space.upper[d] - space.lower[d]);
        }
    }

    SwarmResult res;
    std::vector<double> pbest_cost(np);
    std::vector<std::vector<double>> pbest = pos;
    detail::evaluate_population(f, pos, pbest_cost, cfg.threads);
    res.evaluations += static_cast<std::size_t>(np);
    int gbest = 0;
    for (int p = 1; p < np; ++p)
        if (pbest_cost[p] < pbest_cost[gbest])
            gbest = p;
    res.best_position = pbest[gbest];
    res.best_cost = pbest_cost[gbest];
    res.history.push_back(res.best_cost);

    int since_improvement = 0;
    for (int it = 0; it < cfg.iterations; ++it) {
        // fixed-order random draws and moves, then evaluations
        for (int p = 0; p < np; ++p) {
            for (std::size_t d = 0; d < dims; ++d) {
                const double r1 = u01();
                const double r2 = u01();
                double nv = cfg.inertia_w * vel[p][d] +
                            cfg.c1 * r1 * (pbest[p][d] - pos[p][d]) +
                            cfg.c2 * r2 * (res.best_position[d] - pos[p][d]);
                nv = std::clamp(nv, -v_max[d], v_max[d]);
                vel[p][d] = nv;
                pos[p][d] += nv;
            }
            clip(pos[p], vel[p]);
        }
        std::vector<double> cost(np);
        detail::evaluate_population(f, pos, cost, cfg.threads);
        res.evaluations += static_cast<std::size_t>(np);
        bool improved = false;
        for (int p = 0; p < np; ++p) {
            if (cost[p] < pbest_cost[p]) {
                pbest_cost[p] = cost[p];
                pbest[p] = pos[p];
            }
            if (cost[p] < res.best_cost) {
                res.best_cost = cost[p];
                res.best_position = pos[p];
                improved = true;
            }
        }
        res.history.push_back(res.best_cost);
        ++res.iterations_run;
        if (cfg.progress_to_stderr)
            std::fprintf(stderr, "%d,%.9g,%zu\n", res.iterations_run, res.best_cost,
                         res.evaluations);
        since_improvement = improved ? 0 : since_improvement + 1;
        if (since_improvement >= cfg.stall_iters)
            break;
    }
    return res;
}

struct ScheduleOptimum {
    DispatchSchedule schedule;
    CostBreakdown breakdown;
    SwarmResult swarm;
    bool fell_back_to_zero = false;
};

// Search the sector x hour command space for the cheapest feasible dispatch.
// One particle is seeded at the zero schedule, and if the swarm somehow ends
// above the do-nothing cost the zero schedule is returned instead: the
// optimizer never does harm.
inline ScheduleOptimum optimize_schedule(const EvalSetup& setup, const ObjectiveWeights& weights_in,
                                         const SwarmConfig& cfg) {
    setup.validate();
    const ObjectiveWeights weights = resolve_weights(setup, weights_in);
    const int sectors = setup.sectors->sector_count();
    const int hours = setup.horizon_hours;
    const std::size_t dims = static_cast<std::size_t>(sectors) * hours;

    const SearchSpace space =
        SearchSpace::box(dims, -setup.battery.p_max_kw_per_home, setup.battery.p_max_kw_per_home);
    const auto decode = [&](std::span<const double> x) {
        return DispatchSchedule::from_flat(sectors, hours, x);
    };
    const auto fitness = [&](std::span<const double> x) {
        return evaluate_day(setup, decode(x), weights).cost;
    };

    const std::vector<std::vector<double>> seeds{std::vector<double>(dims, 0.0)};
    SwarmResult swarm = optimize(fitness, space, cfg, seeds);

    const DispatchSchedule zero(sectors, hours);
    const CostBreakdown zero_bd = evaluate_day(setup, zero, weights);

    ScheduleOptimum out{zero, zero_bd, std::move(swarm), true};
    if (out.swarm.best_cost <= zero_bd.cost) {
        out.schedule = decode(out.swarm.best_position);
        out.breakdown = evaluate_day(setup, out.schedule, weights);
        out.fell_back_to_zero = false;
    }
    return out;
}

} // namespace feederopt
