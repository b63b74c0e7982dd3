#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "feederopt/network.hpp"

namespace feederopt::testing {

inline std::filesystem::path data_dir() { return FEEDEROPT_DATA_DIR; }

// slack -- line(r, x) -- one load bus; 11 kV / 1 MVA unless overridden
inline RadialNetwork two_bus(double r_ohm, double x_ohm, double ampacity_a = 200.0,
                             double base_kv = 11.0, double base_mva = 1.0) {
    std::vector<Bus> buses{{1, 0.0, 0.0, 0, 0}, {2, 0.0, 0.0, 92, 0}};
    std::vector<Line> lines{{1, 2, r_ohm, x_ohm, ampacity_a}};
    return RadialNetwork(std::move(buses), std::move(lines), base_kv, base_mva);
}

// slack -- bus2 -- bus3 chain with resistive-or-not lines
inline RadialNetwork three_bus_chain(double r1, double x1, double r2, double x2,
                                     double base_kv = 11.0, double base_mva = 1.0) {
    std::vector<Bus> buses{{1, 0.0, 0.0, 0, 0}, {2, 0.0, 0.0, 92, 0}, {3, 0.0, 0.0, 92, 0}};
    std::vector<Line> lines{{1, 2, r1, x1, 400.0}, {2, 3, r2, x2, 400.0}};
    return RadialNetwork(std::move(buses), std::move(lines), base_kv, base_mva);
}

} // namespace feederopt::testing
