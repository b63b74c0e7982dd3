#pragma once

#include <vector>

#include "feederopt/network.hpp"

// Bundled 33-bus radial test feeder (the standard Baran-Wu line and load
// tables). Spot loads in kW/kVAr, impedances in ohms. The same tables ship
// as CSV fixtures under data/.
namespace feederopt::ieee33 {

inline constexpr double kDefaultBaseKv = 11.0;   // the study's base; 12.66 is the literature standard
inline constexpr double kCanonicalBaseKv = 12.66;
inline constexpr double kDefaultBaseMva = 1.0;
inline constexpr int kResidencesPerBus = 92;

struct BusRecord {
    int id;
    double p_kw;
    double q_kvar;
};

struct LineRecord {
    int from;
    int to;
    double r_ohm;
    double x_ohm;
};

inline constexpr BusRecord kBusTable[33] = {
    {1, 0.0, 0.0},    {2, 100.0, 60.0},  {3, 90.0, 40.0},   {4, 120.0, 80.0},
    {5, 60.0, 30.0},  {6, 60.0, 20.0},   {7, 200.0, 100.0}, {8, 200.0, 100.0},
    {9, 60.0, 20.0},  {10, 60.0, 20.0},  {11, 45.0, 30.0},  {12, 60.0, 35.0},
    {13, 60.0, 35.0}, {14, 120.0, 80.0}, {15, 60.0, 10.0},  {16, 60.0, 20.0},
    {17, 60.0, 20.0}, {18, 90.0, 40.0},  {19, 90.0, 40.0},  {20, 90.0, 40.0},
    {21, 90.0, 40.0}, {22, 90.0, 40.0},  {23, 90.0, 50.0},  {24, 420.0, 200.0},
    {25, 420.0, 200.0}, {26, 60.0, 25.0}, {27, 60.0, 25.0}, {28, 60.0, 20.0},
    {29, 120.0, 70.0}, {30, 200.0, 600.0}, {31, 150.0, 70.0}, {32, 210.0, 100.0},
    {33, 60.0, 40.0},
};

inline constexpr LineRecord kLineTable[32] = {
    {1, 2, 0.0922, 0.0470},   {2, 3, 0.4930, 0.2511},   {3, 4, 0.3660, 0.1864},
    {4, 5, 0.3811, 0.1941},   {5, 6, 0.8190, 0.7070},   {6, 7, 0.1872, 0.6188},
    {7, 8, 0.7114, 0.2351},   {8, 9, 1.0300, 0.7400},   {9, 10, 1.0440, 0.7400},
    {10, 11, 0.1966, 0.0650}, {11, 12, 0.3744, 0.1238}, {12, 13, 1.4680, 1.1550},
    {13, 14, 0.5416, 0.7129}, {14, 15, 0.5910, 0.5260}, {15, 16, 0.7463, 0.5450},
    {16, 17, 1.2890, 1.7210}, {17, 18, 0.7320, 0.5740}, {2, 19, 0.1640, 0.1565},
    {19, 20, 1.5042, 1.3554}, {20, 21, 0.4095, 0.4784}, {21, 22, 0.7089, 0.9373},
    {3, 23, 0.4512, 0.3083},  {23, 24, 0.8980, 0.7091}, {24, 25, 0.8960, 0.7011},
    {6, 26, 0.2030, 0.1034},  {26, 27, 0.2842, 0.1447}, {27, 28, 1.0590, 0.9337},
    {28, 29, 0.8042, 0.7006}, {29, 30, 0.5075, 0.2585}, {30, 31, 0.9744, 0.9630},
    {31, 32, 0.3105, 0.3619}, {32, 33, 0.3410, 0.5302},
};

// Lines along the trunk between nodes 1 and 9 are rated 400 A, all others
// 200 A. Stored per line so datasets may override.
inline constexpr double ampacity_for(const LineRecord& l) {
    return (l.from <= 9 && l.to == l.from + 1) ? 400.0 : 200.0;
}

inline RadialNetwork network(double base_kv = kDefaultBaseKv,
                             double base_mva = kDefaultBaseMva,
                             int residences_per_bus = kResidencesPerBus) {
    std::vector<Bus> buses;
    buses.reserve(33);
    for (const BusRecord& b : kBusTable)
        buses.push_back(Bus{b.id, b.p_kw, b.q_kvar, residences_per_bus, 0});
    std::vector<Line> lines;
    lines.reserve(32);
    for (const LineRecord& l : kLineTable)
        lines.push_back(Line{l.from, l.to, l.r_ohm, l.x_ohm, ampacity_for(l)});
    return RadialNetwork(std::move(buses), std::move(lines), base_kv, base_mva);
}

} // namespace feederopt::ieee33
