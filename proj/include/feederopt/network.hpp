#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "feederopt/csv.hpp"
#include "feederopt/errors.hpp"

namespace feederopt {

inline constexpr int kSlackBusId = 1;
inline constexpr double kSqrt3 = 1.7320508075688772;

struct Bus {
    int id = 0;               // 1-based, slack = 1
    double p_load_kw = 0.0;   // nominal active spot load
    double q_load_kvar = 0.0; // nominal reactive spot load
    int n_residences = 0;     // homes connected at the bus
    int sector_id = 0;        // 0 = unassigned / slack
};

struct Line {
    int from_bus = 0;
    int to_bus = 0;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
    double ampacity_a = 0.0; // continuous current rating
};

// Per-unit image of a network: impedances over Z_base, spot loads over S_base.
struct PerUnitNetwork {
    double z_base_ohm = 0.0;
    double i_base_a = 0.0;
    std::vector<double> line_r_pu, line_x_pu;         // line order
    std::vector<double> bus_p_load_pu, bus_q_load_pu; // bus order
};

// A validated radial feeder: a tree of lines rooted at the slack bus.
// Immutable after construction, safe to share across concurrent solves.
class RadialNetwork {
public:
    RadialNetwork(std::vector<Bus> buses, std::vector<Line> lines,
                  double base_kv, double base_mva)
        : buses_(std::move(buses)), lines_(std::move(lines)),
          base_kv_(base_kv), base_mva_(base_mva) {
        if (base_kv_ <= 0.0 || base_mva_ <= 0.0)
            throw ConfigError("network base voltage and power must be positive");
        index_buses();
        validate_fields();
        build_tree();
    }

    static RadialNetwork from_csv(const std::filesystem::path& bus_path,
                                  const std::filesystem::path& line_path,
                                  double base_kv, double base_mva) {
        CsvTable bt = CsvTable::read_file(bus_path);
        bt.require_columns({"bus_id", "p_kw", "q_kvar", "n_residences"});
        std::vector<Bus> buses;
        buses.reserve(bt.rows());
        for (std::size_t r = 0; r < bt.rows(); ++r) {
            Bus b;
            b.id = static_cast<int>(bt.int_cell(r, 0));
            b.p_load_kw = bt.double_cell(r, 1);
            b.q_load_kvar = bt.double_cell(r, 2);
            b.n_residences = static_cast<int>(bt.int_cell(r, 3));
            buses.push_back(b);
        }
        CsvTable lt = CsvTable::read_file(line_path);
        lt.require_columns({"from", "to", "r_ohm", "x_ohm", "ampacity_a"});
        std::vector<Line> lines;
        lines.reserve(lt.rows());
        for (std::size_t r = 0; r < lt.rows(); ++r) {
            Line l;
            l.from_bus = static_cast<int>(lt.int_cell(r, 0));
            l.to_bus = static_cast<int>(lt.int_cell(r, 1));
            l.r_ohm = lt.double_cell(r, 2);
            l.x_ohm = lt.double_cell(r, 3);
            l.ampacity_a = lt.double_cell(r, 4);
            lines.push_back(l);
        }
        return RadialNetwork(std::move(buses), std::move(lines), base_kv, base_mva);
    }

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Line>& lines() const { return lines_; }
    std::size_t bus_count() const { return buses_.size(); }
    std::size_t line_count() const { return lines_.size(); }
    double base_kv() const { return base_kv_; }
    double base_mva() const { return base_mva_; }
    double v_rated_pu() const { return 1.0; }

    double z_base_ohm() const { return base_kv_ * base_kv_ / base_mva_; }
    // line current base for a balanced three-phase feeder
    double i_base_a() const { return base_mva_ * 1e6 / (kSqrt3 * base_kv_ * 1e3); }

    int slack_index() const { return slack_index_; }

    bool has_bus(int bus_id) const { return id_to_index_.count(bus_id) > 0; }

    int index_of(int bus_id) const {
        auto it = id_to_index_.find(bus_id);
        if (it == id_to_index_.end())
            throw ConfigError("unknown bus id " + std::to_string(bus_id));
        return it->second;
    }

    const Bus& bus(int bus_id) const { return buses_[index_of(bus_id)]; }

    // Buses in breadth-first order from the slack; slack first.
    const std::vector<int>& traversal_order() const { return order_; }
    // Line feeding each bus (-1 for slack), oriented parent -> bus.
    const std::vector<int>& parent_line() const { return parent_line_; }
    const std::vector<int>& parent_bus() const { return parent_bus_; }
    const std::vector<std::vector<int>>& children() const { return children_; }

    PerUnitNetwork to_per_unit() const {
        PerUnitNetwork pu;
        pu.z_base_ohm = z_base_ohm();
        pu.i_base_a = i_base_a();
        pu.line_r_pu.reserve(lines_.size());
        pu.line_x_pu.reserve(lines_.size());
        for (const Line& l : lines_) {
            pu.line_r_pu.push_back(l.r_ohm / pu.z_base_ohm);
            pu.line_x_pu.push_back(l.x_ohm / pu.z_base_ohm);
        }
        pu.bus_p_load_pu.reserve(buses_.size());
        pu.bus_q_load_pu.reserve(buses_.size());
        for (const Bus& b : buses_) {
            pu.bus_p_load_pu.push_back(b.p_load_kw / (base_mva_ * 1000.0));
            pu.bus_q_load_pu.push_back(b.q_load_kvar / (base_mva_ * 1000.0));
        }
        return pu;
    }

private:
    void index_buses() {
        if (buses_.empty())
            throw SchemaError("bus table is empty");
        for (std::size_t i = 0; i < buses_.size(); ++i) {
            auto [it, inserted] = id_to_index_.emplace(buses_[i].id, static_cast<int>(i));
            if (!inserted)
                throw SchemaError("duplicate bus id " + std::to_string(buses_[i].id));
        }
        auto slack = id_to_index_.find(kSlackBusId);
        if (slack == id_to_index_.end())
            throw TopologyError("slack bus (id 1) is missing from the bus table");
        slack_index_ = slack->second;
    }

    void validate_fields() const {
        for (const Bus& b : buses_) {
            if (b.p_load_kw < 0.0 || b.q_load_kvar < 0.0)
                throw SchemaError("bus " + std::to_string(b.id) + ": spot loads must be non-negative");
            if (b.n_residences < 0)
                throw SchemaError("bus " + std::to_string(b.id) + ": n_residences must be non-negative");
        }
        std::set<std::pair<int, int>> seen;
        for (const Line& l : lines_) {
            std::string name = "line " + std::to_string(l.from_bus) + "-" + std::to_string(l.to_bus);
            if (!id_to_index_.count(l.from_bus) || !id_to_index_.count(l.to_bus))
                throw SchemaError(name + ": endpoint is not in the bus table");
            if (l.from_bus == l.to_bus)
                throw TopologyError(name + ": self loop");
            if (l.r_ohm < 0.0 || l.x_ohm < 0.0)
                throw SchemaError(name + ": negative impedance");
            if (l.r_ohm == 0.0 && l.x_ohm == 0.0)
                throw SchemaError(name + ": impedance must not be zero");
            if (l.ampacity_a <= 0.0)
                throw SchemaError(name + ": ampacity must be positive");
            auto key = std::minmax(l.from_bus, l.to_bus);
            if (!seen.insert(key).second)
                throw SchemaError(name + ": duplicate line");
        }
    }

    // Orient the line set into a tree rooted at the slack bus.
    void build_tree() {
        const std::size_t n = buses_.size();
        if (lines_.size() != n - 1)
            throw TopologyError("a radial network of " + std::to_string(n) + " buses needs " +
                                std::to_string(n - 1) + " lines, got " + std::to_string(lines_.size()));
        std::vector<std::vector<std::pair<int, int>>> adj(n); // (neighbor bus index, line index)
        for (std::size_t k = 0; k < lines_.size(); ++k) {
            int a = id_to_index_.at(lines_[k].from_bus);
            int b = id_to_index_.at(lines_[k].to_bus);
            adj[a].emplace_back(b, static_cast<int>(k));
            adj[b].emplace_back(a, static_cast<int>(k));
        }
        parent_line_.assign(n, -1);
        parent_bus_.assign(n, -1);
        children_.assign(n, {});
        std::vector<bool> visited(n, false);
        order_.clear();
        order_.push_back(slack_index_);
        visited[slack_index_] = true;
        for (std::size_t head = 0; head < order_.size(); ++head) {
            int u = order_[head];
            // deterministic traversal: visit neighbors in ascending bus id
            auto nb = adj[u];
            std::sort(nb.begin(), nb.end(), [this](auto& l, auto& r) {
                return buses_[l.first].id < buses_[r.first].id;
            });
            for (auto [v, k] : nb) {
                if (visited[v])
                    continue;
                visited[v] = true;
                parent_line_[v] = k;
                parent_bus_[v] = u;
                children_[u].push_back(v);
                order_.push_back(v);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            if (!visited[i])
                throw TopologyError("bus " + std::to_string(buses_[i].id) +
                                    " is not reachable from the slack bus (loop or island)");
    }

    std::vector<Bus> buses_;
    std::vector<Line> lines_;
    double base_kv_;
    double base_mva_;
    int slack_index_ = 0;
    std::map<int, int> id_to_index_;
    std::vector<int> order_;
    std::vector<int> parent_line_;
    std::vector<int> parent_bus_;
    std::vector<std::vector<int>> children_;
};

inline PerUnitNetwork to_per_unit(const RadialNetwork& net) { return net.to_per_unit(); }

// Partition of the non-slack buses into connected subtrees. One battery
// charge/discharge command per sector-hour is shared by all buses of the
// sector, which shrinks the optimization space from buses x hours to
// sectors x hours.
class SectorMap {
public:
    SectorMap(const RadialNetwork& net, const std::map<int, int>& assignments, int sector_count)
        : sector_count_(sector_count) {
        if (sector_count_ < 1)
            throw ConfigError("sector_count must be at least 1");
        sector_of_index_.assign(net.bus_count(), 0);
        for (auto [bus_id, sector] : assignments) {
            int idx = net.index_of(bus_id);
            if (idx == net.slack_index()) {
                if (sector != 0)
                    throw ConfigError("slack bus cannot be assigned to a sector");
                continue;
            }
            if (sector < 1 || sector > sector_count_)
                throw ConfigError("bus " + std::to_string(bus_id) + ": sector " +
                                  std::to_string(sector) + " outside 1.." + std::to_string(sector_count_));
            sector_of_index_[idx] = sector;
        }
        validate(net);
    }

    static SectorMap from_csv(const RadialNetwork& net, const std::filesystem::path& path,
                              int sector_count) {
        CsvTable t = CsvTable::read_file(path);
        t.require_columns({"bus_id", "sector_id"});
        std::map<int, int> assignments;
        for (std::size_t r = 0; r < t.rows(); ++r) {
            int bus_id = static_cast<int>(t.int_cell(r, 0));
            int sector = static_cast<int>(t.int_cell(r, 1));
            if (!assignments.emplace(bus_id, sector).second)
                throw SchemaError(path.string() + ": duplicate bus_id " + std::to_string(bus_id));
        }
        return SectorMap(net, assignments, sector_count);
    }

    // Deterministic default partition. The bundled 33-bus feeder gets the
    // documented 7-sector split; other feeders are partitioned by repeatedly
    // peeling the largest unassigned subtree that fits a balanced quota.
    static SectorMap default_map(const RadialNetwork& net, int sector_count = 7);

    int sector_count() const { return sector_count_; }

    int sector_of(int bus_id, const RadialNetwork& net) const {
        return sector_of_index_[net.index_of(bus_id)];
    }

    // 0 for the slack bus.
    int sector_of_index(int bus_index) const { return sector_of_index_[bus_index]; }

    // sector (1-based) -> bus ids, ascending
    const std::vector<std::vector<int>>& members() const { return members_; }

private:
    void validate(const RadialNetwork& net) {
        members_.assign(sector_count_, {});
        for (std::size_t i = 0; i < net.bus_count(); ++i) {
            if (static_cast<int>(i) == net.slack_index())
                continue;
            int s = sector_of_index_[i];
            if (s < 1 || s > sector_count_)
                throw ConfigError("bus " + std::to_string(net.buses()[i].id) +
                                  " has no sector assignment");
            members_[s - 1].push_back(net.buses()[i].id);
        }
        for (int s = 1; s <= sector_count_; ++s) {
            if (members_[s - 1].empty())
                throw ConfigError("sector " + std::to_string(s) + " is empty");
            std::sort(members_[s - 1].begin(), members_[s - 1].end());
            // a subset of a tree is connected iff exactly one member has its
            // parent outside the subset
            int roots = 0;
            for (int bus_id : members_[s - 1]) {
                int idx = net.index_of(bus_id);
                int parent = net.parent_bus()[idx];
                if (parent < 0 || sector_of_index_[parent] != s)
                    ++roots;
            }
            if (roots != 1)
                throw ConfigError("sector " + std::to_string(s) +
                                  " is not a connected subtree of the feeder");
        }
    }

    int sector_count_;
    std::vector<int> sector_of_index_;
    std::vector<std::vector<int>> members_;
};

namespace detail {

// Peel S-1 connected subtrees off the feeder, each sized to a balanced
// quota; the connected remainder becomes the last sector. Sector numbers are
// then re-labelled in ascending order of their smallest bus id.
inline std::map<int, int> peel_sectors(const RadialNetwork& net, int sector_count) {
    const auto n = static_cast<int>(net.bus_count());
    std::vector<int> label(n, 0);
    std::vector<bool> assigned(n, false);
    assigned[net.slack_index()] = true;
    int remaining = n - 1;

    auto subtree_sizes = [&]() {
        std::vector<int> size(n, 0);
        const auto& order = net.traversal_order();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            int u = *it;
            if (assigned[u])
                continue;
            size[u] = 1;
            for (int c : net.children()[u])
                if (!assigned[c])
                    size[u] += size[c];
        }
        return size;
    };

    for (int s = sector_count; s >= 2; --s) {
        int target = (remaining + s - 1) / s;
        auto size = subtree_sizes();
        int best = -1;
        for (int u = 0; u < n; ++u) {
            if (assigned[u] || size[u] > target)
                continue;
            if (best < 0 || size[u] > size[best] ||
                (size[u] == size[best] && net.buses()[u].id < net.buses()[best].id))
                best = u;
        }
        // a leaf of size 1 always fits, so best is valid here
        std::vector<int> stack{best};
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            assigned[u] = true;
            label[u] = s;
            --remaining;
            for (int c : net.children()[u])
                if (!assigned[c])
                    stack.push_back(c);
        }
    }
    for (int u = 0; u < n; ++u)
        if (!assigned[u])
            label[u] = 1;

    // relabel so sector ids increase with the smallest bus id they contain
    std::map<int, int> min_id;
    for (int u = 0; u < n; ++u)
        if (u != net.slack_index()) {
            auto [it, fresh] = min_id.emplace(label[u], net.buses()[u].id);
            if (!fresh)
                it->second = std::min(it->second, net.buses()[u].id);
        }
    std::vector<std::pair<int, int>> by_min; // (min bus id, old label)
    for (auto [old_label, id] : min_id)
        by_min.emplace_back(id, old_label);
    std::sort(by_min.begin(), by_min.end());
    std::map<int, int> relabel;
    for (std::size_t i = 0; i < by_min.size(); ++i)
        relabel[by_min[i].second] = static_cast<int>(i) + 1;

    std::map<int, int> assignments;
    for (int u = 0; u < n; ++u)
        if (u != net.slack_index())
            assignments[net.buses()[u].id] = relabel[label[u]];
    return assignments;
}

} // namespace detail

inline SectorMap SectorMap::default_map(const RadialNetwork& net, int sector_count) {
    const int non_slack = static_cast<int>(net.bus_count()) - 1;
    if (sector_count < 1)
        throw ConfigError("sector_count must be at least 1");
    if (non_slack < sector_count)
        throw ConfigError("cannot split " + std::to_string(non_slack) +
                          " non-slack buses into " + std::to_string(sector_count) + " sectors");

    // Documented default for the 33-bus feeder.
    if (sector_count == 7 && net.bus_count() == 33) {
        bool ids_1_to_33 = true;
        for (int id = 1; id <= 33 && ids_1_to_33; ++id)
            ids_1_to_33 = net.has_bus(id);
        if (ids_1_to_33) {
            static constexpr std::pair<int, int> kRanges[7] = {
                {2, 5}, {6, 9}, {10, 14}, {15, 18}, {19, 22}, {23, 25}, {26, 33}};
            std::map<int, int> assignments;
            for (int s = 0; s < 7; ++s)
                for (int id = kRanges[s].first; id <= kRanges[s].second; ++id)
                    assignments[id] = s + 1;
            try {
                return SectorMap(net, assignments, 7);
            } catch (const ConfigError&) {
                // custom 33-bus topology where the documented split is not
                // connected; fall through to the generic partition
            }
        }
    }
    return SectorMap(net, detail::peel_sectors(net, sector_count), sector_count);
}

} // namespace feederopt
