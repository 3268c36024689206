#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "herdsim/herdsim.hpp"

namespace herdsim {

inline std::ostream& operator<<(std::ostream& os, const Position& p) {
    return os << "(" << p.x << "," << p.y << ")";
}

namespace test {

inline std::string map_file(const std::string& name) {
    return std::string(MAPS_DIR) + "/" + name;
}

inline std::string map_text(const std::string& name) { return read_file(map_file(name)); }

// Reference shortest-path costs by relaxing edges until nothing changes.
// Deliberately naive and structurally unlike the A* under test.
inline std::vector<long long> relax_distances(const WeightGrid& g, Position start) {
    std::vector<long long> dist(g.cost.size(), -1);
    if (!g.in_bounds(start) || !g.passable(start)) return dist;
    dist[g.idx(start)] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x) {
                Position p{x, y};
                if (dist[g.idx(p)] < 0) continue;
                for (Direction d : all_directions) {
                    Position n = moved(p, d);
                    if (!g.in_bounds(n) || !g.passable(n)) continue;
                    long long nd = dist[g.idx(p)] + g.at(n);
                    if (dist[g.idx(n)] < 0 || nd < dist[g.idx(n)]) {
                        dist[g.idx(n)] = nd;
                        changed = true;
                    }
                }
            }
    }
    return dist;
}

// Reference connected components by label propagation over all pairs.
inline std::vector<std::set<int>> relax_components(
    const std::vector<std::pair<int, Position>>& cows, int link_dist) {
    std::map<int, int> label;
    for (const auto& [id, pos] : cows) label[id] = id;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [ia, pa] : cows)
            for (const auto& [ib, pb] : cows) {
                if (chebyshev(pa, pb) > link_dist) continue;
                int m = std::min(label[ia], label[ib]);
                if (label[ia] != m || label[ib] != m) {
                    label[ia] = label[ib] = m;
                    changed = true;
                }
            }
    }
    std::map<int, std::set<int>> groups;
    for (const auto& [id, l] : label) groups[l].insert(id);
    std::vector<std::set<int>> out;
    for (auto& [l, members] : groups) out.push_back(std::move(members));
    return out;
}

// Beliefs that already know an all-empty field.
inline BeliefBase known_empty(int width, int height, int fov, int self = 0) {
    BeliefBase b(width, height, fov, self);
    std::fill(b.known.begin(), b.known.end(), std::uint8_t{1});
    return b;
}

}  // namespace test
}  // namespace herdsim
