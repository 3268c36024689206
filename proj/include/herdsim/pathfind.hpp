#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "herdsim/beliefs.hpp"

namespace herdsim {

// Per-cell entry cost; -1 marks impassable. Costs are at least 1 so the
// Chebyshev heuristic stays admissible.
struct WeightGrid {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> cost;

    static constexpr std::int32_t impassable = -1;

    WeightGrid() = default;
    WeightGrid(int w, int h, std::int32_t fill = 1)
        : width(w), height(h), cost(static_cast<size_t>(w) * h, fill) {}

    bool in_bounds(Position p) const {
        return p.x >= 0 && p.x < width && p.y >= 0 && p.y < height;
    }
    int idx(Position p) const { return p.y * width + p.x; }
    std::int32_t at(Position p) const { return cost[idx(p)]; }
    std::int32_t& at(Position p) { return cost[idx(p)]; }
    bool passable(Position p) const { return cost[idx(p)] >= 0; }
};

namespace detail {

inline void add_cow_weights(WeightGrid& g, const BeliefBase& b, const Config& cfg) {
    for (const auto& [id, pos] : b.believed_cows()) {
        if (g.passable(pos)) g.at(pos) += cfg.w_cow;
        for (Direction d : all_directions) {
            Position n = moved(pos, d);
            if (g.in_bounds(n) && g.passable(n)) g.at(n) += cfg.w_adj;
        }
    }
}

inline WeightGrid base_weight_grid(const BeliefBase& b, const Config& cfg,
                                   bool closed_fences_passable) {
    WeightGrid g(b.width, b.height);
    for (int y = 0; y < b.height; ++y) {
        for (int x = 0; x < b.width; ++x) {
            Position p{x, y};
            int i = b.idx(p);
            if (!b.known[i]) {
                g.at(p) = std::max(1, cfg.w_unknown);
                continue;
            }
            const Terrain& t = b.terrain[i];
            if (t.kind == TerrainKind::Obstacle) {
                g.at(p) = WeightGrid::impassable;
            } else if (t.kind == TerrainKind::Fence && !b.fence_believed_open(t.fence)) {
                g.at(p) = closed_fences_passable ? 1 + std::max(0, cfg.w_fence)
                                                 : WeightGrid::impassable;
            } else {
                g.at(p) = 1;
            }
        }
    }
    add_cow_weights(g, b, cfg);
    return g;
}

}  // namespace detail

// Believed obstacles and believed-closed fences are impassable; unknown cells
// cost W_unknown; believed cows surcharge their cell and its neighbours.
inline WeightGrid build_weight_grid(const BeliefBase& b, const Config& cfg) {
    return detail::base_weight_grid(b, cfg, false);
}

// Same grid, but believed-closed fences cost 1 + W_fence instead of blocking.
// Used wherever a route is meaningful because a teammate could open the fence.
inline WeightGrid build_weight_grid_open(const BeliefBase& b, const Config& cfg) {
    return detail::base_weight_grid(b, cfg, true);
}

struct Path {
    std::vector<Position> cells;  // start..goal inclusive
    long long cost = 0;           // sum of entered cells, start not charged
};

// A* over 8-connected cells toward the cheapest of `goals`. Ties on f break by
// smaller h, then row-major position, which pins the expansion order.
inline std::optional<Path> astar_any(const WeightGrid& g, Position start,
                                     const std::vector<Position>& goals) {
    if (!g.in_bounds(start)) throw std::invalid_argument("astar: start out of bounds");
    for (Position goal : goals)
        if (!g.in_bounds(goal)) throw std::invalid_argument("astar: goal out of bounds");
    if (goals.empty() || !g.passable(start)) return std::nullopt;

    std::vector<std::uint8_t> is_goal(g.cost.size(), 0);
    bool any_goal_passable = false;
    for (Position goal : goals) {
        if (g.passable(goal)) {
            is_goal[g.idx(goal)] = 1;
            any_goal_passable = true;
        }
    }
    if (!any_goal_passable) return std::nullopt;

    auto h = [&](Position p) {
        long long best = std::numeric_limits<long long>::max();
        for (Position goal : goals)
            if (g.passable(goal)) best = std::min<long long>(best, chebyshev(p, goal));
        return best;
    };

    constexpr long long inf = std::numeric_limits<long long>::max();
    std::vector<long long> dist(g.cost.size(), inf);
    std::vector<std::int32_t> parent(g.cost.size(), -1);

    using Node = std::tuple<long long, long long, int>;  // f, h, idx
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    dist[g.idx(start)] = 0;
    open.emplace(h(start), h(start), g.idx(start));

    while (!open.empty()) {
        auto [f, hv, i] = open.top();
        open.pop();
        long long gcost = f - hv;
        if (gcost != dist[i]) continue;  // superseded entry
        if (is_goal[i]) {
            Path path;
            path.cost = dist[i];
            for (int at = i; at >= 0; at = parent[at])
                path.cells.push_back(Position{at % g.width, at / g.width});
            std::reverse(path.cells.begin(), path.cells.end());
            return path;
        }
        Position p{i % g.width, i / g.width};
        for (Direction d : all_directions) {
            Position n = moved(p, d);
            if (!g.in_bounds(n) || !g.passable(n)) continue;
            long long nd = gcost + g.at(n);
            int ni = g.idx(n);
            if (nd < dist[ni]) {
                dist[ni] = nd;
                parent[ni] = i;
                open.emplace(nd + h(n), h(n), ni);
            }
        }
    }
    return std::nullopt;
}

inline std::optional<Path> astar(const WeightGrid& g, Position start, Position goal) {
    return astar_any(g, start, {goal});
}

// Dijkstra distances from `start` to every cell; -1 where unreachable.
inline std::vector<long long> distance_field(const WeightGrid& g, Position start) {
    if (!g.in_bounds(start)) throw std::invalid_argument("distance_field: start out of bounds");
    constexpr long long inf = std::numeric_limits<long long>::max();
    std::vector<long long> dist(g.cost.size(), inf);
    using Node = std::pair<long long, int>;
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
    if (g.passable(start)) {
        dist[g.idx(start)] = 0;
        open.emplace(0, g.idx(start));
    }
    while (!open.empty()) {
        auto [dc, i] = open.top();
        open.pop();
        if (dc != dist[i]) continue;
        Position p{i % g.width, i / g.width};
        for (Direction d : all_directions) {
            Position n = moved(p, d);
            if (!g.in_bounds(n) || !g.passable(n)) continue;
            long long nd = dc + g.at(n);
            int ni = g.idx(n);
            if (nd < dist[ni]) {
                dist[ni] = nd;
                open.emplace(nd, ni);
            }
        }
    }
    std::vector<long long> out(dist.size());
    for (size_t i = 0; i < dist.size(); ++i) out[i] = dist[i] == inf ? -1 : dist[i];
    return out;
}

// First passable cell on the smallest Chebyshev ring around `seed`,
// row-major within a ring. nullopt when the whole grid is blocked.
inline std::optional<Position> nearest_passable(const WeightGrid& g, Position seed) {
    seed.x = std::clamp(seed.x, 0, g.width - 1);
    seed.y = std::clamp(seed.y, 0, g.height - 1);
    int max_r = std::max(g.width, g.height);
    for (int r = 0; r <= max_r; ++r) {
        for (int y = seed.y - r; y <= seed.y + r; ++y) {
            for (int x = seed.x - r; x <= seed.x + r; ++x) {
                Position p{x, y};
                if (!g.in_bounds(p) || chebyshev(p, seed) != r) continue;
                if (g.passable(p)) return p;
            }
        }
    }
    return std::nullopt;
}

// Next move along `path` from `current`. nullopt signals a stale path: the
// cell is not on the path, or it is the last one (target reached).
inline std::optional<Action> path_next(const Path& path, Position current) {
    for (size_t i = 0; i < path.cells.size(); ++i) {
        if (path.cells[i] != current) continue;
        if (i + 1 == path.cells.size()) return std::nullopt;
        if (auto d = direction_between(current, path.cells[i + 1]))
            return Action::move(*d);
        return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace herdsim
