#pragma once

#include <algorithm>
#include <vector>

#include "herdsim/pathfind.hpp"

namespace herdsim {

struct Cluster {
    int id = 0;
    std::vector<std::pair<int, Position>> members;  // (cow-id, pos), by cow-id
    Position bbox_min, bbox_max;
    long long sum_x = 0, sum_y = 0;

    int size() const { return static_cast<int>(members.size()); }
    double centroid_x() const { return static_cast<double>(sum_x) / size(); }
    double centroid_y() const { return static_cast<double>(sum_y) / size(); }

    // Centroid rounded half away from zero, in integers for determinism.
    Position centroid_cell() const {
        long long n = size();
        return {static_cast<int>((2 * sum_x + n) / (2 * n)),
                static_cast<int>((2 * sum_y + n) / (2 * n))};
    }

    Position min_member() const {
        Position best = members.front().second;
        for (const auto& [id_, p] : members) best = std::min(best, p);
        return best;
    }

    void recompute() {
        std::sort(members.begin(), members.end());
        bbox_min = bbox_max = members.front().second;
        sum_x = sum_y = 0;
        for (const auto& [id_, p] : members) {
            bbox_min.x = std::min(bbox_min.x, p.x);
            bbox_min.y = std::min(bbox_min.y, p.y);
            bbox_max.x = std::max(bbox_max.x, p.x);
            bbox_max.y = std::max(bbox_max.y, p.y);
            sum_x += p.x;
            sum_y += p.y;
        }
    }
};

namespace detail {

inline std::vector<Cluster> renumber(std::vector<Cluster> clusters) {
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        return a.min_member() < b.min_member();
    });
    for (size_t i = 0; i < clusters.size(); ++i) clusters[i].id = static_cast<int>(i);
    return clusters;
}

}  // namespace detail

// Connected components linking cows within Chebyshev distance L.
// Ids follow the row-major order of each cluster's smallest member.
inline std::vector<Cluster> cluster_cows(const std::vector<std::pair<int, Position>>& cows,
                                         int link_dist) {
    int n = static_cast<int>(cows.size());
    std::vector<int> comp(n, -1);
    std::vector<Cluster> out;
    for (int i = 0; i < n; ++i) {
        if (comp[i] >= 0) continue;
        std::vector<int> stack{i};
        comp[i] = i;
        Cluster c;
        while (!stack.empty()) {
            int j = stack.back();
            stack.pop_back();
            c.members.push_back(cows[j]);
            for (int k = 0; k < n; ++k) {
                if (comp[k] < 0 && chebyshev(cows[j].second, cows[k].second) <= link_dist) {
                    comp[k] = i;
                    stack.push_back(k);
                }
            }
        }
        c.recompute();
        out.push_back(std::move(c));
    }
    return detail::renumber(std::move(out));
}

// Median bisection along the longer bbox axis (ties pick x) until every part
// is at most max_size. Members at the median fill the lower half first, so the
// halves never differ by more than one.
inline std::vector<Cluster> split_cluster(const Cluster& c, int max_size) {
    if (c.size() <= max_size) return {c};

    bool along_x = (c.bbox_max.x - c.bbox_min.x) >= (c.bbox_max.y - c.bbox_min.y);
    std::vector<std::pair<int, Position>> sorted = c.members;
    std::sort(sorted.begin(), sorted.end(),
              [along_x](const std::pair<int, Position>& a, const std::pair<int, Position>& b) {
                  int pa = along_x ? a.second.x : a.second.y;
                  int pb = along_x ? b.second.x : b.second.y;
                  int sa = along_x ? a.second.y : a.second.x;
                  int sb = along_x ? b.second.y : b.second.x;
                  if (pa != pb) return pa < pb;
                  if (sa != sb) return sa < sb;
                  return a.first < b.first;
              });

    size_t cut = (sorted.size() + 1) / 2;
    Cluster lower, upper;
    lower.members.assign(sorted.begin(), sorted.begin() + cut);
    upper.members.assign(sorted.begin() + cut, sorted.end());
    lower.recompute();
    upper.recompute();

    std::vector<Cluster> out;
    for (const Cluster& part : {lower, upper})
        for (Cluster& leaf : split_cluster(part, max_size)) out.push_back(std::move(leaf));
    return detail::renumber(std::move(out));
}

// Full pipeline: link clusters, split oversized ones, renumber the leaves.
inline std::vector<Cluster> build_clusters(const std::vector<std::pair<int, Position>>& cows,
                                           const Config& cfg) {
    std::vector<Cluster> leaves;
    for (const Cluster& c : cluster_cows(cows, cfg.link_dist))
        for (Cluster& leaf : split_cluster(c, cfg.max_cluster))
            leaves.push_back(std::move(leaf));
    return detail::renumber(std::move(leaves));
}

struct ClusterRank {
    int cluster_id = 0;
    bool reachable = false;
    long long score = 0;
};

// Ascending herd-first order: path cost from the cluster to the nearest corral
// cell plus P_opp per opponent within R_opp of the centroid. Unreachable
// clusters rank last; all ties break by cluster id.
inline std::vector<ClusterRank> rank_clusters(const std::vector<Cluster>& clusters,
                                              const std::vector<Position>& corral_cells,
                                              const WeightGrid& grid,
                                              const std::vector<Position>& opponents,
                                              const Config& cfg) {
    std::vector<ClusterRank> out;
    for (const Cluster& c : clusters) {
        ClusterRank r;
        r.cluster_id = c.id;
        std::optional<Position> start = nearest_passable(grid, c.centroid_cell());
        std::optional<Path> path;
        if (start && !corral_cells.empty()) path = astar_any(grid, *start, corral_cells);
        if (path) {
            r.reachable = true;
            r.score = path->cost;
            long long n = c.size();
            long long bound = static_cast<long long>(cfg.r_opp) * n;
            for (Position opp : opponents) {
                // exact Chebyshev test against the rational centroid
                if (std::abs(opp.x * n - c.sum_x) <= bound &&
                    std::abs(opp.y * n - c.sum_y) <= bound)
                    r.score += cfg.p_opp;
            }
        }
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const ClusterRank& a, const ClusterRank& b) {
        if (a.reachable != b.reachable) return a.reachable;
        if (a.reachable && a.score != b.score) return a.score < b.score;
        return a.cluster_id < b.cluster_id;
    });
    return out;
}

}  // namespace herdsim
