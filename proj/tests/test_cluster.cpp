#include "support.hpp"

using namespace herdsim;
using test::relax_components;

namespace {

std::vector<std::set<int>> member_sets(const std::vector<Cluster>& clusters) {
    std::vector<std::set<int>> out;
    for (const Cluster& c : clusters) {
        std::set<int> ids;
        for (const auto& [id, pos] : c.members) ids.insert(id);
        out.push_back(std::move(ids));
    }
    return out;
}

bool same_partition(std::vector<std::set<int>> a, std::vector<std::set<int>> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

}  // namespace

TEST_CASE("chebyshev linking forms transitive groups") {
    std::vector<std::pair<int, Position>> cows{
        {0, {0, 0}}, {1, {2, 2}}, {2, {5, 5}}, {3, {9, 0}}};
    std::vector<Cluster> cs = cluster_cows(cows, 2);
    REQUIRE(cs.size() == 3);

    // ids follow the row-major order of each cluster's first cow
    CHECK(cs[0].members == std::vector<std::pair<int, Position>>{{0, {0, 0}}, {1, {2, 2}}});
    CHECK(cs[1].members == std::vector<std::pair<int, Position>>{{3, {9, 0}}});
    CHECK(cs[2].members == std::vector<std::pair<int, Position>>{{2, {5, 5}}});
    for (size_t i = 0; i < cs.size(); ++i) CHECK(cs[i].id == static_cast<int>(i));

    CHECK(cs[0].bbox_min == Position{0, 0});
    CHECK(cs[0].bbox_max == Position{2, 2});
    CHECK(cs[0].centroid_cell() == Position{1, 1});

    // one link further and everything within reach merges
    std::vector<Cluster> loose = cluster_cows(cows, 3);
    REQUIRE(loose.size() == 2);
    CHECK(member_sets(loose) == std::vector<std::set<int>>{{0, 1, 2}, {3}});
}

TEST_CASE("oversized clusters split along the long axis") {
    Config cfg;
    cfg.link_dist = 1;
    cfg.max_cluster = 5;
    std::vector<std::pair<int, Position>> row;
    for (int i = 0; i < 10; ++i) row.push_back({i, {i, 3}});

    std::vector<Cluster> cs = build_clusters(row, cfg);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].size() == 5);
    CHECK(cs[1].size() == 5);
    for (const auto& [id, pos] : cs[0].members) CHECK(pos.x < 5);
    for (const auto& [id, pos] : cs[1].members) CHECK(pos.x >= 5);

    cfg.max_cluster = 3;
    std::vector<std::pair<int, Position>> col;
    for (int i = 0; i < 7; ++i) col.push_back({i, {3, i}});
    cs = build_clusters(col, cfg);
    REQUIRE(cs.size() == 3);
    CHECK(cs[0].size() == 2);
    CHECK(cs[1].size() == 2);
    CHECK(cs[2].size() == 3);
    CHECK(cs[0].min_member() == Position{3, 0});
    CHECK(cs[1].min_member() == Position{3, 2});
    CHECK(cs[2].min_member() == Position{3, 4});
}

TEST_CASE("build_clusters matches the component oracle when nothing splits") {
    Rng rng(777);
    Config cfg;
    cfg.max_cluster = 99;
    for (int trial = 0; trial < 30; ++trial) {
        cfg.link_dist = 1 + static_cast<int>(rng.below(3));
        std::set<Position> used;
        std::vector<std::pair<int, Position>> cows;
        int n = 1 + static_cast<int>(rng.below(40));
        while (static_cast<int>(cows.size()) < n) {
            Position p{static_cast<int>(rng.below(40)), static_cast<int>(rng.below(40))};
            if (used.insert(p).second)
                cows.push_back({static_cast<int>(cows.size()), p});
        }
        std::vector<Cluster> cs = build_clusters(cows, cfg);
        CHECK(same_partition(member_sets(cs), relax_components(cows, cfg.link_dist)));
    }
}

TEST_CASE("build_clusters partitions, caps and orders") {
    Rng rng(4242);
    for (int trial = 0; trial < 30; ++trial) {
        Config cfg;
        cfg.link_dist = 1 + static_cast<int>(rng.below(3));
        cfg.max_cluster = 1 + static_cast<int>(rng.below(8));
        std::set<Position> used;
        std::vector<std::pair<int, Position>> cows;
        int n = 1 + static_cast<int>(rng.below(40));
        while (static_cast<int>(cows.size()) < n) {
            Position p{static_cast<int>(rng.below(40)), static_cast<int>(rng.below(40))};
            if (used.insert(p).second)
                cows.push_back({static_cast<int>(cows.size()), p});
        }

        std::vector<Cluster> cs = build_clusters(cows, cfg);
        std::vector<std::set<int>> oracle = relax_components(cows, cfg.link_dist);

        std::set<int> seen;
        Position prev_min{-1, -1};
        for (size_t i = 0; i < cs.size(); ++i) {
            CHECK(cs[i].id == static_cast<int>(i));
            CHECK(cs[i].size() <= cfg.max_cluster);
            CHECK(cs[i].size() >= 1);
            if (i > 0) CHECK(prev_min < cs[i].min_member());
            prev_min = cs[i].min_member();

            // every cluster stays inside one oracle component
            std::set<int> ids;
            for (const auto& [id, pos] : cs[i].members) {
                CHECK(seen.insert(id).second);
                ids.insert(id);
            }
            bool inside = false;
            for (const std::set<int>& comp : oracle)
                if (std::includes(comp.begin(), comp.end(), ids.begin(), ids.end()))
                    inside = true;
            CHECK(inside);
        }
        CHECK(seen.size() == cows.size());
    }
}

TEST_CASE("centroid_cell rounds half away from zero") {
    Cluster a;
    a.members = {{0, {0, 0}}, {1, {1, 0}}};
    a.recompute();
    CHECK(a.centroid_cell() == Position{1, 0});

    Cluster b;
    b.members = {{0, {0, 0}}, {1, {1, 0}}, {2, {0, 1}}};
    b.recompute();
    CHECK(b.centroid_cell() == Position{0, 0});
}

TEST_CASE("cluster ranking orders by herd cost") {
    Config cfg;
    WeightGrid g(20, 1);
    std::vector<Cluster> cs = cluster_cows({{0, {5, 0}}, {1, {9, 0}}}, 2);
    REQUIRE(cs.size() == 2);
    std::vector<Position> corral{{0, 0}};

    std::vector<ClusterRank> ranked = rank_clusters(cs, corral, g, {}, cfg);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].cluster_id == 0);
    CHECK(ranked[0].score == 5);
    CHECK(ranked[1].cluster_id == 1);
    CHECK(ranked[1].score == 9);
    CHECK(ranked[0].reachable);
    CHECK(ranked[1].reachable);

    // an opponent camped on the near herd flips the order
    Config tight = cfg;
    tight.r_opp = 2;
    ranked = rank_clusters(cs, corral, g, {{5, 0}}, tight);
    CHECK(ranked[0].cluster_id == 1);
    CHECK(ranked[0].score == 9);
    CHECK(ranked[1].cluster_id == 0);
    CHECK(ranked[1].score == 15);
}

TEST_CASE("opponent proximity uses the exact rational centroid") {
    Config cfg;
    WeightGrid g(20, 1);
    std::vector<Cluster> cs = cluster_cows({{0, {0, 0}}, {1, {1, 0}}}, 2);
    REQUIRE(cs.size() == 1);
    std::vector<Position> corral{{19, 0}};

    // centroid x = 0.5; R_opp = 10: an opponent at x=10 is 9.5 away, at x=11 it is 10.5
    std::vector<ClusterRank> near = rank_clusters(cs, corral, g, {{10, 0}}, cfg);
    std::vector<ClusterRank> far = rank_clusters(cs, corral, g, {{11, 0}}, cfg);
    CHECK(near[0].score == 28);
    CHECK(far[0].score == 18);
}

TEST_CASE("unreachable clusters rank last") {
    Config cfg;
    WeightGrid g(20, 1);
    g.at({15, 0}) = WeightGrid::impassable;
    std::vector<Cluster> cs = cluster_cows({{0, {5, 0}}, {1, {17, 0}}}, 2);
    REQUIRE(cs.size() == 2);

    std::vector<ClusterRank> ranked = rank_clusters(cs, {{0, 0}}, g, {}, cfg);
    CHECK(ranked[0].cluster_id == 0);
    CHECK(ranked[0].reachable);
    CHECK(ranked[1].cluster_id == 1);
    CHECK_FALSE(ranked[1].reachable);
}

TEST_CASE("a blocked centroid seeds from the nearest passable cell") {
    Config cfg;
    WeightGrid g(20, 1);
    g.at({6, 0}) = WeightGrid::impassable;
    std::vector<Cluster> cs = cluster_cows({{0, {5, 0}}, {1, {7, 0}}}, 2);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].centroid_cell() == Position{6, 0});

    std::vector<ClusterRank> ranked = rank_clusters(cs, {{0, 0}}, g, {}, cfg);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0].reachable);
    CHECK(ranked[0].score == 5);  // seeded from (5,0)
}
