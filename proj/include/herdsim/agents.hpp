#pragma once

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "herdsim/beliefs.hpp"
#include "herdsim/cluster.hpp"
#include "herdsim/config.hpp"
#include "herdsim/pathfind.hpp"

namespace herdsim {

enum class TargetKind { Exploration, Formation, Switch, Idle };

struct Target {
    TargetKind kind = TargetKind::Exploration;
    Position pos;
    int cluster_id = -1;  // Formation
    int fence_id = -1;    // Switch
    double cx = 0.0;      // Formation: cluster centroid when issued
    double cy = 0.0;
    int issued_at = 0;
};

enum class Role { Leader, Scout, Herder };

// Team chatter. Everything an agent sends is broadcast to the whole team;
// receivers pick out what concerns them.
struct BeliefShare {
    std::vector<Fact> facts;
};
struct TargetRequest {
    int agent = -1;
    Position pos;
};
struct TargetAssign {
    int agent = -1;
    Target target;
};
struct Message {
    int sender = -1;
    std::variant<BeliefShare, TargetRequest, TargetAssign> body;
};

struct AgentState {
    int id = -1;
    TeamId team = 0;
    Role role = Role::Herder;
    BeliefBase beliefs;
    std::optional<Target> target;
    std::optional<Path> path;
    int requested_at = -1;
    // Exploration targets teammates currently hold, reconstructed from overheard
    // assignments. The leader reads it when spacing out new ones.
    std::map<int, Target> outstanding;

    AgentState() = default;
    AgentState(int id_, TeamId team_, Role role_, int width, int height, int fov)
        : id(id_), team(team_), role(role_), beliefs(width, height, fov, id_) {}
};

struct AgentContext {
    const Config& cfg;
    int leader_id = -1;
};

struct ActResult {
    Action action = Action::stay();
    std::vector<Message> outbox;
};

// ---- Frontier selection ----

struct FrontierCandidate {
    Position cell;
    long long gain = 0;
    long long cost = 1;
};

// Higher gain/cost wins; ties to the row-major smaller cell. Cross-multiplied
// so the comparison stays exact.
inline bool frontier_better(const FrontierCandidate& a, const FrontierCandidate& b) {
    long long lhs = a.gain * b.cost;
    long long rhs = b.gain * a.cost;
    if (lhs != rhs) return lhs > rhs;
    return a.cell < b.cell;
}

namespace detail {

inline bool frontier_cell(const BeliefBase& b, const WeightGrid& g, Position p) {
    if (!b.is_known(p) || !g.passable(p)) return false;
    for (Direction d : all_directions) {
        Position q = moved(p, d);
        if (b.in_bounds(q) && !b.is_known(q)) return true;
    }
    return false;
}

inline long long frontier_gain(const BeliefBase& b, Position p) {
    long long n = 0;
    for (int dy = -b.fov; dy <= b.fov; ++dy)
        for (int dx = -b.fov; dx <= b.fov; ++dx) {
            Position q{p.x + dx, p.y + dy};
            if (b.in_bounds(q) && !b.is_known(q)) ++n;
        }
    return n;
}

inline std::optional<FrontierCandidate> best_frontier(const BeliefBase& b, const WeightGrid& g,
                                                      const std::vector<long long>& dist,
                                                      const std::vector<Position>& taken) {
    std::optional<FrontierCandidate> best;
    for (int y = 0; y < b.height; ++y)
        for (int x = 0; x < b.width; ++x) {
            Position p{x, y};
            if (dist[b.idx(p)] < 0) continue;
            if (!frontier_cell(b, g, p)) continue;
            bool near_taken = false;
            for (const Position& q : taken)
                if (chebyshev(p, q) <= b.fov) {
                    near_taken = true;
                    break;
                }
            if (near_taken) continue;
            FrontierCandidate cand{p, frontier_gain(b, p),
                                   std::max<long long>(1, dist[b.idx(p)])};
            if (!best || frontier_better(cand, *best)) best = cand;
        }
    return best;
}

}  // namespace detail

// Best reachable frontier cell at least R_fov away from every taken target.
inline std::optional<Target> scout_next_target(const BeliefBase& b,
                                               const std::vector<Position>& taken,
                                               const Config& cfg) {
    if (b.unknown_count() == 0) return std::nullopt;
    WeightGrid g = build_weight_grid_open(b, cfg);
    std::vector<long long> dist = distance_field(g, b.self_pos);
    std::optional<FrontierCandidate> pick = detail::best_frontier(b, g, dist, taken);
    if (!pick) return std::nullopt;
    Target t;
    t.kind = TargetKind::Exploration;
    t.pos = pick->cell;
    t.issued_at = b.step;
    return t;
}

// ---- Formation geometry ----

// Slots on an arc behind the cluster as seen from the corral: distance
// ceil(half bbox diagonal) + D_gap from the centroid, spread over [-60, +60]
// degrees around the corral->centroid axis. Each nominal point snaps within
// Chebyshev 2 (ring by ring, row-major) to a believed-passable, cow-free cell
// strictly farther from the corral than the centroid; slots that cannot snap
// are dropped. clamp_nominal boxes the nominal points into the map first,
// for herds sitting against the edge.
inline std::vector<Position> formation_slots(const Cluster& c,
                                             const std::vector<Position>& corral, int k,
                                             const BeliefBase& b, const Config& cfg,
                                             bool clamp_nominal = false) {
    if (corral.empty() || k <= 0 || c.size() == 0) return {};
    Position cc = c.centroid_cell();
    Position gate = corral.front();
    for (const Position& p : corral)
        if (chebyshev(p, cc) < chebyshev(gate, cc) ||
            (chebyshev(p, cc) == chebyshev(gate, cc) && p < gate))
            gate = p;
    double cx = c.centroid_x();
    double cy = c.centroid_y();
    double ux = cx - gate.x;
    double uy = cy - gate.y;
    double norm = std::hypot(ux, uy);
    if (norm < 1e-9) {
        ux = 1.0;
        uy = 0.0;
    } else {
        ux /= norm;
        uy /= norm;
    }
    double bw = c.bbox_max.x - c.bbox_min.x;
    double bh = c.bbox_max.y - c.bbox_min.y;
    double d = std::ceil(std::hypot(bw, bh) / 2.0) + cfg.d_gap;

    WeightGrid g = build_weight_grid(b, cfg);
    std::set<Position> cow_cells;
    for (const auto& [id, pos] : b.believed_cows()) cow_cells.insert(pos);

    long long n = c.size();
    long long dxm = c.sum_x - static_cast<long long>(gate.x) * n;
    long long dym = c.sum_y - static_cast<long long>(gate.y) * n;
    long long centroid_d2 = dxm * dxm + dym * dym;

    constexpr double pi = 3.14159265358979323846;
    std::vector<Position> out;
    std::set<Position> used;
    for (int i = 0; i < k; ++i) {
        double theta = k == 1 ? 0.0 : (-60.0 + 120.0 * i / (k - 1)) * pi / 180.0;
        double rx = ux * std::cos(theta) - uy * std::sin(theta);
        double ry = ux * std::sin(theta) + uy * std::cos(theta);
        Position nominal{static_cast<int>(std::llround(cx + d * rx)),
                         static_cast<int>(std::llround(cy + d * ry))};
        if (clamp_nominal) {
            nominal.x = std::clamp(nominal.x, 0, b.width - 1);
            nominal.y = std::clamp(nominal.y, 0, b.height - 1);
        }
        std::optional<Position> snapped;
        for (int r = 0; r <= 2 && !snapped; ++r)
            for (int dy = -r; dy <= r && !snapped; ++dy)
                for (int dx = -r; dx <= r && !snapped; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != r) continue;
                    Position p{nominal.x + dx, nominal.y + dy};
                    if (!b.in_bounds(p) || !g.passable(p)) continue;
                    if (cow_cells.count(p) || used.count(p)) continue;
                    long long pdx = (static_cast<long long>(p.x) - gate.x) * n;
                    long long pdy = (static_cast<long long>(p.y) - gate.y) * n;
                    if (pdx * pdx + pdy * pdy <= centroid_d2) continue;
                    snapped = p;
                }
        if (snapped) {
            out.push_back(*snapped);
            used.insert(*snapped);
        }
    }
    return out;
}

// ---- Switch errands ----

struct SwitchPlan {
    int agent = -1;
    Target target;
};

// Scans believed-closed fences in id order. A fence wants opening if a
// believed cow sits within S_near of a known segment, or some teammate's
// target is unreachable on the strict grid yet reachable once this fence
// opens. The opener is picked from `candidates` (never an agent that needs
// the passage itself) by cheapest strict-grid path to a stand cell: a known
// switch cell of the fence or a passable cell adjacent to one. Ties break by
// agent id, then stand cell row-major.
inline std::optional<SwitchPlan> needs_switch(
    const BeliefBase& b, const std::vector<std::pair<int, Target>>& team_targets,
    const std::vector<int>& candidates, const std::map<int, Position>& positions,
    const Config& cfg) {
    WeightGrid strict = build_weight_grid(b, cfg);
    auto segments = b.believed_fence_segments();
    auto switches = b.believed_fence_switches();
    auto cows = b.believed_cows();
    for (const auto& [fid, segs] : segments) {
        if (b.fence_believed_open(fid)) continue;

        bool cow_near = false;
        for (const auto& [cid, cp] : cows) {
            for (const Position& s : segs)
                if (chebyshev(cp, s) <= cfg.s_near) {
                    cow_near = true;
                    break;
                }
            if (cow_near) break;
        }

        WeightGrid as_open = strict;
        for (const Position& s : segs) as_open.at(s) = 1;
        std::set<int> needy;
        for (const auto& [aid, tgt] : team_targets) {
            auto pit = positions.find(aid);
            if (pit == positions.end()) continue;
            if (!b.in_bounds(pit->second) || !b.in_bounds(tgt.pos)) continue;
            if (astar(strict, pit->second, tgt.pos)) continue;
            if (astar(as_open, pit->second, tgt.pos)) needy.insert(aid);
        }
        if (!cow_near && needy.empty()) continue;

        auto sw = switches.find(fid);
        if (sw == switches.end()) continue;
        std::vector<Position> stands;
        std::set<Position> seen;
        for (const Position& s : sw->second) {
            std::vector<Position> local{s};
            for (Direction d : all_directions) local.push_back(moved(s, d));
            std::sort(local.begin(), local.end());
            for (const Position& p : local) {
                if (!b.in_bounds(p) || !strict.passable(p)) continue;
                if (seen.insert(p).second) stands.push_back(p);
            }
        }
        if (stands.empty()) continue;

        std::optional<std::tuple<long long, int, Position>> best;
        for (int aid : candidates) {
            if (needy.count(aid)) continue;
            auto pit = positions.find(aid);
            if (pit == positions.end() || !b.in_bounds(pit->second)) continue;
            for (const Position& p : stands) {
                std::optional<Path> path = astar(strict, pit->second, p);
                if (!path) continue;
                std::tuple<long long, int, Position> key{path->cost, aid, p};
                if (!best || key < *best) best = key;
            }
        }
        if (!best) continue;

        Target t;
        t.kind = TargetKind::Switch;
        t.pos = std::get<2>(*best);
        t.fence_id = fid;
        t.issued_at = b.step;
        return SwitchPlan{std::get<1>(*best), t};
    }
    return std::nullopt;
}

// ---- Delegation ----

// Repeatedly hands the globally cheapest (requester, slot) pair out until
// costs run dry. nullopt entries mean "cannot serve". Returns (row, col)
// index pairs in pick order.
inline std::vector<std::pair<int, int>> greedy_assign(
    const std::vector<std::vector<std::optional<long long>>>& cost) {
    int n = static_cast<int>(cost.size());
    int m = n > 0 ? static_cast<int>(cost.front().size()) : 0;
    std::vector<char> row_done(n, 0), col_done(m, 0);
    std::vector<std::pair<int, int>> out;
    for (;;) {
        std::optional<std::tuple<long long, int, int>> best;
        for (int i = 0; i < n; ++i) {
            if (row_done[i]) continue;
            for (int j = 0; j < m; ++j) {
                if (col_done[j] || !cost[i][j]) continue;
                std::tuple<long long, int, int> key{*cost[i][j], i, j};
                if (!best || key < *best) best = key;
            }
        }
        if (!best) break;
        row_done[std::get<1>(*best)] = 1;
        col_done[std::get<2>(*best)] = 1;
        out.emplace_back(std::get<1>(*best), std::get<2>(*best));
    }
    return out;
}

// Leader's answer to a round of target requests. Every requester gets exactly
// one assignment: a formation slot on the best-ranked cluster, a switch
// errand, a frontier to explore, or an idle stand near the corral.
inline std::vector<TargetAssign> delegate(AgentState& leader,
                                          const std::vector<TargetRequest>& requests,
                                          const Config& cfg) {
    const BeliefBase& b = leader.beliefs;
    int step = b.step;

    std::map<int, Position> req;
    for (const TargetRequest& r : requests) req[r.agent] = r.pos;
    if (req.empty()) return {};

    for (const auto& [aid, pos] : req) leader.outstanding.erase(aid);
    for (auto it = leader.outstanding.begin(); it != leader.outstanding.end();)
        it = step - it->second.issued_at > cfg.t_stale ? leader.outstanding.erase(it)
                                                       : std::next(it);

    std::map<int, Target> result;
    WeightGrid open_grid = build_weight_grid_open(b, cfg);
    std::vector<std::pair<int, Position>> cows = b.believed_cows();
    std::vector<Position> corral = b.corral_cells(leader.team);

    std::vector<Cluster> clusters;
    if (!cows.empty() && !corral.empty()) {
        clusters = build_clusters(cows, cfg);
        std::vector<ClusterRank> ranked =
            rank_clusters(clusters, corral, open_grid, b.believed_opponents(), cfg);
        const Cluster* best = nullptr;
        for (const ClusterRank& r : ranked)
            if (r.reachable) {
                best = &clusters[r.cluster_id];
                break;
            }
        if (best) {
            int k = std::min(static_cast<int>(req.size()), cfg.k_form);
            std::vector<Position> slots = formation_slots(*best, corral, k, b, cfg);
            // A herd cornered against the map edge pushes the whole nominal
            // arc out of bounds and every slot drops; retry with the arc
            // clamped inside so the cows still get flanked at the wall.
            if (slots.empty()) slots = formation_slots(*best, corral, k, b, cfg, true);
            std::vector<int> agents;
            for (const auto& [aid, pos] : req) agents.push_back(aid);
            std::vector<std::vector<std::optional<long long>>> cost(
                agents.size(), std::vector<std::optional<long long>>(slots.size()));
            for (std::size_t i = 0; i < agents.size(); ++i)
                for (std::size_t j = 0; j < slots.size(); ++j)
                    if (std::optional<Path> p = astar(open_grid, req[agents[i]], slots[j]))
                        cost[i][j] = p->cost;
            for (const auto& [i, j] : greedy_assign(cost)) {
                Target t;
                t.kind = TargetKind::Formation;
                t.pos = slots[j];
                t.cluster_id = best->id;
                t.cx = best->centroid_x();
                t.cy = best->centroid_y();
                t.issued_at = step;
                result[agents[i]] = t;
            }
        }
    }

    // A pending fence may preempt one fresh assignment.
    {
        std::map<int, Position> positions;
        for (const auto& [aid, ap] : b.allies) positions[aid] = ap.first;
        positions[leader.id] = b.self_pos;
        for (const auto& [aid, pos] : req) positions[aid] = pos;
        std::vector<std::pair<int, Target>> team_targets;
        for (const auto& [aid, t] : result) team_targets.emplace_back(aid, t);
        for (const auto& [aid, t] : leader.outstanding)
            if (!req.count(aid)) team_targets.emplace_back(aid, t);
        if (leader.target && !req.count(leader.id))
            team_targets.emplace_back(leader.id, *leader.target);
        std::vector<int> candidates;
        for (const auto& [aid, pos] : req) candidates.push_back(aid);
        if (std::optional<SwitchPlan> plan =
                needs_switch(b, team_targets, candidates, positions, cfg))
            result[plan->agent] = plan->target;
    }

    // Frontiers for the rest, spaced at least R_fov from every target already
    // out there (the scout's announcements included).
    std::vector<Position> taken;
    for (const auto& [aid, t] : leader.outstanding)
        if (t.kind == TargetKind::Exploration) taken.push_back(t.pos);
    if (leader.target && leader.target->kind == TargetKind::Exploration &&
        !req.count(leader.id))
        taken.push_back(leader.target->pos);

    std::vector<Position> stands;
    for (const Position& cp : corral)
        for (Direction d : all_directions) {
            Position p = moved(cp, d);
            if (!b.in_bounds(p) || !b.is_known(p)) continue;
            if (b.terrain_at(p).kind == TerrainKind::Corral) continue;
            if (!open_grid.passable(p)) continue;
            stands.push_back(p);
        }
    std::sort(stands.begin(), stands.end());
    stands.erase(std::unique(stands.begin(), stands.end()), stands.end());
    std::set<Position> idle_taken;

    for (const auto& [aid, pos] : req) {
        if (result.count(aid)) continue;
        std::vector<long long> dist = distance_field(open_grid, pos);
        if (std::optional<FrontierCandidate> pick =
                detail::best_frontier(b, open_grid, dist, taken)) {
            Target t;
            t.kind = TargetKind::Exploration;
            t.pos = pick->cell;
            t.issued_at = step;
            result[aid] = t;
            taken.push_back(pick->cell);
            leader.outstanding[aid] = t;
            continue;
        }
        Target t;
        t.kind = TargetKind::Idle;
        t.pos = pos;
        t.issued_at = step;
        std::optional<std::pair<long long, Position>> best_stand;
        std::optional<std::pair<long long, Position>> best_here;
        for (const Position& s : stands) {
            if (dist[b.idx(s)] < 0 || idle_taken.count(s)) continue;
            std::pair<long long, Position> key{dist[b.idx(s)], s};
            if (s == pos) {
                if (!best_here || key < *best_here) best_here = key;
            } else if (!best_stand || key < *best_stand) {
                best_stand = key;
            }
        }
        if (best_stand)
            t.pos = best_stand->second;
        else if (best_here)
            t.pos = best_here->second;
        if (t.pos != pos) idle_taken.insert(t.pos);
        result[aid] = t;
    }

    std::vector<TargetAssign> out;
    for (const auto& [aid, t] : result) out.push_back(TargetAssign{aid, t});
    return out;
}

// ---- Target upkeep ----

enum class Revision { Keep, DropReached, DropStale, DropUnreachable, DropInvalidated };

// Checked every step before acting. Unreachability is judged with closed
// fences merely expensive, not solid, so a target beyond a fence survives
// while a switch errand is in flight.
inline Revision revise_target(const AgentState& a, const Config& cfg) {
    if (!a.target) return Revision::Keep;
    const Target& t = *a.target;
    const BeliefBase& b = a.beliefs;
    if (b.self_pos == t.pos) return Revision::DropReached;
    if (b.step - t.issued_at > cfg.t_stale) return Revision::DropStale;
    if (!b.in_bounds(t.pos)) return Revision::DropUnreachable;
    WeightGrid g = build_weight_grid_open(b, cfg);
    if (!astar(g, b.self_pos, t.pos)) return Revision::DropUnreachable;
    if (t.kind == TargetKind::Formation) {
        bool alive = false;
        for (const Cluster& c : build_clusters(b.believed_cows(), cfg)) {
            double dx = std::abs(c.centroid_x() - t.cx);
            double dy = std::abs(c.centroid_y() - t.cy);
            if (std::max(dx, dy) <= cfg.c_move) {
                alive = true;
                break;
            }
        }
        if (!alive) return Revision::DropInvalidated;
    }
    return Revision::Keep;
}

// ---- Per-step agent logic ----

// The world turns a move into an occupied cell into a Stay, so two agents
// whose cheapest routes cross each other's cells would block forever.
// Surcharging believed agent positions at plan time makes the next plan
// route around a standing blocker. Deliberately not part of the shared grid
// builders: delegation costs stay comparable between requesters.
inline void add_agent_weights(WeightGrid& g, const BeliefBase& b, int self, const Config& cfg) {
    auto charge = [&](Position p) {
        if (g.in_bounds(p) && g.passable(p)) g.at(p) += std::max(0, cfg.w_ally);
    };
    for (const auto& [id, ps] : b.allies)
        if (id != self) charge(ps.first);
    for (Position p : b.believed_opponents()) charge(p);
}

// One agent's whole turn: perceive, share, digest mail, keep or drop the
// target, acquire a new one if needed, then take one step along a freshly
// planned path.
inline ActResult agent_act(AgentState& a, const std::vector<Message>& inbox,
                           const Percept& p, const AgentContext& ctx) {
    const Config& cfg = ctx.cfg;
    ActResult r;

    std::vector<Fact> fresh = integrate_percept(a.beliefs, p);
    if (!fresh.empty()) r.outbox.push_back(Message{a.id, BeliefShare{std::move(fresh)}});

    std::vector<TargetRequest> queued;
    std::optional<Target> handed;
    for (const Message& m : inbox) {
        if (m.sender == a.id) continue;
        if (const BeliefShare* share = std::get_if<BeliefShare>(&m.body)) {
            for (const Fact& f : share->facts) apply_fact(a.beliefs, f);
        } else if (const TargetRequest* tr = std::get_if<TargetRequest>(&m.body)) {
            a.outstanding.erase(tr->agent);
            if (a.role == Role::Leader) queued.push_back(*tr);
        } else if (const TargetAssign* ta = std::get_if<TargetAssign>(&m.body)) {
            if (ta->agent == a.id) {
                if (m.sender == ctx.leader_id &&
                    (!handed || ta->target.issued_at > handed->issued_at))
                    handed = ta->target;
            } else if (ta->target.kind == TargetKind::Exploration) {
                a.outstanding[ta->agent] = ta->target;
            } else {
                a.outstanding.erase(ta->agent);
            }
        }
    }
    if (handed && (!a.target || handed->issued_at >= a.target->issued_at)) {
        a.target = *handed;
        a.path.reset();
        a.requested_at = -1;
    }

    if (a.target && revise_target(a, cfg) != Revision::Keep) {
        a.target.reset();
        a.path.reset();
    }

    if (!a.target && a.role == Role::Scout) {
        std::vector<Position> taken;
        for (const auto& [aid, t] : a.outstanding) taken.push_back(t.pos);
        if (std::optional<Target> t = scout_next_target(a.beliefs, taken, cfg)) {
            a.target = *t;
            r.outbox.push_back(Message{a.id, TargetAssign{a.id, *t}});
        } else {
            a.role = Role::Herder;  // nothing left to scout
        }
    }

    if (a.role == Role::Leader) {
        if (!a.target) queued.push_back(TargetRequest{a.id, a.beliefs.self_pos});
        if (!queued.empty()) {
            for (const TargetAssign& as : delegate(a, queued, cfg)) {
                if (as.agent == a.id) {
                    a.target = as.target;
                    a.path.reset();
                }
                // Self-assignments are broadcast too so teammates can track
                // the leader's own exploration target.
                r.outbox.push_back(Message{a.id, as});
            }
        }
    } else if (!a.target) {
        if (a.requested_at < 0 || a.beliefs.step - a.requested_at >= 2) {
            r.outbox.push_back(Message{a.id, TargetRequest{a.id, a.beliefs.self_pos}});
            a.requested_at = a.beliefs.step;
        }
        return r;
    }

    if (a.target) {
        WeightGrid g = build_weight_grid(a.beliefs, cfg);
        add_agent_weights(g, a.beliefs, a.id, cfg);
        std::optional<Path> path = astar(g, a.beliefs.self_pos, a.target->pos);
        if (!path) {
            WeightGrid open = build_weight_grid_open(a.beliefs, cfg);
            add_agent_weights(open, a.beliefs, a.id, cfg);
            path = astar(open, a.beliefs.self_pos, a.target->pos);
        }
        a.path = path;
        if (path)
            if (std::optional<Action> next = path_next(*path, a.beliefs.self_pos))
                r.action = *next;
    }
    return r;
}

}  // namespace herdsim
