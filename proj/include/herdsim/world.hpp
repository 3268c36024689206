#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "herdsim/config.hpp"
#include "herdsim/geometry.hpp"
#include "herdsim/rng.hpp"

namespace herdsim {

using TeamId = int;  // 1 or 2

enum class TerrainKind : std::uint8_t { Empty, Obstacle, Corral, Fence, Switch };

struct Terrain {
    TerrainKind kind = TerrainKind::Empty;
    std::int16_t team = 0;    // Corral owner
    std::int16_t fence = -1;  // Fence / Switch membership

    bool operator==(const Terrain& o) const {
        return kind == o.kind && team == o.team && fence == o.fence;
    }
    bool operator!=(const Terrain& o) const { return !(*this == o); }
};

struct FenceInfo {
    std::vector<Position> segments;  // row-major order
    std::vector<Position> switches;  // row-major order, exactly two
    bool open = false;
};

struct AgentEntity {
    Position pos;
    TeamId team = 1;
};

class MapError : public std::runtime_error {
public:
    int line;  // 1-based
    int col;   // 1-based

    MapError(int line_, int col_, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line_) + ", col " +
                             std::to_string(col_) + ": " + msg),
          line(line_),
          col(col_) {}
};

// --- world state ------------------------------------------------------------

struct WorldState {
    int width = 0;
    int height = 0;
    int fov = 0;

    std::vector<Terrain> terrain;        // row-major
    std::map<int, Position> cows;        // cow-id, ids never reused
    std::map<int, AgentEntity> agents;   // agent-id across both teams
    std::vector<FenceInfo> fences;       // fence-id = index
    int step = 0;
    std::array<int, 2> scores{0, 0};     // index team-1
    Rng rng{0};
    int initial_cows = 0;

    bool in_bounds(Position p) const {
        return p.x >= 0 && p.x < width && p.y >= 0 && p.y < height;
    }
    int idx(Position p) const { return p.y * width + p.x; }
    const Terrain& at(Position p) const { return terrain[idx(p)]; }
    Terrain& at(Position p) { return terrain[idx(p)]; }

    // Terrain-level passability for any entity; occupancy is checked separately.
    bool terrain_passable(Position p) const {
        const Terrain& t = at(p);
        if (t.kind == TerrainKind::Obstacle) return false;
        if (t.kind == TerrainKind::Fence) return fences[t.fence].open;
        return true;
    }
};

// --- events -----------------------------------------------------------------

struct AgentMoved {
    int agent;
    Position from, to;
};
struct CowMoved {
    int cow;
    Position from, to;
};
struct FenceToggled {
    int fence;
    bool open;
};
struct CowCaptured {
    int cow;
    TeamId team;
    Position pos;
};

using Event = std::variant<AgentMoved, CowMoved, FenceToggled, CowCaptured>;

// --- map loading ------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

inline void place_entity(WorldState& w, char c, Position p, int line, int col,
                         int& next_cow, int& next_agent) {
    const Terrain& t = w.at(p);
    if (t.kind == TerrainKind::Obstacle)
        throw MapError(line, col, "entity on obstacle");
    if (t.kind == TerrainKind::Fence)
        throw MapError(line, col, "entity on fence segment");
    for (const auto& [id, pos] : w.cows)
        if (pos == p) throw MapError(line, col, "cell already occupied");
    for (const auto& [id, a] : w.agents)
        if (a.pos == p) throw MapError(line, col, "cell already occupied");
    if (c == 'c')
        w.cows[next_cow++] = p;
    else
        w.agents[next_agent++] = AgentEntity{p, c == 'A' ? 1 : 2};
}

}  // namespace detail

// Text format: line 1 is "width height R_fov", then `height` rows of cells,
// then optional overlay lines "<char> <x> <y>" placing extra entities.
inline WorldState load_map(const std::string& text, std::uint64_t seed = 0) {
    std::vector<std::string> lines = detail::split_lines(text);
    if (lines.empty()) throw MapError(1, 1, "empty map");

    WorldState w;
    {
        std::istringstream head(lines[0]);
        if (!(head >> w.width >> w.height >> w.fov) || w.width <= 0 ||
            w.height <= 0 || w.fov < 0) {
            throw MapError(1, 1, "bad header, expected: width height R_fov");
        }
        std::string rest;
        if (head >> rest) throw MapError(1, 1, "bad header, expected: width height R_fov");
    }
    if (static_cast<int>(lines.size()) < 1 + w.height)
        throw MapError(static_cast<int>(lines.size()) + 1, 1,
                       "dimension mismatch: expected " + std::to_string(w.height) + " rows");

    w.terrain.assign(static_cast<size_t>(w.width) * w.height, Terrain{});
    std::vector<Position> fence_cells;
    std::vector<Position> switch_cells;
    int next_cow = 0;
    int next_agent = 0;

    for (int y = 0; y < w.height; ++y) {
        const std::string& row = lines[1 + y];
        int line = 2 + y;
        if (static_cast<int>(row.size()) != w.width)
            throw MapError(line, static_cast<int>(std::min(row.size(), static_cast<size_t>(w.width))) + 1,
                           "dimension mismatch: row is " + std::to_string(row.size()) +
                               " cells, expected " + std::to_string(w.width));
        for (int x = 0; x < w.width; ++x) {
            Position p{x, y};
            char c = row[x];
            switch (c) {
                case '.': break;
                case '#': w.at(p).kind = TerrainKind::Obstacle; break;
                case '1':
                case '2':
                    w.at(p).kind = TerrainKind::Corral;
                    w.at(p).team = static_cast<std::int16_t>(c - '0');
                    break;
                case 'F':
                    w.at(p).kind = TerrainKind::Fence;
                    fence_cells.push_back(p);
                    break;
                case 'S':
                    w.at(p).kind = TerrainKind::Switch;
                    switch_cells.push_back(p);
                    break;
                case 'c':
                case 'A':
                case 'B':
                    detail::place_entity(w, c, p, line, x + 1, next_cow, next_agent);
                    break;
                default:
                    throw MapError(line, x + 1,
                                   std::string("unknown character '") + c + "'");
            }
        }
    }

    // Fence-ids: connected components of segment cells, Chebyshev adjacency,
    // numbered by row-major first member (fence_cells is already row-major).
    for (Position p : fence_cells) {
        if (w.at(p).fence >= 0) continue;
        int id = static_cast<int>(w.fences.size());
        w.fences.push_back(FenceInfo{});
        std::vector<Position> stack{p};
        w.at(p).fence = static_cast<std::int16_t>(id);
        while (!stack.empty()) {
            Position q = stack.back();
            stack.pop_back();
            w.fences[id].segments.push_back(q);
            for (Direction d : all_directions) {
                Position n = moved(q, d);
                if (!w.in_bounds(n)) continue;
                Terrain& t = w.at(n);
                if (t.kind == TerrainKind::Fence && t.fence < 0) {
                    t.fence = static_cast<std::int16_t>(id);
                    stack.push_back(n);
                }
            }
        }
        std::sort(w.fences[id].segments.begin(), w.fences[id].segments.end());
    }

    // A switch belongs to the Chebyshev-nearest fence; ambiguity is an error.
    for (Position p : switch_cells) {
        int best = -1;
        int best_dist = 0;
        bool tied = false;
        for (size_t f = 0; f < w.fences.size(); ++f) {
            int dist = std::numeric_limits<int>::max();
            for (Position s : w.fences[f].segments)
                dist = std::min(dist, chebyshev(p, s));
            if (best < 0 || dist < best_dist) {
                best = static_cast<int>(f);
                best_dist = dist;
                tied = false;
            } else if (dist == best_dist) {
                tied = true;
            }
        }
        if (best < 0)
            throw MapError(p.y + 2, p.x + 1, "switch cell with no fence");
        if (tied)
            throw MapError(p.y + 2, p.x + 1, "switch cell equidistant from two fences");
        w.at(p).fence = static_cast<std::int16_t>(best);
        w.fences[best].switches.push_back(p);
    }
    for (size_t f = 0; f < w.fences.size(); ++f) {
        if (w.fences[f].switches.size() != 2) {
            Position p = w.fences[f].segments.front();
            throw MapError(p.y + 2, p.x + 1,
                           "fence component with " +
                               std::to_string(w.fences[f].switches.size()) +
                               " switch cells, expected 2");
        }
        std::sort(w.fences[f].switches.begin(), w.fences[f].switches.end());
    }

    // Overlay entities.
    for (size_t i = 1 + w.height; i < lines.size(); ++i) {
        const std::string& row = lines[i];
        int line = static_cast<int>(i) + 1;
        if (row.find_first_not_of(" \t") == std::string::npos) continue;
        std::istringstream os(row);
        char c = 0;
        int x = 0, y = 0;
        std::string rest;
        if (!(os >> c >> x >> y) || os >> rest || (c != 'c' && c != 'A' && c != 'B'))
            throw MapError(line, 1, "bad overlay line, expected: c|A|B x y");
        Position p{x, y};
        if (!w.in_bounds(p)) throw MapError(line, 1, "overlay out of bounds");
        detail::place_entity(w, c, p, line, 1, next_cow, next_agent);
    }

    w.rng = Rng(seed);
    w.initial_cows = static_cast<int>(w.cows.size());
    return w;
}

// --- percepts ---------------------------------------------------------------

enum class OccupantKind : std::uint8_t { None, Cow, Ally, Opponent };

struct VisibleCell {
    Position pos;
    Terrain terrain;
    OccupantKind occ = OccupantKind::None;
    int occ_id = -1;
};

struct FenceObs {
    int fence;
    bool open;
};

struct Percept {
    int agent = -1;
    Position pos;
    int step = 0;
    std::vector<VisibleCell> visible;  // row-major
    std::vector<FenceObs> fences;      // fences with a visible segment, by id
};

inline Percept percept(const WorldState& w, int agent_id) {
    auto it = w.agents.find(agent_id);
    if (it == w.agents.end())
        throw std::out_of_range("percept: unknown agent " + std::to_string(agent_id));
    const AgentEntity& self = it->second;

    std::map<Position, std::pair<OccupantKind, int>> occupants;
    for (const auto& [id, pos] : w.cows) occupants[pos] = {OccupantKind::Cow, id};
    for (const auto& [id, a] : w.agents)
        occupants[a.pos] = {a.team == self.team ? OccupantKind::Ally
                                                : OccupantKind::Opponent,
                            id};

    Percept p;
    p.agent = agent_id;
    p.pos = self.pos;
    p.step = w.step;
    std::vector<char> fence_seen(w.fences.size(), 0);
    for (int y = self.pos.y - w.fov; y <= self.pos.y + w.fov; ++y) {
        for (int x = self.pos.x - w.fov; x <= self.pos.x + w.fov; ++x) {
            Position q{x, y};
            if (!w.in_bounds(q)) continue;
            VisibleCell cell;
            cell.pos = q;
            cell.terrain = w.at(q);
            if (auto oc = occupants.find(q); oc != occupants.end()) {
                cell.occ = oc->second.first;
                cell.occ_id = oc->second.second;
            }
            if (cell.terrain.kind == TerrainKind::Fence)
                fence_seen[cell.terrain.fence] = 1;
            p.visible.push_back(cell);
        }
    }
    for (size_t f = 0; f < w.fences.size(); ++f)
        if (fence_seen[f])
            p.fences.push_back(FenceObs{static_cast<int>(f), w.fences[f].open});
    return p;
}

// --- cow model --------------------------------------------------------------

// Desirability of `candidate` for `cow_id`. Entities within R_cow of the cow
// weigh in by proximity to the candidate: agents repel, fellow cows attract,
// and obstacle or closed-segment cells adjacent to the candidate repel.
inline long long cow_desirability(const WorldState& w, int cow_id,
                                  Position candidate, const Config& cfg) {
    auto it = w.cows.find(cow_id);
    if (it == w.cows.end())
        throw std::out_of_range("cow_desirability: unknown cow " + std::to_string(cow_id));
    Position cow = it->second;
    long long score = 0;
    const long long reach = cfg.r_cow + 1;

    for (const auto& [id, a] : w.agents)
        if (chebyshev(a.pos, cow) <= cfg.r_cow)
            score -= static_cast<long long>(cfg.w_flee) * (reach - chebyshev(a.pos, candidate));
    for (const auto& [id, pos] : w.cows)
        if (id != cow_id && chebyshev(pos, cow) <= cfg.r_cow)
            score += static_cast<long long>(cfg.w_herd) * (reach - chebyshev(pos, candidate));
    for (Direction d : all_directions) {
        Position n = moved(candidate, d);
        if (!w.in_bounds(n)) continue;
        const Terrain& t = w.at(n);
        bool blocked = t.kind == TerrainKind::Obstacle ||
                       (t.kind == TerrainKind::Fence && !w.fences[t.fence].open);
        if (blocked) score -= static_cast<long long>(cfg.w_wall) * (reach - 1);
    }
    return score;
}

// --- step -------------------------------------------------------------------

// Fixed phase order: agent moves (ascending id, illegal becomes Stay), fence
// recompute, cow moves (ascending id, RNG tie-break), corral capture, step+1.
inline std::vector<Event> world_step(WorldState& w,
                                     const std::map<int, Action>& actions,
                                     const Config& cfg) {
    std::vector<Event> events;

    auto occupied = [&w](Position p, int ignore_cow, int ignore_agent) {
        for (const auto& [id, pos] : w.cows)
            if (id != ignore_cow && pos == p) return true;
        for (const auto& [id, a] : w.agents)
            if (id != ignore_agent && a.pos == p) return true;
        return false;
    };

    // 1. agents
    for (auto& [id, agent] : w.agents) {
        auto at = actions.find(id);
        if (at == actions.end() || !at->second.is_move) continue;
        Position to = moved(agent.pos, at->second.dir);
        if (!w.in_bounds(to)) continue;
        if (!w.terrain_passable(to)) continue;
        if (occupied(to, -1, id)) continue;
        events.push_back(AgentMoved{id, agent.pos, to});
        agent.pos = to;
    }

    // 2. fences: open while an agent is on or next to a switch; an occupied
    // segment keeps an open fence open until vacated.
    for (size_t f = 0; f < w.fences.size(); ++f) {
        FenceInfo& fence = w.fences[f];
        bool held = false;
        for (Position s : fence.switches) {
            for (const auto& [id, a] : w.agents)
                if (chebyshev(a.pos, s) <= 1) held = true;
        }
        bool next_open = held;
        if (!next_open && fence.open) {
            for (Position seg : fence.segments)
                if (occupied(seg, -1, -1)) next_open = true;
        }
        if (next_open != fence.open) {
            fence.open = next_open;
            events.push_back(FenceToggled{static_cast<int>(f), next_open});
        }
    }

    // 3. cows
    for (auto& [id, pos] : w.cows) {
        std::vector<Position> candidates;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                Position c{pos.x + dx, pos.y + dy};
                if (!w.in_bounds(c)) continue;
                if (!w.terrain_passable(c)) continue;
                if (c != pos && occupied(c, id, -1)) continue;
                candidates.push_back(c);
            }
        }
        long long best = std::numeric_limits<long long>::min();
        std::vector<Position> ties;
        for (Position c : candidates) {
            long long s = cow_desirability(w, id, c, cfg);
            if (s > best) {
                best = s;
                ties.assign(1, c);
            } else if (s == best) {
                ties.push_back(c);
            }
        }
        Position to = ties.size() == 1
                          ? ties[0]
                          : ties[w.rng.below(static_cast<std::uint64_t>(ties.size()))];
        if (to != pos) {
            events.push_back(CowMoved{id, pos, to});
            pos = to;
        }
    }

    // 4. capture
    for (auto it = w.cows.begin(); it != w.cows.end();) {
        const Terrain& t = w.at(it->second);
        if (t.kind == TerrainKind::Corral) {
            w.scores[t.team - 1] += 1;
            events.push_back(CowCaptured{it->first, t.team, it->second});
            it = w.cows.erase(it);
        } else {
            ++it;
        }
    }

    // 5.
    w.step += 1;
    return events;
}

// --- state hash -------------------------------------------------------------

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ull;

    void byte(std::uint8_t b) {
        h ^= b;
        h *= 0x00000100000001b3ull;
    }
    void i32(std::int32_t v) {
        for (int i = 0; i < 4; ++i) byte(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
    }
};

// Canonical order: terrain row-major, sorted entity lists, scores, step.
inline std::uint64_t state_hash(const WorldState& w) {
    Fnv1a f;
    f.i32(w.width);
    f.i32(w.height);
    for (const Terrain& t : w.terrain) {
        f.byte(static_cast<std::uint8_t>(t.kind));
        f.i32(t.team);
        f.i32(t.fence);
    }
    for (const auto& [id, pos] : w.cows) {
        f.i32(id);
        f.i32(pos.x);
        f.i32(pos.y);
    }
    for (const auto& [id, a] : w.agents) {
        f.i32(id);
        f.i32(a.team);
        f.i32(a.pos.x);
        f.i32(a.pos.y);
    }
    f.i32(w.scores[0]);
    f.i32(w.scores[1]);
    f.i32(w.step);
    return f.h;
}

}  // namespace herdsim
