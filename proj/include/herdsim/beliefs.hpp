#pragma once

#include <map>
#include <variant>
#include <vector>

#include "herdsim/world.hpp"

namespace herdsim {

// Shared facts. Merging is a join (newest step wins, a sighting beats a
// disappearance at equal step), so applying a step's facts is commutative
// and idempotent regardless of arrival order.

struct CellFact {
    Position pos;
    Terrain terrain;
    int step;
};
struct CowFact {
    int id;
    Position pos;
    int step;
};
struct CowGoneFact {
    int id;
    int step;
};
struct OpponentFact {
    int id;
    Position pos;
    int step;
};
struct OpponentGoneFact {
    int id;
    int step;
};
struct AllyFact {
    int id;
    Position pos;
    int step;
};
struct FenceFact {
    int fence;
    bool open;
    int step;
};

using Fact = std::variant<CellFact, CowFact, CowGoneFact, OpponentFact,
                          OpponentGoneFact, AllyFact, FenceFact>;

struct SightingBelief {
    Position pos;
    int seen_step = -1;
    int gone_step = -1;

    bool present() const { return seen_step >= 0 && seen_step >= gone_step; }
};

struct BeliefBase {
    int width = 0;
    int height = 0;
    int fov = 0;
    int self_id = -1;
    Position self_pos;
    int step = -1;

    std::vector<std::uint8_t> known;  // 0 = Unknown
    std::vector<Terrain> terrain;     // valid where known
    std::vector<int> last_seen;       // -1 where never seen
    std::map<int, SightingBelief> cows;
    std::map<int, SightingBelief> opponents;
    std::map<int, std::pair<Position, int>> allies;   // id -> (pos, step)
    std::map<int, std::pair<bool, int>> fence_open;   // fence -> (open, step)

    BeliefBase() = default;
    BeliefBase(int w, int h, int fov_, int self)
        : width(w),
          height(h),
          fov(fov_),
          self_id(self),
          known(static_cast<size_t>(w) * h, 0),
          terrain(static_cast<size_t>(w) * h, Terrain{}),
          last_seen(static_cast<size_t>(w) * h, -1) {}

    bool in_bounds(Position p) const {
        return p.x >= 0 && p.x < width && p.y >= 0 && p.y < height;
    }
    int idx(Position p) const { return p.y * width + p.x; }
    bool is_known(Position p) const { return known[idx(p)] != 0; }
    const Terrain& terrain_at(Position p) const { return terrain[idx(p)]; }

    // Fences whose state was never observed count as closed; they start that way.
    bool fence_believed_open(int fence) const {
        auto it = fence_open.find(fence);
        return it != fence_open.end() && it->second.first;
    }

    int unknown_count() const {
        int n = 0;
        for (std::uint8_t k : known)
            if (!k) ++n;
        return n;
    }

    std::vector<std::pair<int, Position>> believed_cows() const {
        std::vector<std::pair<int, Position>> out;
        for (const auto& [id, b] : cows)
            if (b.present()) out.emplace_back(id, b.pos);
        return out;
    }
    std::vector<Position> believed_opponents() const {
        std::vector<Position> out;
        for (const auto& [id, b] : opponents)
            if (b.present()) out.push_back(b.pos);
        return out;
    }
    std::vector<Position> corral_cells(TeamId team) const {
        std::vector<Position> out;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                Position p{x, y};
                if (known[idx(p)] && terrain[idx(p)].kind == TerrainKind::Corral &&
                    terrain[idx(p)].team == team)
                    out.push_back(p);
            }
        return out;
    }
    // Known cells of each fence, keyed by fence id, positions row-major.
    std::map<int, std::vector<Position>> believed_fence_segments() const {
        std::map<int, std::vector<Position>> out;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                Position p{x, y};
                if (known[idx(p)] && terrain[idx(p)].kind == TerrainKind::Fence)
                    out[terrain[idx(p)].fence].push_back(p);
            }
        return out;
    }
    std::map<int, std::vector<Position>> believed_fence_switches() const {
        std::map<int, std::vector<Position>> out;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                Position p{x, y};
                if (known[idx(p)] && terrain[idx(p)].kind == TerrainKind::Switch)
                    out[terrain[idx(p)].fence].push_back(p);
            }
        return out;
    }
};

// Join-merge of one fact. Never rolls a belief back to an older step.
inline void apply_fact(BeliefBase& b, const Fact& fact) {
    auto merge_sighting = [](std::map<int, SightingBelief>& m, int id,
                             Position pos, int step) {
        SightingBelief& s = m[id];
        if (step > s.seen_step) {
            s.seen_step = step;
            s.pos = pos;
        }
    };
    auto merge_gone = [](std::map<int, SightingBelief>& m, int id, int step) {
        SightingBelief& s = m[id];
        if (step > s.gone_step) s.gone_step = step;
    };

    if (const auto* f = std::get_if<CellFact>(&fact)) {
        int i = b.idx(f->pos);
        if (!b.known[i]) {
            b.known[i] = 1;
            b.terrain[i] = f->terrain;
        }
        if (f->step > b.last_seen[i]) b.last_seen[i] = f->step;
    } else if (const auto* f = std::get_if<CowFact>(&fact)) {
        merge_sighting(b.cows, f->id, f->pos, f->step);
    } else if (const auto* f = std::get_if<CowGoneFact>(&fact)) {
        merge_gone(b.cows, f->id, f->step);
    } else if (const auto* f = std::get_if<OpponentFact>(&fact)) {
        merge_sighting(b.opponents, f->id, f->pos, f->step);
    } else if (const auto* f = std::get_if<OpponentGoneFact>(&fact)) {
        merge_gone(b.opponents, f->id, f->step);
    } else if (const auto* f = std::get_if<AllyFact>(&fact)) {
        auto it = b.allies.find(f->id);
        if (it == b.allies.end() || f->step > it->second.second)
            b.allies[f->id] = {f->pos, f->step};
    } else if (const auto* f = std::get_if<FenceFact>(&fact)) {
        auto it = b.fence_open.find(f->fence);
        if (it == b.fence_open.end() || f->step > it->second.second)
            b.fence_open[f->fence] = {f->open, f->step};
    }
}

// Folds one percept into the beliefs and returns exactly the facts that
// changed something, in a fixed order: cells row-major, then cows, gone cows,
// opponents, gone opponents, allies (self last), fences.
inline std::vector<Fact> integrate_percept(BeliefBase& b, const Percept& p) {
    std::vector<Fact> facts;
    if (p.step < b.step) return facts;  // stale percept, ignore

    for (const VisibleCell& cell : p.visible) {
        int i = b.idx(cell.pos);
        if (!b.known[i]) {
            b.known[i] = 1;
            b.terrain[i] = cell.terrain;
            facts.push_back(CellFact{cell.pos, cell.terrain, p.step});
        }
        if (p.step > b.last_seen[i]) b.last_seen[i] = p.step;
    }

    auto sight = [&](std::map<int, SightingBelief>& m, int id, Position pos,
                     auto make_fact) {
        SightingBelief& s = m[id];
        bool changed = s.seen_step < 0 || s.pos != pos || !s.present();
        if (p.step > s.seen_step) {
            s.seen_step = p.step;
            s.pos = pos;
            if (changed) facts.push_back(make_fact());
        }
    };

    for (const VisibleCell& cell : p.visible) {
        if (cell.occ == OccupantKind::Cow)
            sight(b.cows, cell.occ_id, cell.pos,
                  [&] { return Fact{CowFact{cell.occ_id, cell.pos, p.step}}; });
        else if (cell.occ == OccupantKind::Opponent)
            sight(b.opponents, cell.occ_id, cell.pos,
                  [&] { return Fact{OpponentFact{cell.occ_id, cell.pos, p.step}}; });
    }

    // Stale-belief eviction: a believed entity whose cell is visible now and
    // was not just confirmed is gone.
    auto evict = [&](std::map<int, SightingBelief>& m, auto make_fact) {
        for (auto& [id, s] : m) {
            if (!s.present() || s.seen_step >= p.step) continue;
            if (chebyshev(s.pos, p.pos) > b.fov) continue;
            s.gone_step = p.step;
            facts.push_back(make_fact(id));
        }
    };
    evict(b.cows, [&](int id) { return Fact{CowGoneFact{id, p.step}}; });
    evict(b.opponents, [&](int id) { return Fact{OpponentGoneFact{id, p.step}}; });

    for (const VisibleCell& cell : p.visible) {
        if (cell.occ != OccupantKind::Ally || cell.occ_id == b.self_id) continue;
        auto it = b.allies.find(cell.occ_id);
        bool changed = it == b.allies.end() || it->second.first != cell.pos;
        if (it == b.allies.end() || p.step >= it->second.second) {
            b.allies[cell.occ_id] = {cell.pos, p.step};
            if (changed) facts.push_back(AllyFact{cell.occ_id, cell.pos, p.step});
        }
    }

    // Own position is a fact teammates cannot see for themselves.
    {
        auto it = b.allies.find(b.self_id);
        bool changed = it == b.allies.end() || it->second.first != p.pos;
        b.allies[b.self_id] = {p.pos, p.step};
        if (changed) facts.push_back(AllyFact{b.self_id, p.pos, p.step});
    }

    for (const FenceObs& obs : p.fences) {
        auto it = b.fence_open.find(obs.fence);
        bool changed = it == b.fence_open.end() || it->second.first != obs.open;
        if (it == b.fence_open.end() || p.step >= it->second.second) {
            b.fence_open[obs.fence] = {obs.open, p.step};
            if (changed) facts.push_back(FenceFact{obs.fence, obs.open, p.step});
        }
    }

    b.self_pos = p.pos;
    b.step = p.step;
    return facts;
}

}  // namespace herdsim
