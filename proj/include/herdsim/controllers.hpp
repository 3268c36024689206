#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "herdsim/agents.hpp"
#include "herdsim/rng.hpp"
#include "herdsim/world.hpp"

namespace herdsim {

struct StartInfo {
    TeamId team = 0;
    std::vector<int> agents;  // this team's agent ids, ascending
    int width = 0;
    int height = 0;
    int fov = 0;
    int steps = 0;
};

// A whole team behind one interface. act() receives this team's percepts in
// ascending agent id and returns an action per agent; missing entries play
// out as Stay.
class TeamController {
public:
    virtual ~TeamController() = default;
    virtual void start(const StartInfo& info) = 0;
    virtual std::map<int, Action> act(int step, const std::vector<Percept>& percepts) = 0;
    virtual void finish(const std::array<int, 2>& /*scores*/) {}
};

class IdleTeam : public TeamController {
public:
    void start(const StartInfo&) override {}
    std::map<int, Action> act(int, const std::vector<Percept>& percepts) override {
        std::map<int, Action> out;
        for (const Percept& p : percepts) out[p.agent] = Action::stay();
        return out;
    }
};

// Uniform over the legal actions each step (Stay is always legal). Runs on
// its own stream so the world's rolls stay unaffected.
class RandomTeam : public TeamController {
public:
    explicit RandomTeam(std::uint64_t seed) : rng_(seed) {}
    void start(const StartInfo&) override {}
    std::map<int, Action> act(int, const std::vector<Percept>& percepts) override {
        std::map<int, Action> out;
        for (const Percept& p : percepts) {
            std::map<int, bool> fence_open;
            for (const FenceObs& f : p.fences) fence_open[f.fence] = f.open;
            std::map<Position, const VisibleCell*> cells;
            for (const VisibleCell& c : p.visible) cells[c.pos] = &c;
            std::vector<Action> legal{Action::stay()};
            for (Direction d : all_directions) {
                auto it = cells.find(moved(p.pos, d));
                if (it == cells.end()) continue;
                const VisibleCell& c = *it->second;
                if (c.occ != OccupantKind::None) continue;
                if (c.terrain.kind == TerrainKind::Obstacle) continue;
                if (c.terrain.kind == TerrainKind::Fence && !fence_open[c.terrain.fence])
                    continue;
                legal.push_back(Action::move(d));
            }
            out[p.agent] = legal[static_cast<std::size_t>(rng_.below(legal.size()))];
        }
        return out;
    }

private:
    Rng rng_;
};

// Deterministic mail order regardless of how the batch was assembled.
inline void normalize_messages(std::vector<Message>& msgs) {
    std::stable_sort(msgs.begin(), msgs.end(), [](const Message& a, const Message& b) {
        if (a.sender != b.sender) return a.sender < b.sender;
        return a.body.index() < b.body.index();
    });
}

// The full team. Sightings are shared within the step (everyone finishes the
// step with the same picture); requests and assignments land next step, so
// each agent decides on what was known when the mail was sent.
class HerderTeam : public TeamController {
public:
    explicit HerderTeam(Config cfg = {}) : cfg_(std::move(cfg)) {}

    void start(const StartInfo& info) override {
        agents_.clear();
        carry_.clear();
        leader_id_ = info.agents.empty() ? -1 : info.agents.front();
        int scout_id = info.agents.size() > 1 ? info.agents[1] : -1;
        for (int id : info.agents) {
            Role role = id == leader_id_ ? Role::Leader
                        : id == scout_id ? Role::Scout
                                         : Role::Herder;
            agents_.emplace(id,
                            AgentState(id, info.team, role, info.width, info.height, info.fov));
        }
    }

    std::map<int, Action> act(int, const std::vector<Percept>& percepts) override {
        std::vector<Message> live = std::move(carry_);
        carry_.clear();
        for (const Percept& p : percepts) {
            auto it = agents_.find(p.agent);
            if (it == agents_.end()) continue;
            std::vector<Fact> facts = integrate_percept(it->second.beliefs, p);
            if (!facts.empty()) live.push_back(Message{p.agent, BeliefShare{std::move(facts)}});
        }
        normalize_messages(live);
        AgentContext ctx{cfg_, leader_id_};
        std::map<int, Action> out;
        for (const Percept& p : percepts) {
            auto it = agents_.find(p.agent);
            if (it == agents_.end()) continue;
            ActResult r = agent_act(it->second, live, p, ctx);
            out[p.agent] = r.action;
            // Directives reach agents acting later in this same step through
            // `live` (the leader acts first, so the scout picks frontiers with
            // the round's assignments already in view) and everyone else next
            // step through carry_. Handlers are idempotent, so the agents that
            // see a directive twice converge on the same state.
            for (Message& m : r.outbox)
                if (!std::holds_alternative<BeliefShare>(m.body)) {
                    carry_.push_back(m);
                    live.push_back(std::move(m));
                }
        }
        return out;
    }

    const std::map<int, AgentState>& agent_states() const { return agents_; }
    int leader_id() const { return leader_id_; }

private:
    Config cfg_;
    std::map<int, AgentState> agents_;
    std::vector<Message> carry_;  // directives in flight to next step
    int leader_id_ = -1;
};

}  // namespace herdsim
