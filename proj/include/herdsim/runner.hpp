#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "herdsim/controllers.hpp"
#include "herdsim/world.hpp"

namespace herdsim {

struct MatchConfig {
    std::string map_path;
    std::string map_text;  // wins over map_path when nonempty
    int steps = 1000;
    std::uint64_t seed = 1;
    std::string team1 = "builtin:herders";
    std::string team2 = "builtin:idle";
    Config cfg;
    std::string log_path;  // empty = don't write a log
};

struct MatchResult {
    std::array<int, 2> scores{0, 0};
    int steps_run = 0;
    std::array<bool, 2> faulted{false, false};
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

namespace detail {

inline nlohmann::json config_json(const Config& cfg) {
    nlohmann::json j = nlohmann::json::object();
    for (const Config::Key& k : Config::int_keys()) j[k.name] = cfg.*(k.field);
    return j;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline nlohmann::json step_record(const WorldState& w,
                                  const std::map<int, Action>& actions) {
    nlohmann::json acts = nlohmann::json::object();
    for (const auto& [id, agent] : w.agents) {
        auto it = actions.find(id);
        acts[std::to_string(id)] = action_name(it == actions.end() ? Action::stay() : it->second);
    }
    nlohmann::json cows = nlohmann::json::array();
    for (const auto& [id, pos] : w.cows) cows.push_back({id, pos.x, pos.y});
    nlohmann::json fences = nlohmann::json::array();
    for (std::size_t i = 0; i < w.fences.size(); ++i)
        fences.push_back({static_cast<int>(i), w.fences[i].open ? 1 : 0});
    return nlohmann::json{{"step", w.step},
                          {"actions", std::move(acts)},
                          {"cows", std::move(cows)},
                          {"fences", std::move(fences)},
                          {"scores", {w.scores[0], w.scores[1]}},
                          {"hash", hash_hex(state_hash(w))}};
}

}  // namespace detail

// Drives one match with caller-supplied controllers. Percepts for both teams
// are taken from the same pre-step state; a controller that throws is out of
// the match and its team plays Stay from then on.
inline MatchResult run_match_with(const MatchConfig& mc, TeamController& t1,
                                  TeamController& t2, std::ostream* log = nullptr) {
    std::string map_text = !mc.map_text.empty() ? mc.map_text : read_file(mc.map_path);
    WorldState w = load_map(map_text, mc.seed);
    if (mc.cfg.r_fov > 0) w.fov = mc.cfg.r_fov;

    std::array<TeamController*, 2> teams{&t1, &t2};
    std::array<std::vector<int>, 2> ids;
    for (const auto& [id, agent] : w.agents) ids[agent.team - 1].push_back(id);
    MatchResult result;
    for (int t = 0; t < 2; ++t) {
        StartInfo info;
        info.team = t + 1;
        info.agents = ids[t];
        info.width = w.width;
        info.height = w.height;
        info.fov = w.fov;
        info.steps = mc.steps;
        try {
            teams[t]->start(info);
        } catch (...) {
            result.faulted[t] = true;
        }
    }

    if (log) {
        nlohmann::json header{{"magic", "herdsim-replay"},
                              {"version", 1},
                              {"map", map_text},
                              {"seed", mc.seed},
                              {"steps", mc.steps},
                              {"team1", mc.team1},
                              {"team2", mc.team2},
                              {"config", detail::config_json(mc.cfg)}};
        (*log) << header.dump() << '\n';
    }

    for (int step = 0; step < mc.steps; ++step) {
        if (w.initial_cows > 0 && w.cows.empty()) break;
        std::array<std::vector<Percept>, 2> percepts;
        for (int t = 0; t < 2; ++t)
            if (!result.faulted[t])
                for (int id : ids[t]) percepts[t].push_back(percept(w, id));
        std::map<int, Action> actions;
        for (int t = 0; t < 2; ++t) {
            if (result.faulted[t]) continue;
            try {
                for (const auto& [id, a] : teams[t]->act(w.step, percepts[t]))
                    actions[id] = a;
            } catch (...) {
                result.faulted[t] = true;
                for (int id : ids[t]) actions.erase(id);
            }
        }
        world_step(w, actions, mc.cfg);
        if (log) (*log) << detail::step_record(w, actions).dump() << '\n';
        ++result.steps_run;
    }

    result.scores = w.scores;
    for (int t = 0; t < 2; ++t) {
        if (result.faulted[t]) continue;
        try {
            teams[t]->finish(w.scores);
        } catch (...) {
            result.faulted[t] = true;
        }
    }
    return result;
}

// "builtin:idle", "builtin:random" or "builtin:herders"; null on anything else.
inline std::unique_ptr<TeamController> make_controller(const std::string& spec,
                                                       std::uint64_t match_seed, TeamId team,
                                                       const Config& cfg) {
    if (spec == "builtin:idle") return std::make_unique<IdleTeam>();
    if (spec == "builtin:random")
        return std::make_unique<RandomTeam>(match_seed * 4 + static_cast<std::uint64_t>(team));
    if (spec == "builtin:herders") return std::make_unique<HerderTeam>(cfg);
    return nullptr;
}

inline MatchResult run_match(const MatchConfig& mc) {
    std::unique_ptr<TeamController> t1 = make_controller(mc.team1, mc.seed, 1, mc.cfg);
    std::unique_ptr<TeamController> t2 = make_controller(mc.team2, mc.seed, 2, mc.cfg);
    if (!t1) throw std::invalid_argument("unknown team spec: " + mc.team1);
    if (!t2) throw std::invalid_argument("unknown team spec: " + mc.team2);
    if (!mc.log_path.empty()) {
        std::ofstream log(mc.log_path, std::ios::binary);
        if (!log) throw std::runtime_error("cannot open " + mc.log_path);
        return run_match_with(mc, *t1, *t2, &log);
    }
    return run_match_with(mc, *t1, *t2, nullptr);
}

// ---- Replay logs ----

struct ReplayHeader {
    std::string map;
    std::uint64_t seed = 0;
    int steps = 0;
    std::string team1, team2;
    Config cfg;
};

namespace detail {

inline std::optional<ReplayHeader> parse_header(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (j.value("magic", "") != "herdsim-replay" || j.value("version", 0) != 1)
        return std::nullopt;
    if (!j.contains("map") || !j["map"].is_string()) return std::nullopt;
    if (!j.contains("seed") || !j["seed"].is_number()) return std::nullopt;
    ReplayHeader h;
    h.map = j["map"].get<std::string>();
    h.seed = j["seed"].get<std::uint64_t>();
    h.steps = j.value("steps", 0);
    h.team1 = j.value("team1", "");
    h.team2 = j.value("team2", "");
    if (j.contains("config") && j["config"].is_object())
        for (const auto& [key, value] : j["config"].items()) {
            if (!value.is_number_integer()) return std::nullopt;
            if (!h.cfg.set(key, value.dump())) return std::nullopt;
        }
    return h;
}

inline std::optional<std::map<int, Action>> parse_actions(const nlohmann::json& rec) {
    if (!rec.contains("actions") || !rec["actions"].is_object()) return std::nullopt;
    std::map<int, Action> actions;
    for (const auto& [key, value] : rec["actions"].items()) {
        if (!value.is_string()) return std::nullopt;
        std::optional<Action> a = parse_action(value.get<std::string>());
        char* end = nullptr;
        long id = std::strtol(key.c_str(), &end, 10);
        if (!a || end == key.c_str() || *end != '\0') return std::nullopt;
        actions[static_cast<int>(id)] = *a;
    }
    return actions;
}

}  // namespace detail

struct VerifyResult {
    enum class Status { Ok, Mismatch, Malformed };
    Status status = Status::Ok;
    int step = -1;  // first bad step, where applicable
    std::string message;
};

// Re-simulates the log from its recorded map, seed, config and actions, and
// checks every step record (cows, fences, scores, step counter, state hash)
// against what the simulation actually produces.
inline VerifyResult replay_verify(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) return {VerifyResult::Status::Malformed, -1, "empty log"};
    std::optional<ReplayHeader> header = detail::parse_header(line);
    if (!header) return {VerifyResult::Status::Malformed, -1, "bad header"};

    WorldState w;
    try {
        w = load_map(header->map, header->seed);
    } catch (const std::exception& e) {
        return {VerifyResult::Status::Malformed, -1, e.what()};
    }
    if (header->cfg.r_fov > 0) w.fov = header->cfg.r_fov;

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            return {VerifyResult::Status::Malformed, w.step, "bad step record"};
        std::optional<std::map<int, Action>> actions = detail::parse_actions(rec);
        if (!actions) return {VerifyResult::Status::Malformed, w.step, "bad actions"};
        world_step(w, *actions, header->cfg);
        nlohmann::json expect = detail::step_record(w, *actions);
        for (const char* field : {"step", "cows", "fences", "scores", "hash"}) {
            if (!rec.contains(field))
                return {VerifyResult::Status::Malformed, w.step,
                        std::string("missing ") + field};
            if (rec[field] != expect[field])
                return {VerifyResult::Status::Mismatch, w.step, field};
        }
    }
    return {VerifyResult::Status::Ok, -1, ""};
}

// Re-simulates a log up to and including the given step (-1 = whole log).
// nullopt on malformed input.
inline std::optional<WorldState> replay_to(std::istream& in, int stop_step = -1) {
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    std::optional<ReplayHeader> header = detail::parse_header(line);
    if (!header) return std::nullopt;
    WorldState w;
    try {
        w = load_map(header->map, header->seed);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (header->cfg.r_fov > 0) w.fov = header->cfg.r_fov;
    while ((stop_step < 0 || w.step < stop_step) && std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) return std::nullopt;
        std::optional<std::map<int, Action>> actions = detail::parse_actions(rec);
        if (!actions) return std::nullopt;
        world_step(w, *actions, header->cfg);
    }
    return w;
}

// ---- ASCII rendering ----

inline std::string render(const WorldState& w) {
    std::map<Position, char> overlay;
    for (const auto& [id, pos] : w.cows) overlay[pos] = 'c';
    for (const auto& [id, agent] : w.agents) overlay[agent.pos] = agent.team == 1 ? 'A' : 'B';
    std::string out;
    for (int y = 0; y < w.height; ++y) {
        for (int x = 0; x < w.width; ++x) {
            Position p{x, y};
            auto it = overlay.find(p);
            if (it != overlay.end()) {
                out += it->second;
                continue;
            }
            const Terrain& t = w.at(p);
            switch (t.kind) {
                case TerrainKind::Empty: out += '.'; break;
                case TerrainKind::Obstacle: out += '#'; break;
                case TerrainKind::Corral: out += t.team == 1 ? '1' : '2'; break;
                case TerrainKind::Fence: out += w.fences[t.fence].open ? 'f' : 'F'; break;
                case TerrainKind::Switch: out += 'S'; break;
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace herdsim
