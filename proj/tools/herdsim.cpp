#include <array>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "herdsim/herdsim.hpp"

// Exit codes: 0 success, 1 configuration error (flags, map, team specs),
// 2 runtime error (I/O, malformed logs, lost connections), 3 verify mismatch.

namespace {

int fail(int code, const std::string& msg) {
    std::cerr << msg << '\n';
    return code;
}

bool apply_sets(herdsim::Config& cfg, const std::vector<std::string>& sets, std::string& err) {
    for (const std::string& s : sets) {
        std::size_t eq = s.find('=');
        if (eq == std::string::npos || !cfg.set(s.substr(0, eq), s.substr(eq + 1))) {
            err = "bad --set value: " + s;
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic cows-and-herders matches"};
    app.require_subcommand(1);

    CLI::App* run = app.add_subcommand("run", "run a match");
    std::string map_path, team1 = "builtin:herders", team2 = "builtin:idle", log_path;
    int steps = 1000;
    std::uint64_t seed = 1;
    std::vector<std::string> run_sets;
    run->add_option("--map", map_path, "map file")->required();
    run->add_option("--steps", steps, "step limit");
    run->add_option("--seed", seed, "world seed");
    run->add_option("--team1", team1, "builtin:idle|builtin:random|builtin:herders|net:<port>");
    run->add_option("--team2", team2, "same choices as --team1");
    run->add_option("--log", log_path, "write a replay log here");
    run->add_option("--set", run_sets, "config override KEY=VALUE (repeatable)");

    CLI::App* verify = app.add_subcommand("verify", "re-simulate a replay log and check it");
    std::string verify_log;
    verify->add_option("--log", verify_log, "replay log")->required();

    CLI::App* render = app.add_subcommand("render", "print the world at a step of a log");
    std::string render_log;
    int render_step = -1;
    render->add_option("--log", render_log, "replay log")->required();
    render->add_option("--step", render_step, "stop after this step (default: end)");

    CLI::App* client = app.add_subcommand("client", "play one side over the match protocol");
    std::string host = "127.0.0.1", token;
    int port = 0, client_team = 1;
    std::vector<std::string> client_sets;
    client->add_option("--host", host, "server host");
    client->add_option("--port", port, "server port")->required();
    client->add_option("--team", client_team, "team slot (1 or 2)");
    client->add_option("--token", token, "auth token");
    client->add_option("--set", client_sets, "config override KEY=VALUE (repeatable)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*run) {
        herdsim::Config cfg;
        std::string err;
        if (!apply_sets(cfg, run_sets, err)) return fail(1, err);
        herdsim::MatchConfig mc;
        mc.map_path = map_path;
        mc.steps = steps;
        mc.seed = seed;
        mc.team1 = team1;
        mc.team2 = team2;
        mc.cfg = cfg;
        try {
            std::array<std::unique_ptr<herdsim::TeamController>, 2> teams;
            const std::string specs[2] = {team1, team2};
            for (int t = 0; t < 2; ++t) {
                if (std::optional<int> p = herdsim::parse_net_spec(specs[t])) {
                    auto net = std::make_unique<herdsim::NetTeam>(*p, cfg);
                    if (net->bound_port() == 0)
                        return fail(2, "cannot listen for " + specs[t]);
                    std::printf("team%d listening on port %d\n", t + 1, net->bound_port());
                    std::fflush(stdout);
                    teams[t] = std::move(net);
                } else {
                    teams[t] = herdsim::make_controller(specs[t], seed, t + 1, cfg);
                    if (!teams[t]) return fail(1, "unknown team spec: " + specs[t]);
                }
            }
            herdsim::MatchResult res;
            if (!log_path.empty()) {
                std::ofstream log(log_path, std::ios::binary);
                if (!log) return fail(2, "cannot open " + log_path);
                res = run_match_with(mc, *teams[0], *teams[1], &log);
            } else {
                res = run_match_with(mc, *teams[0], *teams[1], nullptr);
            }
            std::printf("scores %d:%d steps %d%s\n", res.scores[0], res.scores[1],
                        res.steps_run,
                        res.faulted[0] || res.faulted[1] ? " (controller fault)" : "");
            return 0;
        } catch (const herdsim::MapError& e) {
            return fail(1, std::string("map error: ") + e.what());
        } catch (const std::invalid_argument& e) {
            return fail(1, e.what());
        } catch (const std::exception& e) {
            return fail(2, e.what());
        }
    }

    if (*verify) {
        std::ifstream in(verify_log, std::ios::binary);
        if (!in) return fail(2, "cannot open " + verify_log);
        herdsim::VerifyResult r = herdsim::replay_verify(in);
        switch (r.status) {
            case herdsim::VerifyResult::Status::Ok:
                std::printf("ok\n");
                return 0;
            case herdsim::VerifyResult::Status::Mismatch:
                std::printf("mismatch at step %d: %s\n", r.step, r.message.c_str());
                return 3;
            case herdsim::VerifyResult::Status::Malformed:
                return fail(2, "malformed log: " + r.message);
        }
        return 2;
    }

    if (*render) {
        std::ifstream in(render_log, std::ios::binary);
        if (!in) return fail(2, "cannot open " + render_log);
        std::optional<herdsim::WorldState> w = herdsim::replay_to(in, render_step);
        if (!w) return fail(2, "malformed log");
        std::printf("step %d scores %d:%d\n%s", w->step, w->scores[0], w->scores[1],
                    herdsim::render(*w).c_str());
        return 0;
    }

    if (*client) {
        herdsim::Config cfg;
        std::string err;
        if (!apply_sets(cfg, client_sets, err)) return fail(1, err);
        if (client_team != 1 && client_team != 2) return fail(1, "--team must be 1 or 2");
        herdsim::ClientResult r =
            herdsim::run_protocol_client(host, port, client_team, token, cfg);
        if (!r.completed) return fail(2, "connection ended before a result");
        std::printf("scores %d:%d\n", r.scores[0], r.scores[1]);
        return 0;
    }

    return 1;
}
