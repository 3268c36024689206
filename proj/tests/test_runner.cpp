#include "support.hpp"

#include <sstream>

using namespace herdsim;

namespace {

const char* corridor_text =
    "7 7 2\n"
    "#######\n"
    "#.....#\n"
    "#######\n"
    "1c.A...\n"
    "#######\n"
    "#.....#\n"
    "#######\n";

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::string join_lines(const std::vector<std::string>& ls) {
    std::string out;
    for (const std::string& l : ls) {
        out += l;
        out += '\n';
    }
    return out;
}

VerifyResult verify_str(const std::string& log) {
    std::istringstream in(log);
    return replay_verify(in);
}

std::string run_logged(const MatchConfig& mc, MatchResult* result = nullptr) {
    std::unique_ptr<TeamController> t1 = make_controller(mc.team1, mc.seed, 1, mc.cfg);
    std::unique_ptr<TeamController> t2 = make_controller(mc.team2, mc.seed, 2, mc.cfg);
    REQUIRE(t1);
    REQUIRE(t2);
    std::ostringstream log;
    MatchResult r = run_match_with(mc, *t1, *t2, &log);
    if (result) *result = r;
    return log.str();
}

class ThrowingTeam : public TeamController {
public:
    void start(const StartInfo&) override {}
    std::map<int, Action> act(int, const std::vector<Percept>&) override {
        throw std::runtime_error("boom");
    }
};

}  // namespace

TEST_CASE("identical configurations produce identical logs") {
    MatchConfig mc;
    mc.map_text = test::map_text("pasture_small.map");
    mc.steps = 80;
    mc.seed = 42;
    mc.team1 = "builtin:herders";
    mc.team2 = "builtin:random";

    MatchResult r1, r2;
    std::string log1 = run_logged(mc, &r1);
    std::string log2 = run_logged(mc, &r2);
    CHECK(log1 == log2);
    CHECK_FALSE(log1.empty());
    CHECK(r1.scores == r2.scores);
    CHECK(r1.steps_run == r2.steps_run);
    CHECK_FALSE(r1.faulted[0]);
    CHECK_FALSE(r1.faulted[1]);

    VerifyResult vr = verify_str(log1);
    CAPTURE(vr.message, vr.step);
    CHECK(vr.status == VerifyResult::Status::Ok);
}

TEST_CASE("the log header records the whole setup") {
    MatchConfig mc;
    mc.map_text = test::map_text("pasture_small.map");
    mc.steps = 12;
    mc.seed = 42;
    mc.team1 = "builtin:herders";
    mc.team2 = "builtin:random";
    std::string log = run_logged(mc);

    std::vector<std::string> lines = lines_of(log);
    REQUIRE(lines.size() == 13u);  // header + one record per step
    nlohmann::json h = nlohmann::json::parse(lines[0]);
    CHECK(h["magic"] == "herdsim-replay");
    CHECK(h["version"] == 1);
    CHECK(h["map"] == mc.map_text);
    CHECK(h["seed"] == 42);
    CHECK(h["steps"] == 12);
    CHECK(h["team1"] == "builtin:herders");
    CHECK(h["team2"] == "builtin:random");
    REQUIRE(h["config"].is_object());
    CHECK(h["config"].size() == Config::int_keys().size());
    CHECK(h["config"]["R_cow"] == 5);
    CHECK(h["config"]["D_act"] == 200);

    nlohmann::json rec = nlohmann::json::parse(lines[1]);
    CHECK(rec["step"] == 1);  // records snapshot the post-step state
    CHECK(rec["cows"].size() == 6u);
    CHECK(rec["actions"].size() == 6u);
    CHECK(rec["hash"].get<std::string>().size() == 16u);
}

TEST_CASE("replay verification pinpoints tampering") {
    MatchConfig mc;
    mc.map_text = test::map_text("pasture_small.map");
    mc.steps = 40;
    mc.seed = 7;
    mc.team1 = "builtin:herders";
    mc.team2 = "builtin:random";
    std::string log = run_logged(mc);
    REQUIRE(verify_str(log).status == VerifyResult::Status::Ok);
    std::vector<std::string> lines = lines_of(log);
    REQUIRE(lines.size() == 41u);

    SECTION("a nudged cow") {
        nlohmann::json rec = nlohmann::json::parse(lines[4]);
        REQUIRE(!rec["cows"].empty());
        rec["cows"][0][1] = rec["cows"][0][1].get<int>() + 1;
        lines[4] = rec.dump();
        VerifyResult vr = verify_str(join_lines(lines));
        CHECK(vr.status == VerifyResult::Status::Mismatch);
        CHECK(vr.step == 4);
        CHECK(vr.message == "cows");
    }
    SECTION("a flipped hash digit") {
        nlohmann::json rec = nlohmann::json::parse(lines[9]);
        std::string h = rec["hash"].get<std::string>();
        h[0] = h[0] == '0' ? '1' : '0';
        rec["hash"] = h;
        lines[9] = rec.dump();
        VerifyResult vr = verify_str(join_lines(lines));
        CHECK(vr.status == VerifyResult::Status::Mismatch);
        CHECK(vr.message == "hash");
    }
    SECTION("an inflated score") {
        nlohmann::json rec = nlohmann::json::parse(lines[12]);
        rec["scores"][0] = rec["scores"][0].get<int>() + 1;
        lines[12] = rec.dump();
        VerifyResult vr = verify_str(join_lines(lines));
        CHECK(vr.status == VerifyResult::Status::Mismatch);
        CHECK(vr.message == "scores");
    }
    SECTION("a dropped field") {
        nlohmann::json rec = nlohmann::json::parse(lines[6]);
        rec.erase("hash");
        lines[6] = rec.dump();
        VerifyResult vr = verify_str(join_lines(lines));
        CHECK(vr.status == VerifyResult::Status::Malformed);
        CHECK(vr.message == "missing hash");
    }
    SECTION("actions that are not an object") {
        nlohmann::json rec = nlohmann::json::parse(lines[6]);
        rec["actions"] = 5;
        lines[6] = rec.dump();
        VerifyResult vr = verify_str(join_lines(lines));
        CHECK(vr.status == VerifyResult::Status::Malformed);
        CHECK(vr.message == "bad actions");
    }
    SECTION("a garbage header") {
        lines[0] = "not a header";
        VerifyResult vr = verify_str(join_lines(lines));
        CHECK(vr.status == VerifyResult::Status::Malformed);
        CHECK(vr.message == "bad header");
    }
    SECTION("a truncated record") {
        std::string cut = log.substr(0, log.size() - lines.back().size() / 2 - 1);
        VerifyResult vr = verify_str(cut);
        CHECK(vr.status == VerifyResult::Status::Malformed);
        CHECK(vr.message == "bad step record");
    }
    SECTION("an empty log") {
        VerifyResult vr = verify_str("");
        CHECK(vr.status == VerifyResult::Status::Malformed);
        CHECK(vr.message == "empty log");
    }
}

TEST_CASE("a rewritten action breaks the hash chain") {
    MatchConfig mc;
    mc.map_text =
        "7 7 3\n"
        "A.....B\n"
        ".......\n"
        ".......\n"
        ".......\n"
        ".......\n"
        ".......\n"
        ".......\n";
    mc.steps = 30;
    mc.seed = 5;
    mc.team1 = "builtin:random";
    mc.team2 = "builtin:idle";
    std::string log = run_logged(mc);
    std::vector<std::string> lines = lines_of(log);
    REQUIRE(lines.size() == 31u);  // no cows, so no early end

    size_t flipped = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        nlohmann::json rec = nlohmann::json::parse(lines[i]);
        if (rec["actions"]["0"] != "stay") {
            rec["actions"]["0"] = "stay";
            lines[i] = rec.dump();
            flipped = i;
            break;
        }
    }
    REQUIRE(flipped > 0);
    VerifyResult vr = verify_str(join_lines(lines));
    CHECK(vr.status == VerifyResult::Status::Mismatch);
    CHECK(vr.step == static_cast<int>(flipped));
    CHECK(vr.message == "hash");
}

TEST_CASE("replay_to rebuilds any prefix of a match") {
    MatchConfig mc;
    mc.map_text = test::map_text("pasture_small.map");
    mc.steps = 40;
    mc.seed = 11;
    mc.team1 = "builtin:herders";
    mc.team2 = "builtin:random";
    MatchResult result;
    std::string log = run_logged(mc, &result);

    std::istringstream full(log);
    std::optional<WorldState> w = replay_to(full);
    REQUIRE(w);
    CHECK(w->step == result.steps_run);
    CHECK(w->scores == result.scores);

    std::istringstream part(log);
    std::optional<WorldState> mid = replay_to(part, 25);
    REQUIRE(mid);
    CHECK(mid->step == 25);

    std::istringstream broken("nonsense\n");
    CHECK_FALSE(replay_to(broken).has_value());
}

TEST_CASE("render draws terrain under entities") {
    WorldState w = load_map(corridor_text, 1);
    CHECK(render(w) ==
          "#######\n"
          "#.....#\n"
          "#######\n"
          "1c.A...\n"
          "#######\n"
          "#.....#\n"
          "#######\n");

    WorldState f = load_map("5 1 1\nA.FSS\n", 1);
    CHECK(render(f) == "A.FSS\n");
    f.fences[0].open = true;
    CHECK(render(f) == "A.fSS\n");
}

TEST_CASE("team specs resolve to controllers") {
    Config cfg;
    CHECK(make_controller("builtin:idle", 1, 1, cfg) != nullptr);
    CHECK(make_controller("builtin:random", 1, 2, cfg) != nullptr);
    CHECK(make_controller("builtin:herders", 1, 1, cfg) != nullptr);
    CHECK(make_controller("net:7700", 1, 1, cfg) == nullptr);
    CHECK(make_controller("x", 1, 1, cfg) == nullptr);

    MatchConfig mc;
    mc.map_text = corridor_text;
    mc.team1 = "nope";
    CHECK_THROWS_AS(run_match(mc), std::invalid_argument);
}

TEST_CASE("a cow walking home ends the match") {
    MatchConfig mc;
    mc.map_text = corridor_text;
    mc.steps = 50;
    mc.team1 = "builtin:idle";
    mc.team2 = "builtin:idle";
    MatchResult r = run_match(mc);
    CHECK(r.steps_run == 1);
    CHECK(r.scores == std::array<int, 2>{1, 0});
}

TEST_CASE("a crashing controller forfeits control, not the match") {
    MatchConfig mc;
    mc.map_text = test::map_text("pasture_small.map");
    mc.steps = 20;
    mc.seed = 3;
    mc.team1 = "builtin:throws";  // label only; controllers passed directly
    mc.team2 = "builtin:idle";

    ThrowingTeam t1;
    IdleTeam t2;
    std::ostringstream log;
    MatchResult r = run_match_with(mc, t1, t2, &log);
    CHECK(r.faulted[0]);
    CHECK_FALSE(r.faulted[1]);
    CHECK(r.steps_run == 20);

    VerifyResult vr = verify_str(log.str());
    CHECK(vr.status == VerifyResult::Status::Ok);
    std::vector<std::string> lines = lines_of(log.str());
    REQUIRE(lines.size() == 21u);
    nlohmann::json rec = nlohmann::json::parse(lines[5]);
    for (const auto& [id, a] : rec["actions"].items()) CHECK(a == "stay");
}

TEST_CASE("random teams are seeded, legal and repeatable") {
    std::string map =
        "7 7 3\n"
        "A..#...\n"
        "..##...\n"
        "...F...\n"
        "...S...\n"
        ".......\n"
        "....#..\n"
        "......S\n";
    Config cfg;
    WorldState w1 = load_map(map, 2);
    WorldState w2 = load_map(map, 2);
    RandomTeam t1(123), t2(123);
    StartInfo info;
    info.team = 1;
    info.agents = {0};
    info.width = 7;
    info.height = 7;
    info.fov = w1.fov;
    info.steps = 40;
    t1.start(info);
    t2.start(info);

    for (int step = 0; step < 40; ++step) {
        Percept p1 = percept(w1, 0);
        std::map<int, Action> a1 = t1.act(w1.step, {p1});
        std::map<int, Action> a2 = t2.act(w2.step, {percept(w2, 0)});
        REQUIRE(a1 == a2);

        REQUIRE(a1.count(0) == 1);
        const Action& act = a1.at(0);
        if (act.is_move) {
            Position to = moved(p1.pos, act.dir);
            CAPTURE(step, p1.pos, to);
            REQUIRE(w1.in_bounds(to));
            const Terrain& t = w1.at(to);
            CHECK(t.kind != TerrainKind::Obstacle);
            if (t.kind == TerrainKind::Fence) CHECK(w1.fences[t.fence].open);
            for (const auto& [id, pos] : w1.cows) CHECK(pos != to);
            for (const auto& [id, ag] : w1.agents)
                if (id != 0) CHECK(ag.pos != to);
        }
        world_step(w1, a1, cfg);
        world_step(w2, a2, cfg);
    }
}

TEST_CASE("read_file reports missing paths") {
    CHECK_THROWS_AS(read_file("/no/such/file"), std::runtime_error);
}
