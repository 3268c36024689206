#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "herdsim/controllers.hpp"

// One JSON object per line over TCP. The server runs the match and speaks
// for one team slot:
//   client -> {"type":"hello","team":T,"token":"..."}
//   server -> {"type":"welcome","team":T,"agents":[..],"width":W,"height":H,
//              "r_fov":R,"steps":N}
//   server -> {"type":"percept","step":S,"deadline_ms":D,"agents":[
//                {"agent":id,"pos":[x,y],
//                 "cells":[[x,y,kind,aux,occ,occId],..],
//                 "fences":[[fid,0|1],..]},..]}
//   client -> {"type":"act","step":S,"actions":{"id":"n",..}}
//   server -> {"type":"result","scores":[a,b]}
//   either -> {"type":"error","code":"..","text":".."}
// Cell kinds: 0 empty, 1 obstacle, 2 corral (aux = team), 3 fence
// (aux = fence id), 4 switch (aux = fence id). Occupants: 0 none, 1 cow,
// 2 ally, 3 opponent; occId is the entity id, -1 when none. A late, illegal
// or missing act plays out as Stay for the whole team.

namespace herdsim {

namespace detail {

inline bool write_line(int fd, const std::string& s) {
    std::string out = s + '\n';
    std::size_t sent = 0;
    while (sent < out.size()) {
        ssize_t n = ::send(fd, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
        if (n <= 0) return false;
        sent += static_cast<std::size_t>(n);
    }
    return true;
}

inline nlohmann::json percept_json(int step, int deadline_ms,
                                   const std::vector<Percept>& percepts) {
    nlohmann::json agents = nlohmann::json::array();
    for (const Percept& p : percepts) {
        nlohmann::json cells = nlohmann::json::array();
        for (const VisibleCell& c : p.visible) {
            int kind = 0, aux = -1;
            switch (c.terrain.kind) {
                case TerrainKind::Empty: kind = 0; break;
                case TerrainKind::Obstacle: kind = 1; break;
                case TerrainKind::Corral: kind = 2; aux = c.terrain.team; break;
                case TerrainKind::Fence: kind = 3; aux = c.terrain.fence; break;
                case TerrainKind::Switch: kind = 4; aux = c.terrain.fence; break;
            }
            cells.push_back({c.pos.x, c.pos.y, kind, aux, static_cast<int>(c.occ), c.occ_id});
        }
        nlohmann::json fences = nlohmann::json::array();
        for (const FenceObs& f : p.fences) fences.push_back({f.fence, f.open ? 1 : 0});
        agents.push_back({{"agent", p.agent},
                          {"pos", {p.pos.x, p.pos.y}},
                          {"cells", std::move(cells)},
                          {"fences", std::move(fences)}});
    }
    return nlohmann::json{{"type", "percept"},
                          {"step", step},
                          {"deadline_ms", deadline_ms},
                          {"agents", std::move(agents)}};
}

inline std::vector<Percept> percepts_from_json(const nlohmann::json& msg) {
    std::vector<Percept> out;
    int step = msg.value("step", 0);
    for (const nlohmann::json& aj : msg.value("agents", nlohmann::json::array())) {
        Percept p;
        p.agent = aj.value("agent", -1);
        p.step = step;
        if (aj.contains("pos") && aj["pos"].is_array() && aj["pos"].size() == 2)
            p.pos = {aj["pos"][0].get<int>(), aj["pos"][1].get<int>()};
        for (const nlohmann::json& cj : aj.value("cells", nlohmann::json::array())) {
            if (!cj.is_array() || cj.size() != 6) continue;
            VisibleCell c;
            c.pos = {cj[0].get<int>(), cj[1].get<int>()};
            int kind = cj[2].get<int>(), aux = cj[3].get<int>();
            switch (kind) {
                case 1: c.terrain.kind = TerrainKind::Obstacle; break;
                case 2:
                    c.terrain.kind = TerrainKind::Corral;
                    c.terrain.team = static_cast<std::int16_t>(aux);
                    break;
                case 3:
                    c.terrain.kind = TerrainKind::Fence;
                    c.terrain.fence = static_cast<std::int16_t>(aux);
                    break;
                case 4:
                    c.terrain.kind = TerrainKind::Switch;
                    c.terrain.fence = static_cast<std::int16_t>(aux);
                    break;
                default: c.terrain.kind = TerrainKind::Empty; break;
            }
            c.occ = static_cast<OccupantKind>(cj[4].get<int>());
            c.occ_id = cj[5].get<int>();
            p.visible.push_back(c);
        }
        std::sort(p.visible.begin(), p.visible.end(),
                  [](const VisibleCell& a, const VisibleCell& b) { return a.pos < b.pos; });
        for (const nlohmann::json& fj : aj.value("fences", nlohmann::json::array()))
            if (fj.is_array() && fj.size() == 2)
                p.fences.push_back({fj[0].get<int>(), fj[1].get<int>() != 0});
        std::sort(p.fences.begin(), p.fences.end(),
                  [](const FenceObs& a, const FenceObs& b) { return a.fence < b.fence; });
        out.push_back(std::move(p));
    }
    std::sort(out.begin(), out.end(),
              [](const Percept& a, const Percept& b) { return a.agent < b.agent; });
    return out;
}

}  // namespace detail

// Plays one team slot by relaying percepts to a TCP client and collecting its
// acts. Listens from construction (port 0 picks an ephemeral one); the client
// is accepted in start(). Anything that goes wrong (no client, bad token,
// deadline misses, disconnects) degrades to Stay, never stops the match.
class NetTeam : public TeamController {
public:
    explicit NetTeam(int port, Config cfg = {}) : cfg_(std::move(cfg)) {
        listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (listen_fd_ < 0) return;
        int one = 1;
        ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 ||
            ::listen(listen_fd_, 1) < 0) {
            ::close(listen_fd_);
            listen_fd_ = -1;
            return;
        }
        sockaddr_in got{};
        socklen_t len = sizeof got;
        if (::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&got), &len) == 0)
            bound_port_ = ntohs(got.sin_port);
    }

    NetTeam(const NetTeam&) = delete;
    NetTeam& operator=(const NetTeam&) = delete;

    ~NetTeam() override {
        drop();
        if (reader_.joinable()) reader_.join();
        if (fd_ >= 0) ::close(fd_);
        if (listen_fd_ >= 0) ::close(listen_fd_);
    }

    int bound_port() const { return bound_port_; }
    bool connected() const { return connected_; }
    void set_accept_timeout(int ms) { accept_timeout_ms_ = ms; }

    void start(const StartInfo& info) override {
        info_ = info;
        if (listen_fd_ < 0) return;
        pollfd pfd{listen_fd_, POLLIN, 0};
        if (::poll(&pfd, 1, accept_timeout_ms_) <= 0) return;
        fd_ = ::accept(listen_fd_, nullptr, nullptr);
        if (fd_ < 0) return;
        connected_ = true;
        reader_ = std::thread([this] { read_loop(); });
        auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(accept_timeout_ms_);
        while (connected_) {
            std::optional<nlohmann::json> msg = next_message(deadline);
            if (!msg) {
                drop();
                return;
            }
            if (msg->value("type", "") != "hello") continue;
            if (msg->value("team", 0) != info.team) {
                send_error("team", "wrong team slot");
                drop();
                return;
            }
            if (!cfg_.net_token.empty() && msg->value("token", "") != cfg_.net_token) {
                send_error("auth", "bad token");
                drop();
                return;
            }
            nlohmann::json welcome{{"type", "welcome"},     {"team", info.team},
                                   {"agents", info.agents}, {"width", info.width},
                                   {"height", info.height}, {"r_fov", info.fov},
                                   {"steps", info.steps}};
            if (!detail::write_line(fd_, welcome.dump())) drop();
            return;
        }
    }

    std::map<int, Action> act(int step, const std::vector<Percept>& percepts) override {
        std::map<int, Action> out;
        for (int id : info_.agents) out[id] = Action::stay();
        if (!connected_) return out;
        nlohmann::json pj = detail::percept_json(step, cfg_.act_deadline_ms, percepts);
        if (!detail::write_line(fd_, pj.dump())) {
            drop();
            return out;
        }
        auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::milliseconds(cfg_.act_deadline_ms);
        while (connected_) {
            std::optional<nlohmann::json> msg = next_message(deadline);
            if (!msg) break;  // deadline passed or connection went away
            std::string type = msg->value("type", "");
            if (type == "hello") {
                send_error("proto", "duplicate hello");
                continue;
            }
            if (type != "act") continue;
            if (msg->value("step", -1) != step) {
                send_error("stale-step", "act for a different step");
                continue;
            }
            if (msg->contains("actions") && (*msg)["actions"].is_object())
                for (const auto& [key, value] : (*msg)["actions"].items()) {
                    if (!value.is_string()) continue;
                    std::optional<Action> a = parse_action(value.get<std::string>());
                    if (!a) continue;
                    char* end = nullptr;
                    long id = std::strtol(key.c_str(), &end, 10);
                    if (end == key.c_str() || *end != '\0') continue;
                    auto it = out.find(static_cast<int>(id));
                    if (it != out.end()) it->second = *a;
                }
            return out;
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            if (closed_) connected_ = false;
        }
        return out;
    }

    void finish(const std::array<int, 2>& scores) override {
        if (!connected_) return;
        nlohmann::json j{{"type", "result"}, {"scores", {scores[0], scores[1]}}};
        detail::write_line(fd_, j.dump());
        drop();
    }

private:
    void read_loop() {
        std::string buf;
        char chunk[4096];
        for (;;) {
            ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n <= 0) break;
            buf.append(chunk, static_cast<std::size_t>(n));
            std::size_t pos;
            while ((pos = buf.find('\n')) != std::string::npos) {
                std::string line = buf.substr(0, pos);
                buf.erase(0, pos + 1);
                if (line.empty()) continue;
                nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
                if (j.is_discarded() || !j.is_object()) continue;
                {
                    std::lock_guard<std::mutex> lk(mu_);
                    queue_.push_back(std::move(j));
                }
                cv_.notify_all();
            }
        }
        {
            std::lock_guard<std::mutex> lk(mu_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    std::optional<nlohmann::json> next_message(std::chrono::steady_clock::time_point deadline) {
        std::unique_lock<std::mutex> lk(mu_);
        cv_.wait_until(lk, deadline, [this] { return !queue_.empty() || closed_; });
        if (!queue_.empty()) {
            nlohmann::json j = std::move(queue_.front());
            queue_.pop_front();
            return j;
        }
        return std::nullopt;
    }

    void send_error(const std::string& code, const std::string& text) {
        nlohmann::json j{{"type", "error"}, {"code", code}, {"text", text}};
        detail::write_line(fd_, j.dump());
    }

    void drop() {
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
        connected_ = false;
    }

    Config cfg_;
    StartInfo info_;
    int listen_fd_ = -1;
    int fd_ = -1;
    int bound_port_ = 0;
    int accept_timeout_ms_ = 10000;
    bool connected_ = false;
    std::thread reader_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<nlohmann::json> queue_;
    bool closed_ = false;
};

struct ClientResult {
    std::array<int, 2> scores{0, 0};
    bool completed = false;  // saw the result message
};

namespace detail {

inline int connect_with_retry(const std::string& host, int port, int attempts = 40,
                              int delay_ms = 50) {
    for (int i = 0; i < attempts; ++i) {
        int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd < 0) return -1;
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<std::uint16_t>(port));
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd);
            return -1;
        }
        if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0) return fd;
        ::close(fd);
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    }
    return -1;
}

struct LineStream {
    int fd;
    std::string buf;

    std::optional<std::string> read_line() {
        for (;;) {
            std::size_t pos = buf.find('\n');
            if (pos != std::string::npos) {
                std::string line = buf.substr(0, pos);
                buf.erase(0, pos + 1);
                return line;
            }
            char chunk[4096];
            ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n <= 0) return std::nullopt;
            buf.append(chunk, static_cast<std::size_t>(n));
        }
    }
};

}  // namespace detail

// Connects a full herder team to a match server and plays it to the end.
inline ClientResult run_protocol_client(const std::string& host, int port, TeamId team,
                                        const std::string& token, const Config& cfg) {
    ClientResult out;
    int fd = detail::connect_with_retry(host, port);
    if (fd < 0) return out;
    detail::LineStream ls{fd, {}};
    nlohmann::json hello{{"type", "hello"}, {"team", team}, {"token", token}};
    if (!detail::write_line(fd, hello.dump())) {
        ::close(fd);
        return out;
    }
    HerderTeam controller(cfg);
    bool started = false;
    while (std::optional<std::string> line = ls.read_line()) {
        nlohmann::json msg = nlohmann::json::parse(*line, nullptr, false);
        if (msg.is_discarded() || !msg.is_object()) continue;
        std::string type = msg.value("type", "");
        if (type == "welcome") {
            StartInfo info;
            info.team = msg.value("team", team);
            for (const nlohmann::json& a : msg.value("agents", nlohmann::json::array()))
                info.agents.push_back(a.get<int>());
            info.width = msg.value("width", 0);
            info.height = msg.value("height", 0);
            info.fov = msg.value("r_fov", 0);
            info.steps = msg.value("steps", 0);
            controller.start(info);
            started = true;
        } else if (type == "percept" && started) {
            int step = msg.value("step", 0);
            std::vector<Percept> percepts = detail::percepts_from_json(msg);
            nlohmann::json actions = nlohmann::json::object();
            for (const auto& [id, a] : controller.act(step, percepts))
                actions[std::to_string(id)] = action_name(a);
            nlohmann::json act{{"type", "act"}, {"step", step}, {"actions", std::move(actions)}};
            if (!detail::write_line(fd, act.dump())) break;
        } else if (type == "result") {
            if (msg.contains("scores") && msg["scores"].is_array() &&
                msg["scores"].size() == 2) {
                out.scores = {msg["scores"][0].get<int>(), msg["scores"][1].get<int>()};
                out.completed = true;
                controller.finish(out.scores);
            }
            break;
        }
        // errors are informational; keep playing
    }
    ::close(fd);
    return out;
}

// "net:<port>" -> port; anything else -> nullopt.
inline std::optional<int> parse_net_spec(const std::string& spec) {
    if (spec.rfind("net:", 0) != 0) return std::nullopt;
    const std::string num = spec.substr(4);
    char* end = nullptr;
    long port = std::strtol(num.c_str(), &end, 10);
    if (num.empty() || end == num.c_str() || *end != '\0' || port < 0 || port > 65535)
        return std::nullopt;
    return static_cast<int>(port);
}

}  // namespace herdsim
