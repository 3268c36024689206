#pragma once

#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

namespace herdsim {

// Every tunable in one place. r_fov = -1 means "use the map header value".
struct Config {
    int r_fov = -1;

    // Cow reaction model.
    int r_cow = 5;   // sense radius
    int w_flee = 3;  // per-agent repulsion weight
    int w_herd = 1;  // per-fellow-cow attraction weight
    int w_wall = 1;  // per adjacent obstacle / closed segment

    // Path cost shaping.
    int w_cow = 8;      // believed cow on the cell
    int w_adj = 4;      // per believed cow adjacent to the cell
    int w_unknown = 2;  // base cost of an unknown cell
    int w_fence = 12;   // surcharge for a believed-closed segment on the open-variant grid
    int w_ally = 10;    // surcharge for a cell under a believed agent, applied at plan time

    // Clustering and delegation.
    int link_dist = 2;    // cluster link distance L
    int max_cluster = 8;  // split clusters above this size
    int t_stale = 20;     // target staleness bound
    int d_gap = 3;        // formation standoff gap
    int k_form = 3;       // formation slot count
    int p_opp = 10;       // per-opponent cluster penalty
    int r_opp = 10;       // opponent penalty radius
    int s_near = 3;       // cow-near-fence trigger distance
    int c_move = 5;       // formation drop threshold: cluster centroid drift

    int act_deadline_ms = 200;
    std::string net_token;

    struct Key {
        const char* name;
        int Config::* field;
    };

    static const std::vector<Key>& int_keys() {
        static const std::vector<Key> keys{
            {"R_fov", &Config::r_fov},
            {"R_cow", &Config::r_cow},
            {"W_flee", &Config::w_flee},
            {"W_herd", &Config::w_herd},
            {"W_wall", &Config::w_wall},
            {"W_cow", &Config::w_cow},
            {"W_adj", &Config::w_adj},
            {"W_unknown", &Config::w_unknown},
            {"W_fence", &Config::w_fence},
            {"W_ally", &Config::w_ally},
            {"L", &Config::link_dist},
            {"max_size", &Config::max_cluster},
            {"T_stale", &Config::t_stale},
            {"D_gap", &Config::d_gap},
            {"K_form", &Config::k_form},
            {"P_opp", &Config::p_opp},
            {"R_opp", &Config::r_opp},
            {"S_near", &Config::s_near},
            {"C_move", &Config::c_move},
            {"D_act", &Config::act_deadline_ms},
        };
        return keys;
    }

    // Returns false on an unknown key or unparsable value.
    bool set(const std::string& key, const std::string& value) {
        if (key == "token") {
            net_token = value;
            return true;
        }
        for (const Key& k : int_keys()) {
            if (key == k.name) {
                char* end = nullptr;
                long v = std::strtol(value.c_str(), &end, 10);
                if (end == value.c_str() || *end != '\0') return false;
                this->*(k.field) = static_cast<int>(v);
                return true;
            }
        }
        return false;
    }
};

}  // namespace herdsim
