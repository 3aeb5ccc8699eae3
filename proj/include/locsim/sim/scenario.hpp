#pragma once

#include "locsim/channel.hpp"
#include "locsim/geometry.hpp"
#include "locsim/solvers.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace locsim {

enum class ChannelMode { awgn, multipath };

struct UeArea {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
};

struct CoopConfig {
    bool enabled = false;
    int n_coop = 0;
    int anchors_visible_per_ue = 0; // 0 = all
    double tx_power_dbm = 0.0;      // 0 = inherit link budget tx power
    int n_external_walls = 0;       // UE-to-UE links
};

/// Path-loss environment shared by every anchor-UE link of a deployment.
struct PathLossEnv {
    double indoor_distance_2d_m = 0.0;
    int n_floors = 0;
    int n_internal_walls = 0;
    int n_external_walls = 1; // UEs are indoors, anchors outside
};

struct ChannelConfig {
    double delay_spread_s = 100e-9;
    int max_taps = 12;
};

struct Scenario {
    std::string name = "scenario";
    std::string geometry_tag = "custom"; // good | non_ideal | custom
    std::vector<Position> anchors;
    UeArea ue_area;
    int n_ues = 1;
    int trials = 1;
    std::uint64_t master_seed = 1;
    int threads = 1;
    ChannelMode channel_mode = ChannelMode::awgn;
    LinkBudget link_budget;
    PathLossEnv path_loss;
    ChannelConfig channel;
    CoopConfig coop;
    std::vector<std::string> solvers{"tswpm", "wnls"};
    SolverConfig solver_config;

    /// Log lines of the form "field = default" filled by load_scenario for
    /// every omitted optional field.
    std::vector<std::string> defaults_applied;

    void validate() const; // throws ValidationError
    nlohmann::json to_json() const;
};

/// Parse + validate a scenario JSON file. Unknown keys anywhere in the
/// document are rejected (ParseError); invariant violations raise
/// ValidationError.
Scenario load_scenario(const std::string &path);

/// Same, from an already-parsed document.
Scenario scenario_from_json(const nlohmann::json &doc);

const char *channel_mode_name(ChannelMode m);

} // namespace locsim
