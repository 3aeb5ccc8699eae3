#include "locsim/sim/scenario.hpp"

#include "locsim/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace locsim {

using nlohmann::json;

namespace {

void reject_unknown(const json &obj, const std::set<std::string> &allowed,
                    const std::string &where) {
    for (const auto &[key, _] : obj.items())
        if (!allowed.count(key))
            throw ParseError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_or_default(const json &obj, const char *key, T def,
                 std::vector<std::string> &log, const std::string &where) {
    if (obj.contains(key))
        return obj.at(key).get<T>();
    std::ostringstream os;
    os << where << "." << key << " = ";
    if constexpr (std::is_same_v<T, std::string>)
        os << def;
    else if constexpr (std::is_same_v<T, bool>)
        os << (def ? "true" : "false");
    else
        os << def;
    log.push_back(os.str());
    return def;
}

} // namespace

const char *channel_mode_name(ChannelMode m) {
    return m == ChannelMode::awgn ? "awgn" : "multipath";
}

void Scenario::validate() const {
    try {
        if (anchors.size() < 2)
            throw ValidationError("anchors: need at least 2");
        AnchorSet check(anchors, 0); // distinctness/finiteness
        if (n_ues < 1)
            throw ValidationError("n_ues: must be >= 1");
        if (trials < 1)
            throw ValidationError("trials: must be >= 1");
        if (threads < 1)
            throw ValidationError("threads: must be >= 1");
        if (!(ue_area.xmax > ue_area.xmin) || !(ue_area.ymax > ue_area.ymin))
            throw ValidationError("ue_area: empty rectangle");
        if (geometry_tag != "good" && geometry_tag != "non_ideal" &&
            geometry_tag != "custom")
            throw ValidationError("geometry_tag: must be good|non_ideal|custom");
        link_budget.validate();
        if (channel.delay_spread_s <= 0.0)
            throw ValidationError("channel.delay_spread_s: must be positive");
        if (channel.max_taps < 1)
            throw ValidationError("channel.max_taps: must be >= 1");
        if (path_loss.indoor_distance_2d_m < 0 || path_loss.n_floors < 0 ||
            path_loss.n_internal_walls < 0 || path_loss.n_external_walls < 0)
            throw ValidationError("path_loss: negative term");
        if (coop.enabled) {
            if (coop.n_coop < 1)
                throw ValidationError("coop.n_coop: must be >= 1 when enabled");
            if (coop.n_coop >= n_ues)
                throw ValidationError("coop.n_coop: must be < n_ues");
            if (coop.anchors_visible_per_ue < 0 ||
                coop.anchors_visible_per_ue >
                    static_cast<int>(anchors.size()))
                throw ValidationError("coop.anchors_visible_per_ue out of range");
            if (coop.n_external_walls < 0)
                throw ValidationError("coop.n_external_walls: negative");
        }
        if (solvers.empty())
            throw ValidationError("solvers: need at least one");
        for (const auto &s : solvers)
            if (s != "tswpm" && s != "wnls" && s != "nls" && s != "ippm")
                throw ValidationError("solvers: unknown solver '" + s + "'");
        solver_config.validate();
    } catch (const ValidationError &) {
        throw;
    } catch (const Error &e) {
        throw ValidationError(e.what());
    }
}

Scenario scenario_from_json(const json &doc) {
    if (!doc.is_object())
        throw ParseError("scenario document must be a JSON object");
    reject_unknown(doc,
                   {"name", "geometry_tag", "anchors", "ue_area", "n_ues",
                    "trials", "master_seed", "threads", "channel_mode",
                    "link_budget", "path_loss", "channel", "coop", "solvers",
                    "solver_config"},
                   "scenario");

    Scenario s;
    auto &log = s.defaults_applied;
    try {
        s.name = get_or_default<std::string>(doc, "name", "scenario", log, "scenario");
        s.geometry_tag =
            get_or_default<std::string>(doc, "geometry_tag", "custom", log, "scenario");

        if (!doc.contains("anchors"))
            throw ValidationError("anchors: required field missing");
        for (const auto &a : doc.at("anchors")) {
            if (!a.is_array() || a.size() != 2)
                throw ParseError("anchors: each entry must be [x, y]");
            s.anchors.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        }

        if (!doc.contains("ue_area"))
            throw ValidationError("ue_area: required field missing");
        const json &area = doc.at("ue_area");
        reject_unknown(area, {"xmin", "xmax", "ymin", "ymax"}, "ue_area");
        s.ue_area.xmin = area.at("xmin").get<double>();
        s.ue_area.xmax = area.at("xmax").get<double>();
        s.ue_area.ymin = area.at("ymin").get<double>();
        s.ue_area.ymax = area.at("ymax").get<double>();

        s.n_ues = get_or_default(doc, "n_ues", 1, log, "scenario");
        if (!doc.contains("trials"))
            throw ValidationError("trials: required field missing");
        s.trials = doc.at("trials").get<int>();
        s.master_seed = get_or_default<std::uint64_t>(doc, "master_seed", 1, log, "scenario");
        s.threads = get_or_default(doc, "threads", 1, log, "scenario");

        const std::string mode = get_or_default<std::string>(
            doc, "channel_mode", "awgn", log, "scenario");
        if (mode == "awgn")
            s.channel_mode = ChannelMode::awgn;
        else if (mode == "multipath")
            s.channel_mode = ChannelMode::multipath;
        else
            throw ValidationError("channel_mode: must be awgn|multipath");

        if (!doc.contains("link_budget") ||
            !doc.at("link_budget").contains("tx_power_dbm"))
            throw ValidationError("link_budget.tx_power_dbm: required field missing");
        const json &lb = doc.at("link_budget");
        reject_unknown(lb,
                       {"tx_power_dbm", "carrier_hz", "bandwidth_hz",
                        "noise_figure_db", "shadow_std_db", "scs_hz",
                        "n_subcarriers"},
                       "link_budget");
        s.link_budget.tx_power_dbm = lb.at("tx_power_dbm").get<double>();
        s.link_budget.carrier_hz =
            get_or_default(lb, "carrier_hz", 3.5e9, log, "link_budget");
        s.link_budget.bandwidth_hz =
            get_or_default(lb, "bandwidth_hz", 5e6, log, "link_budget");
        s.link_budget.noise_figure_db =
            get_or_default(lb, "noise_figure_db", 9.0, log, "link_budget");
        s.link_budget.shadow_std_db =
            get_or_default(lb, "shadow_std_db", 8.0, log, "link_budget");
        s.link_budget.scs_hz =
            get_or_default(lb, "scs_hz", 15e3, log, "link_budget");
        s.link_budget.n_subcarriers =
            get_or_default(lb, "n_subcarriers", 300, log, "link_budget");

        if (doc.contains("path_loss")) {
            const json &pl = doc.at("path_loss");
            reject_unknown(pl,
                           {"indoor_distance_2d_m", "n_floors",
                            "n_internal_walls", "n_external_walls"},
                           "path_loss");
            s.path_loss.indoor_distance_2d_m = get_or_default(
                pl, "indoor_distance_2d_m", 0.0, log, "path_loss");
            s.path_loss.n_floors =
                get_or_default(pl, "n_floors", 0, log, "path_loss");
            s.path_loss.n_internal_walls =
                get_or_default(pl, "n_internal_walls", 0, log, "path_loss");
            s.path_loss.n_external_walls =
                get_or_default(pl, "n_external_walls", 1, log, "path_loss");
        } else {
            log.push_back("path_loss = defaults (1 external wall)");
        }

        if (doc.contains("channel")) {
            const json &ch = doc.at("channel");
            reject_unknown(ch, {"delay_spread_s", "max_taps"}, "channel");
            s.channel.delay_spread_s =
                get_or_default(ch, "delay_spread_s", 100e-9, log, "channel");
            s.channel.max_taps =
                get_or_default(ch, "max_taps", 12, log, "channel");
        } else if (s.channel_mode == ChannelMode::multipath) {
            log.push_back("channel = defaults (100 ns delay spread, 12 taps)");
        }

        if (doc.contains("coop")) {
            const json &co = doc.at("coop");
            reject_unknown(co,
                           {"enabled", "n_coop", "anchors_visible_per_ue",
                            "tx_power_dbm", "n_external_walls"},
                           "coop");
            s.coop.enabled = get_or_default(co, "enabled", false, log, "coop");
            s.coop.n_coop = get_or_default(co, "n_coop", 0, log, "coop");
            s.coop.anchors_visible_per_ue =
                get_or_default(co, "anchors_visible_per_ue", 0, log, "coop");
            s.coop.tx_power_dbm =
                get_or_default(co, "tx_power_dbm", 0.0, log, "coop");
            s.coop.n_external_walls =
                get_or_default(co, "n_external_walls", 0, log, "coop");
        }

        if (doc.contains("solvers"))
            s.solvers = doc.at("solvers").get<std::vector<std::string>>();
        else
            log.push_back("solvers = [tswpm, wnls]");

        if (doc.contains("solver_config")) {
            const json &sc = doc.at("solver_config");
            reject_unknown(sc,
                           {"epsilon", "consecutive_hits", "max_iterations",
                            "regularization", "coop_anchor_scaling"},
                           "solver_config");
            s.solver_config.epsilon =
                get_or_default(sc, "epsilon", 1e-7, log, "solver_config");
            s.solver_config.consecutive_hits = get_or_default(
                sc, "consecutive_hits", 10, log, "solver_config");
            s.solver_config.max_iterations = get_or_default(
                sc, "max_iterations", 100, log, "solver_config");
            s.solver_config.regularization = get_or_default(
                sc, "regularization", 0.0, log, "solver_config");
            const std::string scal = get_or_default<std::string>(
                sc, "coop_anchor_scaling", "as_printed", log, "solver_config");
            if (scal == "as_printed")
                s.solver_config.coop_anchor_scaling =
                    CoopAnchorScaling::as_printed;
            else if (scal == "alg1_consistent")
                s.solver_config.coop_anchor_scaling =
                    CoopAnchorScaling::alg1_consistent;
            else
                throw ValidationError(
                    "solver_config.coop_anchor_scaling: unknown value");
        } else {
            log.push_back("solver_config = defaults (1e-7, 10, 100)");
        }
    } catch (const json::exception &e) {
        throw ParseError(std::string("scenario parse error: ") + e.what());
    }

    s.validate();
    return s;
}

Scenario load_scenario(const std::string &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open scenario file: " + path);
    json doc;
    try {
        doc = json::parse(in,
                          /*cb=*/nullptr, /*allow_exceptions=*/true,
                          /*ignore_comments=*/true);
    } catch (const json::parse_error &e) {
        throw ParseError(std::string("invalid JSON in ") + path + ": " +
                         e.what());
    }
    // run_manifest.json round-trips: the resolved scenario lives under
    // "scenario".
    if (doc.is_object() && doc.contains("scenario") &&
        !doc.contains("anchors"))
        return scenario_from_json(doc.at("scenario"));
    return scenario_from_json(doc);
}

json Scenario::to_json() const {
    json area{{"xmin", ue_area.xmin},
              {"xmax", ue_area.xmax},
              {"ymin", ue_area.ymin},
              {"ymax", ue_area.ymax}};
    json anchors_j = json::array();
    for (const auto &a : anchors)
        anchors_j.push_back({a.x, a.y});
    json doc{
        {"name", name},
        {"geometry_tag", geometry_tag},
        {"anchors", anchors_j},
        {"ue_area", area},
        {"n_ues", n_ues},
        {"trials", trials},
        {"master_seed", master_seed},
        {"threads", threads},
        {"channel_mode", channel_mode_name(channel_mode)},
        {"link_budget",
         {{"tx_power_dbm", link_budget.tx_power_dbm},
          {"carrier_hz", link_budget.carrier_hz},
          {"bandwidth_hz", link_budget.bandwidth_hz},
          {"noise_figure_db", link_budget.noise_figure_db},
          {"shadow_std_db", link_budget.shadow_std_db},
          {"scs_hz", link_budget.scs_hz},
          {"n_subcarriers", link_budget.n_subcarriers}}},
        {"path_loss",
         {{"indoor_distance_2d_m", path_loss.indoor_distance_2d_m},
          {"n_floors", path_loss.n_floors},
          {"n_internal_walls", path_loss.n_internal_walls},
          {"n_external_walls", path_loss.n_external_walls}}},
        {"channel",
         {{"delay_spread_s", channel.delay_spread_s},
          {"max_taps", channel.max_taps}}},
        {"coop",
         {{"enabled", coop.enabled},
          {"n_coop", coop.n_coop},
          {"anchors_visible_per_ue", coop.anchors_visible_per_ue},
          {"tx_power_dbm", coop.tx_power_dbm},
          {"n_external_walls", coop.n_external_walls}}},
        {"solvers", solvers},
        {"solver_config",
         {{"epsilon", solver_config.epsilon},
          {"consecutive_hits", solver_config.consecutive_hits},
          {"max_iterations", solver_config.max_iterations},
          {"regularization", solver_config.regularization},
          {"coop_anchor_scaling",
           solver_config.coop_anchor_scaling == CoopAnchorScaling::as_printed
               ? "as_printed"
               : "alg1_consistent"}}},
    };
    return doc;
}

} // namespace locsim
