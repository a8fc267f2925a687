#include "wsnrl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wsnrl/errors.hpp"
#include "wsnrl/util.hpp"

namespace wsnrl {

using nlohmann::json;

void NetworkConfig::validate() const {
    if (node_count < 2)
        throw ConfigError("network.node_count must be >= 2 (one gateway plus at least one leaf)");
    if (delta_t_hours <= 0.0) throw ConfigError("network.delta_t_hours must be positive");
    if (steps_per_episode < 1) throw ConfigError("network.steps_per_episode must be >= 1");
    if (!(battery_capacity_mwh > active_count_threshold_mwh &&
          active_count_threshold_mwh > min_reserve_mwh && min_reserve_mwh > 0.0))
        throw ConfigError(
            "network battery thresholds must satisfy capacity > active_count_threshold > "
            "min_reserve > 0");
    if (!(power_active_mw > power_idle_mw && power_idle_mw > power_sleep_mw &&
          power_sleep_mw > 0.0))
        throw ConfigError("network power draws must satisfy active > idle > sleep > 0");
    if (beta <= 0.0 || beta > 1.0) throw ConfigError("network.beta must be in (0, 1]");
    if (eta <= 0.0) throw ConfigError("network.eta must be positive");
    if (r0_m <= 0.0) throw ConfigError("network.r0_m must be positive");
    if (sigma < 0.0) throw ConfigError("network.sigma must be >= 0");
    if (l0 <= 0.0) throw ConfigError("network.l0 must be positive");
    if (deg_a <= 0.0) throw ConfigError("network.deg_a must be positive");
}

void TopologyConfig::validate() const {
    if (span_length_m <= 0.0) throw ConfigError("topology.span_length_m must be positive");
    if (deck_width_m <= 0.0) throw ConfigError("topology.deck_width_m must be positive");
    if (grid_rows < 1 || grid_cols < 1) throw ConfigError("topology grid shape must be >= 1x1");
    if (gateway_index < 0) throw ConfigError("topology.gateway_index must be >= 0");
}

void SolarConfig::validate() const {
    if (source != "synthetic" && source != "csv_file")
        throw ConfigError("solar.source must be \"synthetic\" or \"csv_file\"");
    if (source == "csv_file" && csv_path.empty())
        throw ConfigError("solar.csv_path required when solar.source is csv_file");
    if (source == "synthetic" && days < 1) throw ConfigError("solar.days must be >= 1");
    if (panel_watts < 0.0) throw ConfigError("solar.panel_watts must be >= 0");
    if (cloud_sigma < 0.0) throw ConfigError("solar.cloud_sigma must be >= 0");
    if (train_window_lo < 0 || train_window_hi <= train_window_lo)
        throw ConfigError("solar.train_window must be a non-empty [lo, hi) range");
    if (eval_window_lo < 0 || eval_window_hi <= eval_window_lo)
        throw ConfigError("solar.eval_window must be a non-empty [lo, hi) range");
}

int AgentConfig::resolved_feature_size(int node_count) const {
    if (feature_size > 0) return feature_size;
    // power of two just bigger than the network size: 32/64/128 for 16/56/112
    int f = 1;
    while (f <= node_count) f *= 2;
    return f;
}

void AgentConfig::validate() const {
    if (feature_size < 0) throw ConfigError("agent.feature_size must be >= 0 (0 = auto)");
    if (conv_layers < 1) throw ConfigError("agent.conv_layers must be >= 1");
    if (leaky_slope < 0.0) throw ConfigError("agent.leaky_slope must be >= 0");
}

void PpoHyper::validate() const {
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("ppo.clip_eps must be in (0, 1)");
    if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
        throw ConfigError("ppo.gae_lambda must be in [0, 1]");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo.gamma must be in (0, 1]");
    if (learning_rate <= 0.0) throw ConfigError("ppo.learning_rate must be positive");
    if (vf_clip <= 0.0) throw ConfigError("ppo.vf_clip must be positive");
    if (epochs_per_update < 1) throw ConfigError("ppo.epochs_per_update must be >= 1");
    if (minibatch_size < 1) throw ConfigError("ppo.minibatch_size must be >= 1");
    if (actors < 1) throw ConfigError("ppo.actors must be >= 1");
    if (episodes_total < 1) throw ConfigError("ppo.episodes_total must be >= 1");
    if (optimizer != "adam" && optimizer != "sgd")
        throw ConfigError("ppo.optimizer must be \"adam\" or \"sgd\"");
    if (threads < 1) throw ConfigError("ppo.threads must be >= 1");
    if (checkpoint_every < 1) throw ConfigError("ppo.checkpoint_every must be >= 1");
}

CaseSpec CaseSpec::from_id(int case_id) {
    CaseSpec s;
    s.case_id = case_id;
    switch (case_id) {
        case 1: s.node_count = 16;  s.flags = {true, true};   break;
        case 2: s.node_count = 16;  s.flags = {false, false}; break;
        case 3: s.node_count = 56;  s.flags = {true, true};   break;
        case 4: s.node_count = 56;  s.flags = {false, false}; break;
        case 5: s.node_count = 112; s.flags = {true, true};   break;
        case 6: s.node_count = 112; s.flags = {false, false}; break;
        default:
            throw ConfigError("case id must be in 1..6, got " + std::to_string(case_id));
    }
    return s;
}

void SimConfig::validate() const {
    network.validate();
    topology.validate();
    solar.validate();
    agent.validate();
    ppo.validate();
}

void SimConfig::apply_case(const CaseSpec& spec) {
    network.node_count = spec.node_count;
    case_flags = spec.flags;
}

namespace {

json to_json(const SimConfig& c) {
    json j;
    j["network"] = {{"node_count", c.network.node_count},
                    {"delta_t_hours", c.network.delta_t_hours},
                    {"steps_per_episode", c.network.steps_per_episode},
                    {"battery_capacity_mwh", c.network.battery_capacity_mwh},
                    {"power_active_mw", c.network.power_active_mw},
                    {"power_idle_mw", c.network.power_idle_mw},
                    {"power_sleep_mw", c.network.power_sleep_mw},
                    {"active_count_threshold_mwh", c.network.active_count_threshold_mwh},
                    {"min_reserve_mwh", c.network.min_reserve_mwh},
                    {"alpha1", c.network.alpha1},
                    {"alpha2", c.network.alpha2},
                    {"r0_m", c.network.r0_m},
                    {"beta", c.network.beta},
                    {"eta", c.network.eta},
                    {"sigma", c.network.sigma},
                    {"l0", c.network.l0},
                    {"deg_a", c.network.deg_a},
                    {"deg_b", c.network.deg_b},
                    {"gateway_participates", c.network.gateway_participates}};
    j["topology"] = {{"span_length_m", c.topology.span_length_m},
                     {"deck_width_m", c.topology.deck_width_m},
                     {"grid_rows", c.topology.grid_rows},
                     {"grid_cols", c.topology.grid_cols},
                     {"coordinates_file", c.topology.coordinates_file},
                     {"gateway_index", c.topology.gateway_index},
                     {"strict_paper_sizes", c.topology.strict_paper_sizes}};
    j["solar"] = {{"source", c.solar.source},
                  {"csv_path", c.solar.csv_path},
                  {"days", c.solar.days},
                  {"panel_watts", c.solar.panel_watts},
                  {"latitude_factor", c.solar.latitude_factor},
                  {"cloud_sigma", c.solar.cloud_sigma},
                  {"cloud_seed", c.solar.cloud_seed},
                  {"train_window", json::array({c.solar.train_window_lo, c.solar.train_window_hi})},
                  {"eval_window", json::array({c.solar.eval_window_lo, c.solar.eval_window_hi})}};
    j["agent"] = {{"feature_size", c.agent.feature_size},
                  {"conv_layers", c.agent.conv_layers},
                  {"leaky_slope", c.agent.leaky_slope}};
    j["ppo"] = {{"clip_eps", c.ppo.clip_eps},
                {"vf_clip", c.ppo.vf_clip},
                {"gae_lambda", c.ppo.gae_lambda},
                {"gamma", c.ppo.gamma},
                {"learning_rate", c.ppo.learning_rate},
                {"c1", c.ppo.c1},
                {"c2", c.ppo.c2},
                {"epochs_per_update", c.ppo.epochs_per_update},
                {"minibatch_size", c.ppo.minibatch_size},
                {"actors", c.ppo.actors},
                {"episodes_total", c.ppo.episodes_total},
                {"adv_norm", c.ppo.adv_norm},
                {"optimizer", c.ppo.optimizer},
                {"threads", c.ppo.threads},
                {"checkpoint_every", c.ppo.checkpoint_every}};
    j["case"] = {{"degradation_in_state", c.case_flags.degradation_in_state},
                 {"degradation_in_reward", c.case_flags.degradation_in_reward}};
    return j;
}

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

SimConfig from_json(const json& j) {
    SimConfig c;
    if (j.contains("network")) {
        const json& n = j.at("network");
        get_if_present(n, "node_count", c.network.node_count);
        get_if_present(n, "delta_t_hours", c.network.delta_t_hours);
        get_if_present(n, "steps_per_episode", c.network.steps_per_episode);
        get_if_present(n, "battery_capacity_mwh", c.network.battery_capacity_mwh);
        get_if_present(n, "power_active_mw", c.network.power_active_mw);
        get_if_present(n, "power_idle_mw", c.network.power_idle_mw);
        get_if_present(n, "power_sleep_mw", c.network.power_sleep_mw);
        get_if_present(n, "active_count_threshold_mwh", c.network.active_count_threshold_mwh);
        get_if_present(n, "min_reserve_mwh", c.network.min_reserve_mwh);
        get_if_present(n, "alpha1", c.network.alpha1);
        get_if_present(n, "alpha2", c.network.alpha2);
        get_if_present(n, "r0_m", c.network.r0_m);
        get_if_present(n, "beta", c.network.beta);
        get_if_present(n, "eta", c.network.eta);
        get_if_present(n, "sigma", c.network.sigma);
        get_if_present(n, "l0", c.network.l0);
        get_if_present(n, "deg_a", c.network.deg_a);
        get_if_present(n, "deg_b", c.network.deg_b);
        get_if_present(n, "gateway_participates", c.network.gateway_participates);
    }
    if (j.contains("topology")) {
        const json& t = j.at("topology");
        get_if_present(t, "span_length_m", c.topology.span_length_m);
        get_if_present(t, "deck_width_m", c.topology.deck_width_m);
        get_if_present(t, "grid_rows", c.topology.grid_rows);
        get_if_present(t, "grid_cols", c.topology.grid_cols);
        get_if_present(t, "coordinates_file", c.topology.coordinates_file);
        get_if_present(t, "gateway_index", c.topology.gateway_index);
        get_if_present(t, "strict_paper_sizes", c.topology.strict_paper_sizes);
    }
    if (j.contains("solar")) {
        const json& s = j.at("solar");
        get_if_present(s, "source", c.solar.source);
        get_if_present(s, "csv_path", c.solar.csv_path);
        get_if_present(s, "days", c.solar.days);
        get_if_present(s, "panel_watts", c.solar.panel_watts);
        get_if_present(s, "latitude_factor", c.solar.latitude_factor);
        get_if_present(s, "cloud_sigma", c.solar.cloud_sigma);
        get_if_present(s, "cloud_seed", c.solar.cloud_seed);
        if (s.contains("train_window")) {
            c.solar.train_window_lo = s.at("train_window").at(0).get<int>();
            c.solar.train_window_hi = s.at("train_window").at(1).get<int>();
        }
        if (s.contains("eval_window")) {
            c.solar.eval_window_lo = s.at("eval_window").at(0).get<int>();
            c.solar.eval_window_hi = s.at("eval_window").at(1).get<int>();
        }
    }
    if (j.contains("agent")) {
        const json& a = j.at("agent");
        get_if_present(a, "feature_size", c.agent.feature_size);
        get_if_present(a, "conv_layers", c.agent.conv_layers);
        get_if_present(a, "leaky_slope", c.agent.leaky_slope);
    }
    if (j.contains("ppo")) {
        const json& p = j.at("ppo");
        get_if_present(p, "clip_eps", c.ppo.clip_eps);
        get_if_present(p, "vf_clip", c.ppo.vf_clip);
        get_if_present(p, "gae_lambda", c.ppo.gae_lambda);
        get_if_present(p, "gamma", c.ppo.gamma);
        get_if_present(p, "learning_rate", c.ppo.learning_rate);
        get_if_present(p, "c1", c.ppo.c1);
        get_if_present(p, "c2", c.ppo.c2);
        get_if_present(p, "epochs_per_update", c.ppo.epochs_per_update);
        get_if_present(p, "minibatch_size", c.ppo.minibatch_size);
        get_if_present(p, "actors", c.ppo.actors);
        get_if_present(p, "episodes_total", c.ppo.episodes_total);
        get_if_present(p, "adv_norm", c.ppo.adv_norm);
        get_if_present(p, "optimizer", c.ppo.optimizer);
        get_if_present(p, "threads", c.ppo.threads);
        get_if_present(p, "checkpoint_every", c.ppo.checkpoint_every);
    }
    if (j.contains("case")) {
        const json& k = j.at("case");
        get_if_present(k, "degradation_in_state", c.case_flags.degradation_in_state);
        get_if_present(k, "degradation_in_reward", c.case_flags.degradation_in_reward);
    }
    return c;
}

// "network.node_count" -> WSNRL_NETWORK_NODE_COUNT
std::string env_key(const std::string& section, const std::string& key) {
    std::string out = "WSNRL_" + section + "_" + key;
    for (char& ch : out) ch = static_cast<char>(ch == '.' ? '_' : std::toupper(ch));
    return out;
}

void override_leaf(json& leaf, const std::string& section, const std::string& key) {
    const char* v = std::getenv(env_key(section, key).c_str());
    if (v == nullptr) return;
    json parsed = json::parse(v, nullptr, false);
    if (parsed.is_discarded()) parsed = json(std::string(v));  // bare strings allowed
    leaf = parsed;
}

}  // namespace

std::string SimConfig::to_json_string() const {
    return to_json(*this).dump(2) + "\n";
}

SimConfig SimConfig::from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON");
    return from_json(j);
}

void SimConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open config file for writing: " + path);
    out << to_json_string();
}

SimConfig SimConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    SimConfig c = from_json_string(ss.str());
    c.apply_env_overrides();
    return c;
}

void SimConfig::apply_env_overrides() {
    json j = to_json(*this);
    for (auto& [section, body] : j.items()) {
        if (section == "solar") {
            // window ranges override as "lo,hi"
            for (const char* k : {"train_window", "eval_window"}) {
                const char* v = std::getenv(env_key(section, k).c_str());
                if (v != nullptr) {
                    std::string s(v);
                    auto comma = s.find(',');
                    if (comma == std::string::npos)
                        throw ConfigError(std::string("expected \"lo,hi\" for ") + k);
                    body[k] = json::array(
                        {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))});
                }
            }
        }
        for (auto& [key, leaf] : body.items()) {
            if (leaf.is_array()) continue;
            override_leaf(leaf, section, key);
        }
    }
    *this = from_json(j);
}

std::uint64_t SimConfig::hash() const {
    return fnv1a64(to_json(*this).dump());
}

}  // namespace wsnrl
