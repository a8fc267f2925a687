#include "wsnrl/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wsnrl/errors.hpp"

namespace wsnrl {

using nlohmann::json;

namespace {

std::string engine_state(const std::mt19937_64& engine) {
    std::ostringstream ss;
    ss << engine;
    return ss.str();
}

void engine_restore(std::mt19937_64& engine, const std::string& state) {
    std::istringstream ss(state);
    ss >> engine;
    if (!ss) throw DataError("corrupt RNG state in checkpoint");
}

}  // namespace

PolicyNet Checkpoint::restore_network() const {
    std::mt19937_64 scratch(0);
    PolicyNet net(obs_features, feature_size, conv_layers, leaky_slope, scratch);
    if (net.param_count() != params.size())
        throw ShapeError("checkpoint holds " + std::to_string(params.size()) +
                         " parameters but the architecture (features=" +
                         std::to_string(obs_features) + ", F=" + std::to_string(feature_size) +
                         ", L=" + std::to_string(conv_layers) + ") needs " +
                         std::to_string(net.param_count()));
    net.params() = params;
    return net;
}

void Checkpoint::capture_rng(const RngStreams& streams) {
    rng_field = engine_state(streams.field);
    rng_comms = engine_state(streams.comms);
    rng_solar_noise = engine_state(streams.solar_noise);
    rng_policy = engine_state(streams.policy);
    rng_env = engine_state(streams.env);
}

void Checkpoint::restore_rng(RngStreams& streams) const {
    if (rng_policy.empty()) return;  // older/partial checkpoints
    engine_restore(streams.field, rng_field);
    engine_restore(streams.comms, rng_comms);
    engine_restore(streams.solar_noise, rng_solar_noise);
    engine_restore(streams.policy, rng_policy);
    engine_restore(streams.env, rng_env);
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    json j;
    j["format"] = "wsnrl-checkpoint";
    j["version"] = ckpt.version;
    j["node_count"] = ckpt.node_count;
    j["obs_features"] = ckpt.obs_features;
    j["agent"] = {{"feature_size", ckpt.feature_size},
                  {"conv_layers", ckpt.conv_layers},
                  {"leaky_slope", ckpt.leaky_slope}};
    j["params"] = ckpt.params;
    j["config"] = json::parse(ckpt.config.to_json_string());
    j["config_hash"] = ckpt.config_hash;
    j["progress"] = {{"updates", ckpt.updates}, {"episodes", ckpt.episodes}};
    j["rng"] = {{"field", ckpt.rng_field},
                {"comms", ckpt.rng_comms},
                {"solar_noise", ckpt.rng_solar_noise},
                {"policy", ckpt.rng_policy},
                {"env", ckpt.rng_env}};
    std::ofstream out(path);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path);
    out << j.dump(1) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("format") || j["format"] != "wsnrl-checkpoint")
        throw DataError(path + " is not a wsnrl checkpoint");

    Checkpoint c;
    c.version = j.at("version").get<int>();
    c.node_count = j.at("node_count").get<int>();
    c.obs_features = j.at("obs_features").get<int>();
    c.feature_size = j.at("agent").at("feature_size").get<int>();
    c.conv_layers = j.at("agent").at("conv_layers").get<int>();
    c.leaky_slope = j.at("agent").at("leaky_slope").get<double>();
    c.params = j.at("params").get<std::vector<double>>();
    c.config = SimConfig::from_json_string(j.at("config").dump());
    c.config_hash = j.value("config_hash", "");
    if (j.contains("progress")) {
        c.updates = j["progress"].value("updates", 0L);
        c.episodes = j["progress"].value("episodes", 0L);
    }
    if (j.contains("rng")) {
        c.rng_field = j["rng"].value("field", "");
        c.rng_comms = j["rng"].value("comms", "");
        c.rng_solar_noise = j["rng"].value("solar_noise", "");
        c.rng_policy = j["rng"].value("policy", "");
        c.rng_env = j["rng"].value("env", "");
    }
    return c;
}

Checkpoint make_checkpoint(const PolicyNet& net, const SimConfig& config, int node_count,
                           long updates, long episodes, const RngStreams& streams) {
    Checkpoint c;
    c.node_count = node_count;
    c.obs_features = net.obs_features();
    c.feature_size = net.feature_size();
    c.conv_layers = net.conv_layers();
    c.leaky_slope = net.leaky_slope();
    c.params = net.params();
    c.config = config;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(config.hash()));
    c.config_hash = buf;
    c.updates = updates;
    c.episodes = episodes;
    c.capture_rng(streams);
    return c;
}

}  // namespace wsnrl
