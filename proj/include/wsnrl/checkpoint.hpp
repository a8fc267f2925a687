#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wsnrl/config.hpp"
#include "wsnrl/nn.hpp"
#include "wsnrl/rng.hpp"

namespace wsnrl {

// Versioned JSON container: all parameter tensors with shapes, the resolved
// config and its hash, optimizer progress, and the RNG stream states.
struct Checkpoint {
    int version = 1;
    int node_count = 0;
    int obs_features = 0;
    int feature_size = 0;
    int conv_layers = 0;
    double leaky_slope = 0.01;
    std::vector<double> params;
    SimConfig config;
    std::string config_hash;
    long updates = 0;
    long episodes = 0;
    // engine states as decimal streams, keyed by stream name
    std::string rng_field, rng_comms, rng_solar_noise, rng_policy, rng_env;

    // Rebuilds the network; throws ShapeError if sizes disagree.
    PolicyNet restore_network() const;
    void capture_rng(const RngStreams& streams);
    void restore_rng(RngStreams& streams) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const PolicyNet& net, const SimConfig& config, int node_count,
                           long updates, long episodes, const RngStreams& streams);

}  // namespace wsnrl
