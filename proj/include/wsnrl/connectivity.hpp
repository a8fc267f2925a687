#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "wsnrl/topology.hpp"

namespace wsnrl {

// Soft geometric graph link model: H(r) = beta * exp(-(r/r0)^eta).
struct LinkModel {
    double r0 = 1000.0;
    double beta = 1.0;
    double eta = 1.0;

    double link_probability(double distance_m) const {
        return beta * std::exp(-std::pow(distance_m / r0, eta));
    }
};

// One independent Bernoulli draw per gateway-leaf pair (success = u < H);
// the gateway's own entry is always true and consumes no randomness.
inline std::vector<std::uint8_t> sample_links(const LinkModel& model, const Topology& topo,
                                              std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::uint8_t> ok(static_cast<std::size_t>(topo.node_count()), 0);
    for (int i = 0; i < topo.node_count(); ++i) {
        if (i == topo.gateway_index) {
            ok[static_cast<std::size_t>(i)] = 1;
            continue;
        }
        double u = uniform(rng);
        ok[static_cast<std::size_t>(i)] = u < model.link_probability(topo.gateway_distance(i));
    }
    return ok;
}

}  // namespace wsnrl
