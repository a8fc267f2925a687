#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "wsnrl/util.hpp"

namespace wsnrl {

// Named independent RNG streams derived from one master seed. Each stream is
// its own engine, so drawing extra samples from one never shifts another.
struct RngStreams {
    std::mt19937_64 field;
    std::mt19937_64 comms;
    std::mt19937_64 solar_noise;
    std::mt19937_64 policy;
    std::mt19937_64 env;

    explicit RngStreams(std::uint64_t master_seed)
        : field(derive(master_seed, "field")),
          comms(derive(master_seed, "comms")),
          solar_noise(derive(master_seed, "solar_noise")),
          policy(derive(master_seed, "policy")),
          env(derive(master_seed, "env")) {}

    static std::uint64_t derive(std::uint64_t master_seed, std::string_view stream_name) {
        std::uint64_t state = master_seed ^ fnv1a64(stream_name);
        // a couple of mixing rounds so nearby master seeds diverge
        splitmix64(state);
        return splitmix64(state);
    }
};

}  // namespace wsnrl
