#include "wsnrl/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsnrl/errors.hpp"
#include "wsnrl/ppo.hpp"

namespace wsnrl {
namespace {

class AllActivePolicy : public Policy {
  public:
    ActionVector act(const Observation& obs) override {
        return {std::vector<int>(static_cast<std::size_t>(obs.nodes), 0)};
    }
};

class RoundRobinPolicy : public Policy {
  public:
    RoundRobinPolicy(double fraction) : fraction_(fraction) {}

    void begin_episode() override { t_ = 0; }

    ActionVector act(const Observation& obs) override {
        int n = obs.nodes;
        int active = std::max(1, static_cast<int>(std::lround(fraction_ * n)));
        std::vector<int> cmd(static_cast<std::size_t>(n), 2);
        for (int i = 0; i < n; ++i)
            if ((i - t_ % n + n) % n < active) cmd[static_cast<std::size_t>(i)] = 0;
        ++t_;
        return {cmd};
    }

  private:
    double fraction_;
    long t_ = 0;
};

class GreedyBatteryPolicy : public Policy {
  public:
    GreedyBatteryPolicy(double fraction, double threshold_norm)
        : fraction_(fraction), threshold_norm_(threshold_norm) {}

    ActionVector act(const Observation& obs) override {
        int n = obs.nodes;
        int k = std::max(1, static_cast<int>(std::lround(fraction_ * n)));
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return obs.row(a)[0] > obs.row(b)[0];
        });
        std::vector<int> cmd(static_cast<std::size_t>(n), 2);
        int chosen = 0;
        for (int idx : order) {
            if (chosen >= k) break;
            if (obs.row(idx)[0] <= threshold_norm_) break;  // never activate below threshold
            cmd[static_cast<std::size_t>(idx)] = 0;
            ++chosen;
        }
        return {cmd};
    }

  private:
    double fraction_;
    double threshold_norm_;
};

}  // namespace

std::unique_ptr<Policy> make_baseline_policy(const std::string& name, const SimConfig& config,
                                             double fraction) {
    if (name == "all_active") return std::make_unique<AllActivePolicy>();
    if (name == "round_robin") return std::make_unique<RoundRobinPolicy>(fraction);
    if (name == "greedy_battery")
        return std::make_unique<GreedyBatteryPolicy>(
            fraction,
            config.network.active_count_threshold_mwh / config.network.battery_capacity_mwh);
    throw ConfigError("unknown baseline policy \"" + name +
                      "\"; expected all_active, round_robin or greedy_battery");
}

NetworkPolicy::NetworkPolicy(PolicyNet net, bool greedy, std::uint64_t action_seed)
    : net_(std::move(net)), greedy_(greedy), rng_(action_seed) {}

ActionVector NetworkPolicy::act(const Observation& obs) {
    net_.forward(obs.data.data(), obs.nodes, obs.features, cache_);
    if (greedy_) return {greedy_action(cache_.logits, obs.nodes)};
    return {sample_action(cache_.logits, obs.nodes, rng_).commands};
}

}  // namespace wsnrl
