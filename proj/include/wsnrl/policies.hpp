#pragma once

#include <memory>
#include <random>
#include <string>

#include "wsnrl/env.hpp"
#include "wsnrl/nn.hpp"

namespace wsnrl {

// Anything that can drive an environment: trained checkpoints and the rule
// baselines share this surface.
class Policy {
  public:
    virtual ~Policy() = default;
    virtual ActionVector act(const Observation& obs) = 0;
    virtual void begin_episode() {}
};

// all_active: command Active everywhere, every step.
// round_robin: a rotating block of round(fraction*N) nodes is Active, the
//   rest Sleep; the block shifts by one node per step so long-run shares
//   are equal.
// greedy_battery: the k highest-battery nodes above the eligibility
//   threshold go Active, everyone else Sleeps.
std::unique_ptr<Policy> make_baseline_policy(const std::string& name, const SimConfig& config,
                                             double fraction = 0.5);

// Wraps a trained network; stochastic by default, argmax when greedy.
class NetworkPolicy : public Policy {
  public:
    NetworkPolicy(PolicyNet net, bool greedy, std::uint64_t action_seed);
    ActionVector act(const Observation& obs) override;

  private:
    PolicyNet net_;
    PolicyNet::Cache cache_;
    bool greedy_;
    std::mt19937_64 rng_;
};

}  // namespace wsnrl
