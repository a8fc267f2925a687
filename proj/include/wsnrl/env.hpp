#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "wsnrl/battery.hpp"
#include "wsnrl/config.hpp"
#include "wsnrl/connectivity.hpp"
#include "wsnrl/degradation.hpp"
#include "wsnrl/random_field.hpp"
#include "wsnrl/rng.hpp"
#include "wsnrl/solar.hpp"
#include "wsnrl/topology.hpp"

namespace wsnrl {

// Stacked per-node state rows, normalized: B/Bmax in [0,1], X/2 in
// {0,0.5,1}, D/Bmax in [-1,1], D_T/100 in [0,1]. 4 features with the
// degradation column, 3 without.
struct Observation {
    int nodes = 0;
    int features = 0;
    std::vector<double> data;  // row-major [nodes x features]

    std::span<const double> row(int i) const {
        return {data.data() + static_cast<std::size_t>(i) * features,
                static_cast<std::size_t>(features)};
    }
};

struct ActionVector {
    std::vector<int> commands;  // 0 active, 1 idle, 2 sleep; one per node
};

struct StepInfo {
    int active_count = 0;  // C_a: active, battery above threshold, link up
    double r1 = 0.0;
    double r2 = 0.0;
    int comm_successes = 0;
    int forced_sleeps = 0;
    double e_mu = 0.0;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

// Minimal environment contract the PPO stack trains against.
class Env {
  public:
    virtual ~Env() = default;
    virtual Observation reset() = 0;
    virtual StepResult step(const ActionVector& action) = 0;
    virtual int node_count() const = 0;
    virtual int feature_count() const = 0;
    virtual int steps_per_episode() const = 0;
};

// Full WSN MDP: link sampling, command application under communication
// uncertainty, battery bookkeeping with forced sleep, online degradation,
// and the utility/balance reward.
class WsnEnv : public Env {
  public:
    enum class RunMode { train, eval };

    // Training mode draws a random steps_per_episode window from the train
    // range each reset; eval mode runs the configured eval window as one
    // continuous episode.
    WsnEnv(const SimConfig& config, Topology topology, SolarProfile profile, RunMode mode,
           std::uint64_t master_seed);

    Observation reset() override;
    StepResult step(const ActionVector& action) override;

    int node_count() const override { return topology_.node_count(); }
    int feature_count() const override { return config_.observation_features(); }
    int steps_per_episode() const override { return episode_steps_; }

    // Overrides the evaluation window (step index into the profile).
    void set_eval_window(int start, int steps);

    const Topology& topology() const { return topology_; }
    const SimConfig& config() const { return config_; }
    const std::vector<NodeState>& node_states() const { return states_; }
    const RandomFieldSample& field() const { return field_; }
    int window_start() const { return window_start_; }
    int step_index() const { return step_index_; }
    bool done() const { return done_; }

    // Optional per-step trace sink (the --trace CSV is built on this).
    using TraceFn = std::function<void(int t, const StepInfo&, double reward,
                                       const std::vector<NodeState>&,
                                       const std::vector<std::uint8_t>& links)>;
    void set_trace(TraceFn fn) { trace_ = std::move(fn); }

  private:
    Observation make_observation() const;
    double participant_dt_max() const;

    SimConfig config_;
    Topology topology_;
    SolarProfile profile_;
    RunMode mode_;
    RngStreams streams_;
    FieldSampler sampler_;
    LinkModel link_model_;

    std::vector<NodeState> states_;
    std::vector<std::uint8_t> forced_sleep_;
    std::vector<OnlineDegradation> deg_;
    RandomFieldSample field_;
    int episode_steps_ = 0;
    int window_start_ = 0;
    int step_index_ = 0;
    bool done_ = true;
    int eval_start_ = 0;
    int eval_steps_ = 0;
    TraceFn trace_;
};

// Per-episode scalar summaries used by the learning curve.
struct EpisodeStats {
    double total_reward = 0.0;
    double r1_sum = 0.0;
    double r2_sum = 0.0;
};

}  // namespace wsnrl
