#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wsnrl/config.hpp"
#include "wsnrl/env.hpp"
#include "wsnrl/nn.hpp"
#include "wsnrl/rng.hpp"

namespace wsnrl {

// Per-node categorical distribution over the 3 modes, independent across
// nodes; the joint log-probability is the sum of per-node terms.
struct ActionSample {
    std::vector<int> commands;
    double logp = 0.0;
};
ActionSample sample_action(const std::vector<double>& logits, int nodes, std::mt19937_64& rng);
std::vector<int> greedy_action(const std::vector<double>& logits, int nodes);
double action_logp(const std::vector<double>& logits, int nodes, const std::vector<int>& commands);

// Truncated GAE, backward recursion: A_t = delta_t + gamma*lambda*A_{t+1},
// delta_t = r_t + gamma*V(s_{t+1}) - V(s_t), V after the last step given by
// bootstrap_value (0 at a terminal).
std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        double bootstrap_value, double gamma, double lambda);

// Fixed-capacity trajectory store: actors * steps_per_episode transitions.
class RolloutBuffer {
  public:
    RolloutBuffer(int capacity, int nodes, int features);

    void add(const double* obs, const std::vector<int>& action, double logp, double reward,
             double value);
    // Computes advantages/returns for the episode that ended with the last
    // `length` transitions.
    void finish_episode(int length, double bootstrap_value, double gamma, double lambda);
    void normalize_advantages();
    void clear();

    bool full() const { return size_ == capacity_; }
    int size() const { return size_; }
    int capacity() const { return capacity_; }
    int nodes() const { return nodes_; }
    int features() const { return features_; }

    const double* obs_at(int i) const { return obs_.data() + static_cast<std::size_t>(i) * nodes_ * features_; }
    const int* action_at(int i) const { return actions_.data() + static_cast<std::size_t>(i) * nodes_; }
    double logp_at(int i) const { return logp_[static_cast<std::size_t>(i)]; }
    double value_at(int i) const { return values_[static_cast<std::size_t>(i)]; }
    double advantage_at(int i) const { return advantages_[static_cast<std::size_t>(i)]; }
    double return_at(int i) const { return returns_[static_cast<std::size_t>(i)]; }

  private:
    int capacity_, nodes_, features_;
    int size_ = 0;
    int episode_start_ = 0;
    std::vector<double> obs_;
    std::vector<int> actions_;
    std::vector<double> logp_, rewards_, values_, advantages_, returns_;
};

struct UpdateMetrics {
    double policy_loss = 0.0;
    double vf_loss = 0.0;
    double entropy = 0.0;
    double approx_kl = 0.0;
    double clip_frac = 0.0;
    bool skipped = false;  // non-finite loss/gradients; parameters untouched
};

// Clipped-surrogate loss over one minibatch plus its analytic parameter
// gradient. grad may be null when only the value/diagnostics are needed.
UpdateMetrics ppo_loss(const PolicyNet& net, const RolloutBuffer& buffer,
                       const std::vector<int>& indices, const PpoHyper& hyper,
                       std::vector<double>* grad, double* loss_out = nullptr);

// Gradient-descent state (plain SGD or Adam, per hyper.optimizer).
class Optimizer {
  public:
    Optimizer(std::size_t param_count, const PpoHyper& hyper);
    void step(std::vector<double>& params, const std::vector<double>& grad);

  private:
    PpoHyper hyper_;
    long t_ = 0;
    std::vector<double> m_, v_;
};

struct UpdateResult {
    UpdateMetrics metrics;
    double mean_return = 0.0;
    double mean_r1_sum = 0.0;
    double mean_r2_sum = 0.0;
};

struct TrainCallbacks {
    // called once per update with the curve row already assembled
    std::function<void(long update, long episodes, const UpdateResult&)> on_update;
    // called every hyper.checkpoint_every updates and at the end
    std::function<void(long update, long episodes)> on_checkpoint;
};

// Alternates rollout collection (actors episodes per update) with clipped
// PPO updates. Single-threaded collection; minibatch gradients may fan out
// over hyper.threads with a fixed deterministic partition.
class PpoTrainer {
  public:
    PpoTrainer(PolicyNet& net, const PpoHyper& hyper, RngStreams& streams);

    UpdateResult collect_and_update(Env& env);
    void train(Env& env, long episodes_total, const TrainCallbacks& callbacks);

    const PpoHyper& hyper() const { return hyper_; }

  private:
    UpdateMetrics update(RolloutBuffer& buffer);

    PolicyNet& net_;
    PpoHyper hyper_;
    RngStreams& streams_;
    Optimizer optimizer_;
    PolicyNet::Cache cache_;
};

}  // namespace wsnrl
