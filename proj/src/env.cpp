#include "wsnrl/env.hpp"

#include <algorithm>
#include <cmath>

#include "wsnrl/errors.hpp"
#include "wsnrl/util.hpp"

namespace wsnrl {

WsnEnv::WsnEnv(const SimConfig& config, Topology topology, SolarProfile profile, RunMode mode,
               std::uint64_t master_seed)
    : config_(config),
      topology_(std::move(topology)),
      profile_(std::move(profile)),
      mode_(mode),
      streams_(master_seed),
      sampler_(topology_.grid_rows, topology_.grid_cols, config.network.sigma, config.network.l0),
      link_model_{config.network.r0_m, config.network.beta, config.network.eta} {
    config_.validate();
    if (topology_.node_count() != config_.network.node_count)
        throw ConfigError("topology has " + std::to_string(topology_.node_count()) +
                          " nodes but config expects " +
                          std::to_string(config_.network.node_count));
    eval_start_ = config_.solar.eval_window_lo;
    eval_steps_ = config_.solar.eval_window_hi - config_.solar.eval_window_lo;
    episode_steps_ = mode_ == RunMode::train ? config_.network.steps_per_episode : eval_steps_;

    const int n = topology_.node_count();
    states_.resize(static_cast<std::size_t>(n));
    forced_sleep_.assign(static_cast<std::size_t>(n), 0);
    deg_.assign(static_cast<std::size_t>(n),
                OnlineDegradation(config_.network.deg_a, config_.network.deg_b));

    if (mode_ == RunMode::train) {
        int lo = config_.solar.train_window_lo;
        int hi = std::min(config_.solar.train_window_hi, profile_.size());
        if (hi - lo < episode_steps_)
            throw ConfigError("solar profile train range has " + std::to_string(hi - lo) +
                              " steps; an episode needs " + std::to_string(episode_steps_));
    } else {
        set_eval_window(eval_start_, eval_steps_);
    }
}

void WsnEnv::set_eval_window(int start, int steps) {
    if (steps < 1) throw ConfigError("evaluation window must contain at least one step");
    if (start < 0 || start + steps > profile_.size())
        throw ConfigError("evaluation window [" + std::to_string(start) + ", " +
                          std::to_string(start + steps) + ") exceeds profile length " +
                          std::to_string(profile_.size()));
    eval_start_ = start;
    eval_steps_ = steps;
    if (mode_ == RunMode::eval) episode_steps_ = steps;
}

Observation WsnEnv::make_observation() const {
    Observation obs;
    obs.nodes = topology_.node_count();
    obs.features = config_.observation_features();
    obs.data.resize(static_cast<std::size_t>(obs.nodes) * obs.features);
    const double bmax = config_.network.battery_capacity_mwh;
    for (int i = 0; i < obs.nodes; ++i) {
        double* row = obs.data.data() + static_cast<std::size_t>(i) * obs.features;
        const NodeState& s = states_[static_cast<std::size_t>(i)];
        row[0] = s.battery / bmax;
        row[1] = static_cast<double>(static_cast<int>(s.mode)) / 2.0;
        row[2] = s.delta / bmax;
        if (obs.features == 4) row[3] = s.degradation / 100.0;
    }
    return obs;
}

Observation WsnEnv::reset() {
    if (mode_ == RunMode::train) {
        int lo = config_.solar.train_window_lo;
        int hi = std::min(config_.solar.train_window_hi, profile_.size());
        std::uniform_int_distribution<int> pick(lo, hi - episode_steps_);
        window_start_ = pick(streams_.env);
    } else {
        window_start_ = eval_start_;
    }

    field_ = sampler_.sample(streams_.field);

    const double bmax = config_.network.battery_capacity_mwh;
    const bool gw_active = !config_.network.gateway_participates;
    for (int i = 0; i < topology_.node_count(); ++i) {
        NodeState& s = states_[static_cast<std::size_t>(i)];
        s.battery = bmax;
        s.mode = (gw_active && i == topology_.gateway_index) ? Mode::active : Mode::idle;
        s.delta = 0.0;
        s.degradation = 0.0;
        forced_sleep_[static_cast<std::size_t>(i)] = 0;
        deg_[static_cast<std::size_t>(i)].reset();
        deg_[static_cast<std::size_t>(i)].push(1.0);  // full-charge start
    }
    step_index_ = 0;
    done_ = false;
    return make_observation();
}

double WsnEnv::participant_dt_max() const {
    double best = 0.0;
    for (int i = 0; i < topology_.node_count(); ++i) {
        if (!config_.network.gateway_participates && i == topology_.gateway_index) continue;
        best = std::max(best, states_[static_cast<std::size_t>(i)].degradation);
    }
    return best;
}

StepResult WsnEnv::step(const ActionVector& action) {
    if (done_) throw StateError("step() called on a finished episode; call reset() first");
    if (static_cast<int>(action.commands.size()) != topology_.node_count())
        throw ShapeError("action vector has " + std::to_string(action.commands.size()) +
                         " commands for " + std::to_string(topology_.node_count()) + " nodes");
    for (int c : action.commands)
        if (c < 0 || c > 2) throw ShapeError("mode command must be 0, 1 or 2");

    const NetworkConfig& net = config_.network;
    const int n = topology_.node_count();
    const int gw = topology_.gateway_index;
    const bool gw_participates = net.gateway_participates;
    const double bmax = net.battery_capacity_mwh;
    const int t_abs = window_start_ + step_index_;
    const double e_mu = profile_.baseline_energy[static_cast<std::size_t>(t_abs)];

    // (1) link outcomes for this step
    std::vector<std::uint8_t> links = sample_links(link_model_, topology_, streams_.comms);
    std::vector<double> harvest = harvested_energy(profile_, field_, topology_, t_abs);

    StepInfo info;
    info.e_mu = e_mu;
    for (int i = 0; i < n; ++i)
        if (i != gw && links[static_cast<std::size_t>(i)]) ++info.comm_successes;

    // (2)-(5) effective modes, consumption, harvest, clamped balance
    for (int i = 0; i < n; ++i) {
        NodeState& s = states_[static_cast<std::size_t>(i)];
        Mode effective;
        if (i == gw && !gw_participates) {
            effective = Mode::active;  // controller is always powered and active
        } else {
            effective = links[static_cast<std::size_t>(i)]
                            ? static_cast<Mode>(action.commands[static_cast<std::size_t>(i)])
                            : s.mode;
            if (forced_sleep_[static_cast<std::size_t>(i)]) effective = Mode::sleep;  // (3)
        }

        if (i == gw && !gw_participates) {
            s.mode = Mode::active;
            s.delta = 0.0;  // externally powered: reserve pinned at capacity
        } else {
            BatteryStep b = battery_step(s.battery, harvest[static_cast<std::size_t>(i)],
                                         effective, net);
            s.battery = b.new_battery;
            s.delta = b.delta;
            s.mode = effective;
            if (b.forced_sleep) {
                forced_sleep_[static_cast<std::size_t>(i)] = 1;
            } else if (forced_sleep_[static_cast<std::size_t>(i)] &&
                       s.battery >= net.active_count_threshold_mwh) {
                forced_sleep_[static_cast<std::size_t>(i)] = 0;  // hysteresis release
            }
        }

        // (6) state-of-charge trace and online degradation
        deg_[static_cast<std::size_t>(i)].push(s.battery / bmax);
        s.degradation = deg_[static_cast<std::size_t>(i)].value();
    }

    for (std::uint8_t f : forced_sleep_) info.forced_sleeps += f;

    // (7) system utility count over participating nodes, end-of-step snapshot
    int participants = 0;
    for (int i = 0; i < n; ++i) {
        if (i == gw && !gw_participates) continue;
        ++participants;
        const NodeState& s = states_[static_cast<std::size_t>(i)];
        if (s.mode == Mode::active && s.battery > net.active_count_threshold_mwh &&
            links[static_cast<std::size_t>(i)])
            ++info.active_count;
    }

    // (8) reward
    info.r1 = static_cast<double>(info.active_count) /
              (static_cast<double>(participants) * episode_steps_);
    double dt_max = participant_dt_max();
    if (dt_max > 0.0) {
        std::vector<double> normalized;
        normalized.reserve(static_cast<std::size_t>(participants));
        for (int i = 0; i < n; ++i) {
            if (i == gw && !gw_participates) continue;
            normalized.push_back(states_[static_cast<std::size_t>(i)].degradation / dt_max);
        }
        info.r2 = pop_std(normalized);
    }
    double reward = net.alpha1 * info.r1;
    if (config_.case_flags.degradation_in_reward) reward -= net.alpha2 * info.r2;

    ++step_index_;
    done_ = step_index_ >= episode_steps_;

    if (trace_) trace_(step_index_ - 1, info, reward, states_, links);

    StepResult result;
    result.observation = make_observation();
    result.reward = reward;
    result.done = done_;
    result.info = info;
    return result;
}

}  // namespace wsnrl
