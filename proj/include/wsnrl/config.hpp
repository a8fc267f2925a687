#pragma once

#include <cstdint>
#include <string>

namespace wsnrl {

// Network-wide physical constants. Defaults are the Xnode/Jindo values:
// Table-1 power draws, 3000 mAh x 3.7 V battery, the 825.5/400 mWh reserve
// thresholds, reward scales 6/0.05, link model r0=1 km beta=eta=1, field
// sigma=0.01 l0=5, degradation constants A=3351 B=-1.689.
struct NetworkConfig {
    int node_count = 16;
    double delta_t_hours = 3.0;
    int steps_per_episode = 240;
    double battery_capacity_mwh = 11100.0;
    double power_active_mw = 425.5;
    double power_idle_mw = 170.2;
    double power_sleep_mw = 0.4;
    double active_count_threshold_mwh = 825.5;
    double min_reserve_mwh = 400.0;
    double alpha1 = 6.0;
    double alpha2 = 0.05;
    double r0_m = 1000.0;
    double beta = 1.0;
    double eta = 1.0;
    double sigma = 0.01;
    double l0 = 5.0;
    double deg_a = 3351.0;
    double deg_b = -1.689;
    bool gateway_participates = false;

    void validate() const;  // throws ConfigError
};

struct TopologyConfig {
    double span_length_m = 484.0;  // 344 m main span + two 70 m side spans
    double deck_width_m = 20.0;
    int grid_rows = 4;
    int grid_cols = 30;
    std::string coordinates_file;  // optional "x,y" per line; empty = generated layout
    int gateway_index = 0;
    bool strict_paper_sizes = false;  // restrict generated layouts to 16/56/112

    void validate() const;
};

struct SolarConfig {
    std::string source = "synthetic";  // "synthetic" | "csv_file"
    std::string csv_path;
    int days = 760;
    double panel_watts = 3.0;
    double latitude_factor = 1.0;
    double cloud_sigma = 0.35;
    std::uint64_t cloud_seed = 7;
    // step index ranges [lo, hi) into the resampled profile
    int train_window_lo = 0;
    int train_window_hi = 3200;
    int eval_window_lo = 3200;
    int eval_window_hi = 6080;

    void validate() const;
};

struct AgentConfig {
    int feature_size = 0;  // 0 = smallest power of two >= node_count
    int conv_layers = 8;
    double leaky_slope = 0.01;

    int resolved_feature_size(int node_count) const;
    void validate() const;
};

// PPO hyperparameters. Paper values: clip 0.2, value clip 0.5, GAE lambda
// 0.95, no discount (gamma 1), lr 3e-5, batch 960 = 4 episodes x 240 steps.
struct PpoHyper {
    double clip_eps = 0.2;
    double vf_clip = 0.5;
    double gae_lambda = 0.95;
    double gamma = 1.0;
    double learning_rate = 3e-5;
    double c1 = 0.5;   // value loss coefficient
    double c2 = 0.0;   // entropy coefficient
    int epochs_per_update = 10;
    int minibatch_size = 240;
    int actors = 4;
    long episodes_total = 20000;
    bool adv_norm = true;
    std::string optimizer = "adam";  // "adam" | "sgd"
    int threads = 1;
    int checkpoint_every = 100;  // updates

    void validate() const;
};

struct CaseFlags {
    bool degradation_in_state = true;
    bool degradation_in_reward = true;
};

// Table-2 scenario: case ids 1..6 pair network sizes 16/56/112 with the
// degradation-aware and degradation-blind state/reward configurations.
struct CaseSpec {
    int case_id = 1;
    int node_count = 16;
    CaseFlags flags;

    static CaseSpec from_id(int case_id);  // throws ConfigError for ids outside 1..6
};

struct SimConfig {
    NetworkConfig network;
    TopologyConfig topology;
    SolarConfig solar;
    AgentConfig agent;
    PpoHyper ppo;
    CaseFlags case_flags;

    void validate() const;
    void apply_case(const CaseSpec& spec);

    std::string to_json_string() const;       // pretty, stable key order
    static SimConfig from_json_string(const std::string& text);

    void save(const std::string& path) const;
    static SimConfig load(const std::string& path);  // file + WSNRL_ env overrides
    void apply_env_overrides();                      // WSNRL_<SECTION>_<KEY>

    std::uint64_t hash() const;  // FNV-1a of the canonical JSON dump

    int observation_features() const { return case_flags.degradation_in_state ? 4 : 3; }
};

}  // namespace wsnrl
