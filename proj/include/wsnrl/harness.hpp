#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wsnrl/checkpoint.hpp"
#include "wsnrl/config.hpp"
#include "wsnrl/env.hpp"
#include "wsnrl/policies.hpp"

namespace wsnrl {

// Long-horizon evaluation summary over the participating (non-gateway)
// nodes. "Active" for a node-step means it counted toward C_a: effective
// mode Active, battery above the eligibility threshold, link up.
struct EvalMetrics {
    int eval_steps = 0;
    std::vector<long> per_node_active_steps;
    double mean_active_count = 0.0;  // mean over nodes of per-node active-step totals
    double std_active_count = 0.0;   // population std over nodes
    double active_ratio = 0.0;       // mean_active_count / eval_steps
    double mean_dt_pct = 0.0;
    double std_dt_pct = 0.0;

    std::string to_json_string() const;
    static EvalMetrics from_json_string(const std::string& text);
};

struct RunPaths {
    std::string dir;
    std::string resolved_config() const { return dir + "/resolved_config.json"; }
    std::string run_meta() const { return dir + "/run_meta.json"; }
    std::string curve() const { return dir + "/curve.csv"; }
    std::string metrics() const { return dir + "/metrics.json"; }
    std::string eval_per_node() const { return dir + "/eval_per_node.csv"; }
    std::string eval_timeseries() const { return dir + "/eval_timeseries.csv"; }
    std::string checkpoints() const { return dir + "/checkpoints"; }
    std::string final_checkpoint() const { return dir + "/checkpoints/ckpt_final.json"; }
};

// Builds topology and solar profile from the config (generated layout or
// coordinate file; synthetic generator or CSV).
Topology build_topology(const SimConfig& config);
SolarProfile build_solar(const SimConfig& config, std::vector<std::string>* warnings = nullptr);

// Rolls a policy over the environment's evaluation window, writes the
// per-node summary CSV and the active-count/E_mu time-series CSV, and
// returns the metrics. Optional step-log path enables the --trace schema.
EvalMetrics evaluate_policy(Policy& policy, WsnEnv& env, const RunPaths* paths,
                            const std::string& trace_path = "");

// Trains one Table-2 case and evaluates the final checkpoint over the
// configured eval window. Writes the full run directory and returns the
// metrics. seed drives everything; episodes overrides config when > 0.
EvalMetrics run_case(const CaseSpec& spec, SimConfig config, long episodes, std::uint64_t seed,
                     const std::string& out_dir, bool greedy_eval = false);

// Loads a checkpoint and evaluates it; window (start, steps) overrides the
// config's eval window when steps > 0.
EvalMetrics evaluate_checkpoint(const std::string& checkpoint_path, int window_start,
                                int window_steps, bool greedy, std::uint64_t seed,
                                const std::string& out_dir, const std::string& trace_path = "");

// Runs a rule baseline through the same evaluation path.
EvalMetrics simulate_baseline(const std::string& policy_name, SimConfig config, double fraction,
                              int window_start, int window_steps, std::uint64_t seed,
                              const std::string& out_dir, const std::string& trace_path = "");

struct RunSummary {
    std::string dir;
    bool complete = false;
    int case_id = 0;
    long seed = 0;
    long episodes = 0;
    std::string optimizer;
    EvalMetrics metrics;
};

std::vector<RunSummary> collect_runs(const std::vector<std::string>& dirs);
// Table-4-shaped comparison; deterministic formatting (byte-identical for
// identical inputs).
std::string report_table(const std::vector<RunSummary>& runs);
std::string report_tidy_csv(const std::vector<RunSummary>& runs);

}  // namespace wsnrl
