#include "wsnrl/harness.hpp"

#include <array>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wsnrl/errors.hpp"
#include "wsnrl/kernels.hpp"
#include "wsnrl/ppo.hpp"
#include "wsnrl/util.hpp"

namespace wsnrl {

namespace fs = std::filesystem;
using nlohmann::json;

std::string EvalMetrics::to_json_string() const {
    json j;
    j["eval_steps"] = eval_steps;
    j["per_node_active_steps"] = per_node_active_steps;
    j["mean_active_count"] = mean_active_count;
    j["std_active_count"] = std_active_count;
    j["active_ratio"] = active_ratio;
    j["mean_dt_pct"] = mean_dt_pct;
    j["std_dt_pct"] = std_dt_pct;
    return j.dump(2) + "\n";
}

EvalMetrics EvalMetrics::from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw DataError("metrics file is not valid JSON");
    EvalMetrics m;
    m.eval_steps = j.at("eval_steps").get<int>();
    m.per_node_active_steps = j.at("per_node_active_steps").get<std::vector<long>>();
    m.mean_active_count = j.at("mean_active_count").get<double>();
    m.std_active_count = j.at("std_active_count").get<double>();
    m.active_ratio = j.at("active_ratio").get<double>();
    m.mean_dt_pct = j.at("mean_dt_pct").get<double>();
    m.std_dt_pct = j.at("std_dt_pct").get<double>();
    return m;
}

Topology build_topology(const SimConfig& config) {
    if (!config.topology.coordinates_file.empty())
        return load_topology(config.topology.coordinates_file, config.topology);
    return generate_topology(config.network.node_count, config.topology.span_length_m,
                             config.topology);
}

SolarProfile build_solar(const SimConfig& config, std::vector<std::string>* warnings) {
    SolarProfile profile;
    if (config.solar.source == "csv_file")
        profile = load_solar_csv(config.solar.csv_path, config.network.delta_t_hours, warnings);
    else
        profile = synth_solar(config.solar.days, config.solar.panel_watts,
                              config.solar.latitude_factor, config.solar.cloud_seed,
                              config.solar.cloud_sigma, config.network.delta_t_hours);
    if (profile.size() < config.solar.eval_window_hi)
        throw ConfigError("solar profile has " + std::to_string(profile.size()) +
                          " steps but the eval window ends at step " +
                          std::to_string(config.solar.eval_window_hi));
    return profile;
}

namespace {

std::string mode_string(const std::vector<NodeState>& states) {
    std::string s;
    s.reserve(states.size());
    for (const NodeState& st : states) s.push_back(static_cast<char>('0' + static_cast<int>(st.mode)));
    return s;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << text;
}

}  // namespace

EvalMetrics evaluate_policy(Policy& policy, WsnEnv& env, const RunPaths* paths,
                            const std::string& trace_path) {
    const int n = env.node_count();
    const int gw = env.topology().gateway_index;
    const bool gw_participates = env.config().network.gateway_participates;
    const int steps = env.steps_per_episode();

    std::vector<long> utility_steps(static_cast<std::size_t>(n), 0);
    std::vector<std::array<long, 3>> mode_steps(static_cast<std::size_t>(n), {0, 0, 0});
    std::ostringstream timeseries;
    timeseries << "t,active_count,e_mu_mwh,r1,r2,reward\n";
    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw DataError("cannot open trace file: " + trace_path);
        trace << "t,active_count,r1,r2,reward,e_mu_mwh,modes\n";
    }

    const double threshold = env.config().network.active_count_threshold_mwh;
    char buf[256];
    env.set_trace([&](int t, const StepInfo& info, double reward,
                      const std::vector<NodeState>& states,
                      const std::vector<std::uint8_t>& links) {
        for (int i = 0; i < n; ++i) {
            const NodeState& s = states[static_cast<std::size_t>(i)];
            ++mode_steps[static_cast<std::size_t>(i)][static_cast<std::size_t>(s.mode)];
            if (s.mode == Mode::active && s.battery > threshold && links[static_cast<std::size_t>(i)])
                ++utility_steps[static_cast<std::size_t>(i)];
        }
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6f,%.9f,%.9f,%.9f\n", t, info.active_count,
                      info.e_mu, info.r1, info.r2, reward);
        timeseries << buf;
        if (trace.is_open()) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.9f,%.9f,%.9f,%.6f,", t, info.active_count,
                          info.r1, info.r2, reward, info.e_mu);
            trace << buf << mode_string(states) << "\n";
        }
    });

    Observation obs = env.reset();
    policy.begin_episode();
    double total_reward = 0.0;
    for (int t = 0; t < steps; ++t) {
        StepResult r = env.step(policy.act(obs));
        total_reward += r.reward;
        obs = std::move(r.observation);
    }
    env.set_trace(nullptr);

    EvalMetrics m;
    m.eval_steps = steps;
    std::vector<double> active_counts, dts;
    for (int i = 0; i < n; ++i) {
        if (i == gw && !gw_participates) continue;
        m.per_node_active_steps.push_back(utility_steps[static_cast<std::size_t>(i)]);
        active_counts.push_back(static_cast<double>(utility_steps[static_cast<std::size_t>(i)]));
        dts.push_back(env.node_states()[static_cast<std::size_t>(i)].degradation);
    }
    m.mean_active_count = mean(active_counts);
    m.std_active_count = pop_std(active_counts);
    m.active_ratio = m.mean_active_count / steps;
    m.mean_dt_pct = mean(dts);
    m.std_dt_pct = pop_std(dts);

    if (paths != nullptr) {
        std::ostringstream per_node;
        per_node << "node,x_m,y_m,is_gateway,active_steps,idle_steps,sleep_steps,"
                    "utility_steps,final_dt_pct\n";
        for (int i = 0; i < n; ++i) {
            const auto& ms = mode_steps[static_cast<std::size_t>(i)];
            std::snprintf(buf, sizeof(buf), "%d,%.3f,%.3f,%d,%ld,%ld,%ld,%ld,%.9f\n", i,
                          env.topology().positions[static_cast<std::size_t>(i)][0],
                          env.topology().positions[static_cast<std::size_t>(i)][1],
                          i == gw ? 1 : 0, ms[0], ms[1], ms[2],
                          utility_steps[static_cast<std::size_t>(i)],
                          env.node_states()[static_cast<std::size_t>(i)].degradation);
            per_node << buf;
        }
        write_text(paths->eval_per_node(), per_node.str());
        write_text(paths->eval_timeseries(), timeseries.str());
        write_text(paths->metrics(), m.to_json_string());
    }
    return m;
}

EvalMetrics run_case(const CaseSpec& spec, SimConfig config, long episodes, std::uint64_t seed,
                     const std::string& out_dir, bool greedy_eval) {
    config.apply_case(spec);
    if (episodes > 0) config.ppo.episodes_total = episodes;
    config.validate();

    Topology topo = build_topology(config);
    SolarProfile profile = build_solar(config);  // fails before any training starts

    RunPaths paths{out_dir};
    fs::create_directories(paths.checkpoints());
    write_text(paths.resolved_config(), config.to_json_string());

    json meta;
    meta["case_id"] = spec.case_id;
    meta["seed"] = seed;
    meta["episodes"] = config.ppo.episodes_total;
    meta["optimizer"] = config.ppo.optimizer;
    meta["adv_norm"] = config.ppo.adv_norm;
    meta["threads"] = config.ppo.threads;
    meta["kernels"] = kernels::backend_name(kernels::active_backend());
    meta["greedy_eval"] = greedy_eval;
    meta["feature_size"] = config.agent.resolved_feature_size(config.network.node_count);
    meta["conv_layers"] = config.agent.conv_layers;
    write_text(paths.run_meta(), meta.dump(2) + "\n");

    WsnEnv env(config, topo, profile, WsnEnv::RunMode::train, seed);
    RngStreams streams(seed);
    PolicyNet net = make_policy(config.observation_features(), config.agent,
                                config.network.node_count, streams.policy);
    PpoTrainer trainer(net, config.ppo, streams);

    std::ofstream curve(paths.curve());
    if (!curve) throw DataError("cannot open curve file: " + paths.curve());
    curve << "update,episodes,mean_return,r1_sum,r2_sum,policy_loss,vf_loss,entropy,"
             "approx_kl,clip_frac\n";
    char buf[512];

    TrainCallbacks callbacks;
    callbacks.on_update = [&](long update, long eps, const UpdateResult& r) {
        std::snprintf(buf, sizeof(buf),
                      "%ld,%ld,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n", update, eps,
                      r.mean_return, r.mean_r1_sum, r.mean_r2_sum, r.metrics.policy_loss,
                      r.metrics.vf_loss, r.metrics.entropy, r.metrics.approx_kl,
                      r.metrics.clip_frac);
        curve << buf;
        curve.flush();
    };
    callbacks.on_checkpoint = [&](long update, long eps) {
        Checkpoint c = make_checkpoint(net, config, config.network.node_count, update, eps, streams);
        save_checkpoint(c, paths.checkpoints() + "/ckpt_" + std::to_string(update) + ".json");
        save_checkpoint(c, paths.final_checkpoint());
    };

    trainer.train(env, config.ppo.episodes_total, callbacks);

    WsnEnv eval_env(config, topo, profile, WsnEnv::RunMode::eval, seed);
    NetworkPolicy policy(net, greedy_eval, RngStreams::derive(seed, "eval_actions"));
    return evaluate_policy(policy, eval_env, &paths);
}

EvalMetrics evaluate_checkpoint(const std::string& checkpoint_path, int window_start,
                                int window_steps, bool greedy, std::uint64_t seed,
                                const std::string& out_dir, const std::string& trace_path) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    SimConfig config = ckpt.config;
    config.validate();
    Topology topo = build_topology(config);
    if (topo.node_count() != ckpt.node_count)
        throw ShapeError("checkpoint was trained with " + std::to_string(ckpt.node_count) +
                         " nodes but the config builds " + std::to_string(topo.node_count()));
    if (config.observation_features() != ckpt.obs_features)
        throw ShapeError("checkpoint expects " + std::to_string(ckpt.obs_features) +
                         "-feature observations but the config produces " +
                         std::to_string(config.observation_features()));
    SolarProfile profile = build_solar(config);

    WsnEnv env(config, topo, profile, WsnEnv::RunMode::eval, seed);
    if (window_steps > 0) env.set_eval_window(window_start, window_steps);

    RunPaths paths{out_dir};
    fs::create_directories(out_dir);
    write_text(paths.resolved_config(), config.to_json_string());
    NetworkPolicy policy(ckpt.restore_network(), greedy,
                         RngStreams::derive(seed, "eval_actions"));
    return evaluate_policy(policy, env, &paths, trace_path);
}

EvalMetrics simulate_baseline(const std::string& policy_name, SimConfig config, double fraction,
                              int window_start, int window_steps, std::uint64_t seed,
                              const std::string& out_dir, const std::string& trace_path) {
    config.validate();
    Topology topo = build_topology(config);
    SolarProfile profile = build_solar(config);
    WsnEnv env(config, topo, profile, WsnEnv::RunMode::eval, seed);
    if (window_steps > 0) env.set_eval_window(window_start, window_steps);

    RunPaths paths{out_dir};
    fs::create_directories(out_dir);
    write_text(paths.resolved_config(), config.to_json_string());
    json meta;
    meta["policy"] = policy_name;
    meta["fraction"] = fraction;
    meta["seed"] = seed;
    write_text(paths.run_meta(), meta.dump(2) + "\n");
    auto policy = make_baseline_policy(policy_name, config, fraction);
    return evaluate_policy(*policy, env, &paths, trace_path);
}

std::vector<RunSummary> collect_runs(const std::vector<std::string>& dirs) {
    std::vector<RunSummary> runs;
    for (const std::string& dir : dirs) {
        RunSummary r;
        r.dir = dir;
        RunPaths paths{dir};
        std::ifstream meta_in(paths.run_meta());
        if (meta_in) {
            json meta = json::parse(meta_in, nullptr, false);
            if (!meta.is_discarded()) {
                r.case_id = meta.value("case_id", 0);
                r.seed = meta.value("seed", 0L);
                r.episodes = meta.value("episodes", 0L);
                r.optimizer = meta.value("optimizer", std::string());
            }
        }
        std::ifstream metrics_in(paths.metrics());
        if (metrics_in) {
            std::stringstream ss;
            ss << metrics_in.rdbuf();
            try {
                r.metrics = EvalMetrics::from_json_string(ss.str());
                r.complete = true;
            } catch (const DataError&) {
                r.complete = false;
            }
        }
        runs.push_back(std::move(r));
    }
    return runs;
}

std::string report_table(const std::vector<RunSummary>& runs) {
    std::ostringstream out;
    out << "run_dir                                  case  seed  mean_active  std_active  "
           "ratio_pct  mean_dt_pct  std_dt_pct\n";
    char buf[256];
    for (const RunSummary& r : runs) {
        std::string name = r.dir;
        if (name.size() > 40) name = "..." + name.substr(name.size() - 37);
        if (!r.complete) {
            std::snprintf(buf, sizeof(buf), "%-40s  %4d  %4ld  incomplete\n", name.c_str(),
                          r.case_id, r.seed);
            out << buf;
            continue;
        }
        std::snprintf(buf, sizeof(buf), "%-40s  %4d  %4ld  %11.1f  %10.1f  %9.1f  %11.3f  %10.3f\n",
                      name.c_str(), r.case_id, r.seed, r.metrics.mean_active_count,
                      r.metrics.std_active_count, 100.0 * r.metrics.active_ratio,
                      r.metrics.mean_dt_pct, r.metrics.std_dt_pct);
        out << buf;
    }
    return out.str();
}

std::string report_tidy_csv(const std::vector<RunSummary>& runs) {
    std::ostringstream out;
    out << "run_dir,case,seed,metric,value\n";
    char buf[256];
    for (const RunSummary& r : runs) {
        if (!r.complete) {
            out << r.dir << ',' << r.case_id << ',' << r.seed << ",status,incomplete\n";
            continue;
        }
        auto row = [&](const char* metric, double value) {
            std::snprintf(buf, sizeof(buf), "%s,%d,%ld,%s,%.9f\n", r.dir.c_str(), r.case_id,
                          r.seed, metric, value);
            out << buf;
        };
        row("mean_active_count", r.metrics.mean_active_count);
        row("std_active_count", r.metrics.std_active_count);
        row("active_ratio", r.metrics.active_ratio);
        row("mean_dt_pct", r.metrics.mean_dt_pct);
        row("std_dt_pct", r.metrics.std_dt_pct);
    }
    return out.str();
}

}  // namespace wsnrl
