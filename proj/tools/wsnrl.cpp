// Experiment driver for the duty-cycle RL stack: training, long-horizon
// evaluation, rule baselines, report generation, and the synthetic solar
// generator. Config keys can be overridden through WSNRL_<SECTION>_<KEY>
// environment variables (e.g. WSNRL_NETWORK_NODE_COUNT=56).
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsnrl/errors.hpp"
#include "wsnrl/harness.hpp"
#include "wsnrl/solar.hpp"

namespace {

wsnrl::SimConfig load_config(const std::string& path) {
    if (path.empty()) {
        wsnrl::SimConfig c;
        c.apply_env_overrides();
        return c;
    }
    return wsnrl::SimConfig::load(path);
}

bool parse_window(const std::string& text, int& start, int& steps) {
    auto comma = text.find(',');
    if (comma == std::string::npos) return false;
    try {
        start = std::stoi(text.substr(0, comma));
        steps = std::stoi(text.substr(comma + 1));
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

void print_metrics(const wsnrl::EvalMetrics& m) {
    std::printf("eval_steps         %d\n", m.eval_steps);
    std::printf("mean_active_count  %.1f\n", m.mean_active_count);
    std::printf("std_active_count   %.1f\n", m.std_active_count);
    std::printf("active_ratio       %.1f %%\n", 100.0 * m.active_ratio);
    std::printf("mean_dt            %.3f %%\n", m.mean_dt_pct);
    std::printf("std_dt             %.3f %%\n", m.std_dt_pct);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wsnrl: solar-harvesting WSN duty-cycle control with PPO"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "train one Table-2 case and evaluate it");
    int train_case = 1;
    std::uint64_t train_seed = 1;
    long train_episodes = 0;
    std::string train_config, train_out = "run";
    bool train_greedy = false, no_adv_norm = false;
    int train_threads = 0;
    train->add_option("--case", train_case, "case id 1..6")->check(CLI::Range(1, 6));
    train->add_option("--seed,-s", train_seed, "master seed");
    train->add_option("--episodes,-e", train_episodes, "episode budget (0 = config value)");
    train->add_option("--config,-c", train_config, "config JSON file");
    train->add_option("--out,-o", train_out, "run directory")->required();
    train->add_flag("--greedy", train_greedy, "evaluate with argmax actions");
    train->add_flag("--no-adv-norm", no_adv_norm, "disable advantage normalization");
    train->add_option("--threads", train_threads, "gradient worker threads (0 = config value)");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint over a window");
    std::string eval_ckpt, eval_window, eval_out = "eval_out", eval_trace;
    bool eval_greedy = false;
    std::uint64_t eval_seed = 1;
    eval->add_option("--checkpoint", eval_ckpt, "checkpoint path")->required();
    eval->add_option("--window", eval_window, "START,STEPS (step indices into the profile)");
    eval->add_flag("--greedy", eval_greedy, "argmax actions instead of sampling");
    eval->add_option("--seed,-s", eval_seed, "seed for link/noise draws");
    eval->add_option("--out,-o", eval_out, "output directory");
    eval->add_option("--trace", eval_trace, "write per-step log CSV to this path");

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a rule baseline policy");
    std::string sim_policy = "all_active", sim_config, sim_out = "sim_out", sim_window, sim_trace;
    double sim_fraction = 0.5;
    std::uint64_t sim_seed = 1;
    sim->add_option("--policy", sim_policy, "all_active | round_robin | greedy_battery")
        ->required();
    sim->add_option("--fraction", sim_fraction, "active fraction for rotating/greedy baselines");
    sim->add_option("--config,-c", sim_config, "config JSON file");
    sim->add_option("--window", sim_window, "START,STEPS");
    sim->add_option("--seed,-s", sim_seed, "master seed");
    sim->add_option("--out,-o", sim_out, "output directory");
    sim->add_option("--trace", sim_trace, "write per-step log CSV to this path");

    // report
    auto* rep = app.add_subcommand("report", "comparison table across run directories");
    std::vector<std::string> rep_dirs;
    std::string rep_out;
    rep->add_option("dirs", rep_dirs, "run directories")->required();
    rep->add_option("--out,-o", rep_out, "write table to FILE and tidy CSV to FILE.csv");

    // synth-solar
    auto* synth = app.add_subcommand("synth-solar", "generate a synthetic solar CSV");
    int synth_days = 365;
    double synth_watts = 3.0, synth_cloud = 0.35, synth_lat = 1.0, synth_dt = 0.5;
    std::uint64_t synth_seed = 7;
    std::string synth_out;
    synth->add_option("--days,-d", synth_days, "days to generate")->required();
    synth->add_option("--out,-o", synth_out, "output CSV path")->required();
    synth->add_option("--panel-watts", synth_watts, "panel rating in watts");
    synth->add_option("--cloud-sigma", synth_cloud, "lognormal cloud noise scale (0 = clear)");
    synth->add_option("--latitude-factor", synth_lat, "amplitude derating");
    synth->add_option("--seed,-s", synth_seed, "cloud noise seed");
    synth->add_option("--delta-t", synth_dt, "output resolution in hours");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            wsnrl::SimConfig config = load_config(train_config);
            if (no_adv_norm) config.ppo.adv_norm = false;
            if (train_threads > 0) config.ppo.threads = train_threads;
            wsnrl::CaseSpec spec = wsnrl::CaseSpec::from_id(train_case);
            wsnrl::EvalMetrics m = wsnrl::run_case(spec, config, train_episodes, train_seed,
                                                   train_out, train_greedy);
            std::printf("run %s complete\n", train_out.c_str());
            print_metrics(m);
        } else if (*eval) {
            int start = 0, steps = 0;
            if (!eval_window.empty() && !parse_window(eval_window, start, steps))
                throw wsnrl::ConfigError("--window expects START,STEPS");
            wsnrl::EvalMetrics m = wsnrl::evaluate_checkpoint(eval_ckpt, start, steps,
                                                              eval_greedy, eval_seed, eval_out,
                                                              eval_trace);
            print_metrics(m);
        } else if (*sim) {
            wsnrl::SimConfig config = load_config(sim_config);
            int start = 0, steps = 0;
            if (!sim_window.empty() && !parse_window(sim_window, start, steps))
                throw wsnrl::ConfigError("--window expects START,STEPS");
            wsnrl::EvalMetrics m = wsnrl::simulate_baseline(sim_policy, config, sim_fraction,
                                                            start, steps, sim_seed, sim_out,
                                                            sim_trace);
            print_metrics(m);
        } else if (*rep) {
            auto runs = wsnrl::collect_runs(rep_dirs);
            std::string table = wsnrl::report_table(runs);
            if (rep_out.empty()) {
                std::fputs(table.c_str(), stdout);
            } else {
                std::ofstream out(rep_out);
                out << table;
                std::ofstream csv(rep_out + ".csv");
                csv << wsnrl::report_tidy_csv(runs);
            }
        } else if (*synth) {
            wsnrl::SolarProfile p = wsnrl::synth_solar(synth_days, synth_watts, synth_lat,
                                                       synth_seed, synth_cloud, synth_dt);
            wsnrl::write_solar_csv(p, synth_out);
            std::printf("wrote %d steps to %s\n", p.size(), synth_out.c_str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
