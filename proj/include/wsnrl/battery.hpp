#pragma once

#include <algorithm>

#include "wsnrl/config.hpp"
#include "wsnrl/errors.hpp"

namespace wsnrl {

enum class Mode : int { active = 0, idle = 1, sleep = 2 };

// Per-node state vector: battery reserve, mode, one-step battery delta,
// accumulated degradation (percent).
struct NodeState {
    double battery = 0.0;
    Mode mode = Mode::idle;
    double delta = 0.0;
    double degradation = 0.0;
};

// Energy drawn over one step in the given mode: P * delta_t.
inline double consumption(Mode mode, const NetworkConfig& cfg) {
    switch (mode) {
        case Mode::active: return cfg.power_active_mw * cfg.delta_t_hours;
        case Mode::idle: return cfg.power_idle_mw * cfg.delta_t_hours;
        case Mode::sleep: return cfg.power_sleep_mw * cfg.delta_t_hours;
    }
    throw StateError("invalid mode");
}

struct BatteryStep {
    double new_battery = 0.0;
    double delta = 0.0;
    bool forced_sleep = false;  // unclamped balance fell below min_reserve
};

// Battery balance update with capacity clamps. The forced-sleep flag tells
// the environment to override the node's next effective mode.
inline BatteryStep battery_step(double battery, double harvested, Mode effective_mode,
                                const NetworkConfig& cfg) {
    double unclamped = battery + harvested - consumption(effective_mode, cfg);
    BatteryStep r;
    r.new_battery = std::clamp(unclamped, 0.0, cfg.battery_capacity_mwh);
    r.delta = r.new_battery - battery;
    r.forced_sleep = unclamped < cfg.min_reserve_mwh;
    return r;
}

}  // namespace wsnrl
