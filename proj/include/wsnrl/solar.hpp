#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsnrl/random_field.hpp"
#include "wsnrl/topology.hpp"

namespace wsnrl {

// Baseline harvested-energy series for the whole network, one entry per
// delta_t step. Raw inputs (CSV or the synthesizer) are 30-minute samples
// resampled by summation.
struct SolarProfile {
    enum class Source { csv_file, synthetic };

    std::vector<std::int64_t> timestamps;    // bin start, epoch seconds
    std::vector<double> baseline_energy;     // mWh per step
    Source source = Source::synthetic;
    double delta_t_hours = 3.0;

    int size() const { return static_cast<int>(baseline_energy.size()); }
};

// CSV schema: header "timestamp,energy_mwh", ISO-8601 timestamps, strictly
// increasing. Gaps become zero-energy bins and are reported in *warnings.
SolarProfile load_solar_csv(const std::string& path, double delta_t_hours,
                            std::vector<std::string>* warnings = nullptr);

// Half-sine daylight profile (06:00-18:00) scaled by the panel rating, with
// multiplicative mean-one lognormal cloud noise (cloud_sigma = 0 gives a
// clear sky). Instantaneous power is capped at the panel rating.
SolarProfile synth_solar(int days, double panel_watts, double latitude_factor,
                         std::uint64_t cloud_seed, double cloud_sigma = 0.35,
                         double delta_t_hours = 3.0);

void write_solar_csv(const SolarProfile& profile, const std::string& path);

// Per-node harvested energy at step t_k: E_h_i = E_mu(t_k) * (1 + Y_i),
// floored at zero, with Y_i read from the node's field cell. Throws
// DataError when t_k is outside the profile.
std::vector<double> harvested_energy(const SolarProfile& profile, const RandomFieldSample& field,
                                     const Topology& topology, int t_k);

std::int64_t parse_iso8601(const std::string& text);  // throws DataError
std::string format_iso8601(std::int64_t epoch_seconds);

}  // namespace wsnrl
