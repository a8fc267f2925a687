#include "wsnrl/solar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "wsnrl/errors.hpp"

namespace wsnrl {
namespace {

// days-from-civil (Howard Hinnant's algorithm); avoids timegm portability.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    unsigned doe = static_cast<unsigned>(z - era * 146097);
    unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

// Bins raw (timestamp, energy) samples into delta_t steps by summation.
SolarProfile resample(const std::vector<std::int64_t>& times, const std::vector<double>& energy,
                      double delta_t_hours, SolarProfile::Source source,
                      std::vector<std::string>* warnings) {
    SolarProfile out;
    out.source = source;
    out.delta_t_hours = delta_t_hours;
    if (times.empty()) return out;

    const std::int64_t dt = static_cast<std::int64_t>(std::llround(delta_t_hours * 3600.0));
    const std::int64_t t0 = times.front();
    const std::int64_t bins = (times.back() - t0) / dt + 1;
    out.timestamps.resize(bins);
    out.baseline_energy.assign(bins, 0.0);
    std::vector<char> seen(bins, 0);
    for (std::int64_t b = 0; b < bins; ++b) out.timestamps[b] = t0 + b * dt;
    for (std::size_t i = 0; i < times.size(); ++i) {
        std::int64_t b = (times[i] - t0) / dt;
        out.baseline_energy[b] += energy[i];
        seen[b] = 1;
    }
    if (warnings != nullptr) {
        for (std::int64_t b = 0; b < bins; ++b) {
            if (!seen[b])
                warnings->push_back("no samples in bin " + std::to_string(b) +
                                    " (starting " + format_iso8601(out.timestamps[b]) +
                                    "); filled with 0");
        }
    }
    return out;
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    int n = std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s);
    if (n < 3 || (n > 3 && sep != 'T' && sep != ' '))
        throw DataError("invalid ISO-8601 timestamp: \"" + text + "\"");
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60)
        throw DataError("timestamp field out of range: \"" + text + "\"");
    return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t t) {
    std::int64_t days = t >= 0 ? t / 86400 : (t - 86399) / 86400;
    int secs = static_cast<int>(t - days * 86400);
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d, secs / 3600,
                  (secs / 60) % 60, secs % 60);
    return buf;
}

SolarProfile load_solar_csv(const std::string& path, double delta_t_hours,
                            std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open solar CSV: " + path);

    std::vector<std::int64_t> times;
    std::vector<double> energy;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header_seen) {
            if (line.find("timestamp") == std::string::npos ||
                line.find("energy_mwh") == std::string::npos)
                throw DataError(path + ": expected header \"timestamp,energy_mwh\" on line " +
                                std::to_string(line_no));
            header_seen = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw DataError(path + ": malformed row on line " + std::to_string(line_no));
        std::int64_t t;
        double e;
        try {
            t = parse_iso8601(line.substr(0, comma));
            std::size_t used = 0;
            e = std::stod(line.substr(comma + 1), &used);
        } catch (const DataError&) {
            throw DataError(path + ": malformed row on line " + std::to_string(line_no));
        } catch (const std::exception&) {
            throw DataError(path + ": malformed row on line " + std::to_string(line_no));
        }
        if (!times.empty() && t <= times.back())
            throw DataError(path + ": non-monotone timestamp on line " + std::to_string(line_no));
        if (e < 0.0)
            throw DataError(path + ": negative energy on line " + std::to_string(line_no));
        times.push_back(t);
        energy.push_back(e);
    }
    if (times.empty()) throw DataError(path + ": no data rows");
    return resample(times, energy, delta_t_hours, SolarProfile::Source::csv_file, warnings);
}

SolarProfile synth_solar(int days, double panel_watts, double latitude_factor,
                         std::uint64_t cloud_seed, double cloud_sigma, double delta_t_hours) {
    if (days < 1) throw ConfigError("synth_solar: days must be >= 1");

    std::mt19937_64 rng(cloud_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double rating_mw = panel_watts * 1000.0;
    const double day_sigma = cloud_sigma;
    const double sample_sigma = cloud_sigma * 0.5;

    std::vector<std::int64_t> times;
    std::vector<double> energy;
    const int samples_per_day = 48;  // 30-minute resolution
    times.reserve(static_cast<std::size_t>(days) * samples_per_day);
    for (int day = 0; day < days; ++day) {
        double day_cloud = cloud_sigma > 0.0
                               ? std::exp(normal(rng) * day_sigma - 0.5 * day_sigma * day_sigma)
                               : 1.0;
        for (int k = 0; k < samples_per_day; ++k) {
            double hour = 0.5 * k + 0.25;  // sample midpoint
            double s = 0.0;
            if (hour > 6.0 && hour < 18.0)
                s = std::sin(std::numbers::pi * (hour - 6.0) / 12.0);
            double power = rating_mw * latitude_factor * s;
            if (cloud_sigma > 0.0 && power > 0.0) {
                double jitter =
                    std::exp(normal(rng) * sample_sigma - 0.5 * sample_sigma * sample_sigma);
                power *= day_cloud * jitter;
            }
            power = std::clamp(power, 0.0, rating_mw);
            times.push_back(static_cast<std::int64_t>(day) * 86400 + k * 1800);
            energy.push_back(power * 0.5);  // mWh in a 30-minute sample
        }
    }
    return resample(times, energy, delta_t_hours, SolarProfile::Source::synthetic, nullptr);
}

std::vector<double> harvested_energy(const SolarProfile& profile, const RandomFieldSample& field,
                                     const Topology& topology, int t_k) {
    if (t_k < 0 || t_k >= profile.size())
        throw DataError("step " + std::to_string(t_k) + " outside solar profile of length " +
                        std::to_string(profile.size()));
    const double e_mu = profile.baseline_energy[static_cast<std::size_t>(t_k)];
    std::vector<double> out(static_cast<std::size_t>(topology.node_count()));
    for (int i = 0; i < topology.node_count(); ++i) {
        double y = field.at_cell(topology.field_cell[static_cast<std::size_t>(i)]);
        out[static_cast<std::size_t>(i)] = std::max(0.0, e_mu * (1.0 + y));
    }
    return out;
}

void write_solar_csv(const SolarProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << "timestamp,energy_mwh\n";
    char buf[64];
    for (int i = 0; i < profile.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", profile.baseline_energy[i]);
        out << format_iso8601(profile.timestamps[i]) << ',' << buf << '\n';
    }
}

}  // namespace wsnrl
