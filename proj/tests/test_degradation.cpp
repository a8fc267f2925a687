#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles/rainflow_ref.hpp"
#include "wsnrl/degradation.hpp"

using namespace wsnrl;

namespace {

constexpr double kA = 3351.0;
constexpr double kB = -1.689;

std::vector<double> random_soc_trace(int length, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> trace(static_cast<std::size_t>(length));
    double level = 1.0;
    for (double& x : trace) {
        // random walk with occasional jumps, clamped to [0, 1]
        level += (u(rng) - 0.5) * 0.4;
        if (u(rng) < 0.05) level = u(rng);
        level = std::clamp(level, 0.0, 1.0);
        x = level;
    }
    return trace;
}

double sorted_damage(const CycleSet& cycles) { return damage(cycles, kA, kB); }

}  // namespace

TEST_CASE("constant trace yields no cycles") {
    std::vector<double> trace{0.8, 0.8, 0.8};
    CHECK(rainflow(trace).empty());
    CHECK(damage(rainflow(trace), kA, kB) == 0.0);
}

TEST_CASE("single full excursion counts as two damage-equivalent half cycles") {
    std::vector<double> trace{1.0, 0.0, 1.0};
    CycleSet cycles = rainflow(trace);
    REQUIRE(cycles.size() == 2);
    CHECK(cycles[0].depth == doctest::Approx(1.0));
    CHECK(cycles[0].count == 0.5);
    CHECK(cycles[1].depth == doctest::Approx(1.0));
    CHECK(cycles[1].count == 0.5);
    // same damage as one closed cycle of depth 1.0
    CycleSet one_full{{1.0, 1.0}};
    CHECK(sorted_damage(cycles) == doctest::Approx(sorted_damage(one_full)).epsilon(1e-15));
}

TEST_CASE("paper-constant damage values") {
    CHECK(damage({}, kA, kB) == 0.0);
    CHECK(damage({{1.0, 1.0}}, kA, kB) == doctest::Approx(100.0 / 3351.0).epsilon(1e-9));
    CHECK(damage({{1.0, 1.0}}, kA, kB) == doctest::Approx(0.029842).epsilon(1e-4));
    CHECK(damage({{0.5, 1.0}}, kA, kB) ==
          doctest::Approx(100.0 / (3351.0 * std::pow(0.5, -1.689))).epsilon(1e-12));
    CHECK(damage({{0.5, 1.0}}, kA, kB) == doctest::Approx(0.009256).epsilon(1e-4));
}

TEST_CASE("reference trace matches the independent implementation") {
    std::vector<double> trace{1.0, 0.4, 0.8, 0.2, 1.0};
    CycleSet mine = rainflow(trace);
    auto ref = wsnrl_test::rainflow_reference(trace);

    // compare multisets of (depth, count)
    auto key = [](double depth, double count) { return depth * 10.0 + count; };
    std::vector<double> a, b;
    for (const Cycle& c : mine) a.push_back(key(c.depth, c.count));
    for (const auto& c : ref) b.push_back(key(c.depth, c.count));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));

    // hand check: inner cycle (0.4, 0.8) closes, residue 1.0/0.2/1.0 -> halves
    double expected = 1.0 / (kA * std::pow(0.4, kB)) * 100.0 +
                      2.0 * 0.5 / (kA * std::pow(0.8, kB)) * 100.0;
    CHECK(sorted_damage(mine) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("random traces: stack rainflow agrees with the rescan reference") {
    std::mt19937_64 rng(314);
    std::uniform_int_distribution<int> len(0, 120);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> trace = random_soc_trace(len(rng), rng);
        double mine = damage(rainflow(trace), kA, kB);
        double ref = wsnrl_test::damage_reference(wsnrl_test::rainflow_reference(trace), kA, kB);
        CHECK(mine == doctest::Approx(ref).epsilon(1e-10));
    }
}

TEST_CASE("online degradation equals batch recompute at every prefix") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> trace = random_soc_trace(240, rng);
        OnlineDegradation online(kA, kB);
        std::vector<double> prefix;
        for (double x : trace) {
            online.push(x);
            prefix.push_back(x);
            double batch = damage(rainflow(prefix), kA, kB);
            double rel = std::abs(online.value() - batch) / std::max(1e-30, std::abs(batch));
            CHECK(rel < 1e-12);
        }
    }
}

TEST_CASE("online degradation: trivial prefixes and monotonicity") {
    OnlineDegradation online(kA, kB);
    CHECK(online.value() == 0.0);
    online.push(1.0);
    CHECK(online.value() == 0.0);  // single sample, no excursion

    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        OnlineDegradation d(kA, kB);
        double prev = 0.0;
        for (double x : random_soc_trace(300, rng)) {
            d.push(x);
            double v = d.value();
            CHECK(v >= prev - 1e-15);
            prev = v;
        }
    }
}

TEST_CASE("damage additivity over cycle sets") {
    CycleSet s1{{0.3, 1.0}, {0.7, 0.5}};
    CycleSet s2{{0.9, 1.0}, {0.1, 0.5}, {0.5, 1.0}};
    CycleSet both = s1;
    both.insert(both.end(), s2.begin(), s2.end());
    CHECK(damage(both, kA, kB) ==
          doctest::Approx(damage(s1, kA, kB) + damage(s2, kA, kB)).epsilon(1e-15));
}

TEST_CASE("deeper cycles hurt strictly more") {
    double prev = 0.0;
    for (double depth = 0.05; depth <= 1.0; depth += 0.05) {
        double d = damage({{depth, 1.0}}, kA, kB);
        CHECK(d > prev);
        prev = d;
    }
}

TEST_CASE("turning point extraction") {
    std::vector<double> trace{0.5, 0.5, 0.7, 0.9, 0.9, 0.4, 0.4, 0.6};
    std::vector<double> tp = turning_points(trace);
    CHECK(tp == std::vector<double>{0.5, 0.9, 0.4, 0.6});

    CHECK(turning_points(std::vector<double>{}).empty());
    CHECK(turning_points(std::vector<double>{1.0}) == std::vector<double>{1.0});
    CHECK(turning_points(std::vector<double>{0.1, 0.5, 0.9}) == std::vector<double>{0.1, 0.9});
}
