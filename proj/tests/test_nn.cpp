#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "wsnrl/errors.hpp"
#include "wsnrl/nn.hpp"
#include "wsnrl/ppo.hpp"

using namespace wsnrl;

namespace {

std::vector<double> random_obs(int nodes, int features, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> obs(static_cast<std::size_t>(nodes) * features);
    for (double& x : obs) x = u(rng);
    return obs;
}

}  // namespace

TEST_CASE("conv stack shape law: each layer grows the map by two") {
    std::mt19937_64 rng(1);
    PolicyNet four(4, 32, 8, 0.01, rng);
    CHECK(four.conv_output_shape() == std::pair<int, int>{20, 17});
    PolicyNet three(3, 32, 8, 0.01, rng);
    CHECK(three.conv_output_shape() == std::pair<int, int>{19, 17});
    PolicyNet small(4, 8, 2, 0.01, rng);
    CHECK(small.conv_output_shape() == std::pair<int, int>{8, 5});
}

TEST_CASE("feature size rule: smallest power of two covering the node count") {
    AgentConfig agent;
    CHECK(agent.resolved_feature_size(16) == 32);
    CHECK(agent.resolved_feature_size(56) == 64);
    CHECK(agent.resolved_feature_size(112) == 128);
    CHECK(agent.resolved_feature_size(2) == 4);
    agent.feature_size = 8;
    CHECK(agent.resolved_feature_size(112) == 8);  // explicit override wins
}

TEST_CASE("forward produces finite logits and value") {
    std::mt19937_64 rng(7);
    PolicyNet net(4, 16, 3, 0.01, rng);
    PolicyNet::Cache cache;
    auto obs = random_obs(10, 4, rng);
    net.forward(obs.data(), 10, 4, cache);
    REQUIRE(cache.logits.size() == 30);
    for (double l : cache.logits) CHECK(std::isfinite(l));
    CHECK(std::isfinite(cache.value));
}

TEST_CASE("feature mismatch raises a shape error") {
    std::mt19937_64 rng(7);
    PolicyNet net(4, 8, 2, 0.01, rng);
    PolicyNet::Cache cache;
    auto obs = random_obs(5, 3, rng);
    CHECK_THROWS_AS(net.forward(obs.data(), 5, 3, cache), ShapeError);
}

TEST_CASE("policy is exactly permutation-equivariant, value exactly invariant") {
    std::mt19937_64 rng(42);
    PolicyNet net(4, 16, 4, 0.01, rng);
    const int nodes = 9;
    auto obs = random_obs(nodes, 4, rng);

    PolicyNet::Cache base;
    net.forward(obs.data(), nodes, 4, base);
    std::vector<double> base_logits = base.logits;
    double base_value = base.value;

    std::vector<int> perm(nodes);
    std::iota(perm.begin(), perm.end(), 0);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> shuffled(obs.size());
        for (int i = 0; i < nodes; ++i)
            std::copy_n(obs.data() + static_cast<std::size_t>(perm[i]) * 4, 4,
                        shuffled.data() + static_cast<std::size_t>(i) * 4);
        PolicyNet::Cache out;
        net.forward(shuffled.data(), nodes, 4, out);
        for (int i = 0; i < nodes; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(out.logits[static_cast<std::size_t>(i) * 3 + j] ==
                      base_logits[static_cast<std::size_t>(perm[i]) * 3 + j]);
        CHECK(out.value == base_value);
    }
}

TEST_CASE("duplicating the network leaves per-node logits unchanged") {
    std::mt19937_64 rng(43);
    PolicyNet net(4, 8, 2, 0.01, rng);
    const int nodes = 6;
    auto obs = random_obs(nodes, 4, rng);
    std::vector<double> doubled(obs);
    doubled.insert(doubled.end(), obs.begin(), obs.end());

    PolicyNet::Cache a, b;
    net.forward(obs.data(), nodes, 4, a);
    net.forward(doubled.data(), 2 * nodes, 4, b);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < 3; ++j) {
            CHECK(b.logits[static_cast<std::size_t>(i) * 3 + j] ==
                  a.logits[static_cast<std::size_t>(i) * 3 + j]);
            CHECK(b.logits[static_cast<std::size_t>(i + nodes) * 3 + j] ==
                  a.logits[static_cast<std::size_t>(i) * 3 + j]);
        }
}

TEST_CASE("near-deterministic logits sample the dominant action") {
    std::mt19937_64 rng(3);
    std::vector<double> logits{1000.0, 0.0, 0.0, 1000.0, 0.0, 0.0};
    ActionSample s = sample_action(logits, 2, rng);
    CHECK(s.commands == std::vector<int>{0, 0});
    CHECK(s.logp == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(greedy_action(logits, 2) == std::vector<int>{0, 0});
}

TEST_CASE("uniform logits: joint log-prob is nodes * log(1/3)") {
    std::mt19937_64 rng(4);
    std::vector<double> logits(6, 0.0);
    ActionSample s = sample_action(logits, 2, rng);
    CHECK(s.logp == doctest::Approx(2.0 * std::log(1.0 / 3.0)).epsilon(1e-12));
    CHECK(action_logp(logits, 2, s.commands) == doctest::Approx(s.logp).epsilon(1e-12));
}

TEST_CASE("sampled frequencies follow the softmax (Monte Carlo)") {
    std::mt19937_64 rng(5);
    std::vector<double> logits{0.3, -0.2, 1.1};
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    const int n = 100000;
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < n; ++i) ++counts[sample_action(logits, 1, rng).commands[0]];
    for (int j = 0; j < 3; ++j) {
        double p = std::exp(logits[static_cast<std::size_t>(j)] - mx) / z;
        double se = std::sqrt(p * (1.0 - p) / n);
        CHECK(std::abs(static_cast<double>(counts[j]) / n - p) < 3.5 * se);
    }
}

TEST_CASE("parameter init is reproducible from the stream") {
    std::mt19937_64 a(99), b(99);
    PolicyNet na(4, 8, 2, 0.01, a), nb(4, 8, 2, 0.01, b);
    CHECK(na.params() == nb.params());
    std::mt19937_64 c(100);
    PolicyNet nc(4, 8, 2, 0.01, c);
    CHECK(na.params() != nc.params());
}

TEST_CASE("network gradient against central finite differences") {
    // loss = sum(logits * w) + value; checks the conv/linear backward chain
    std::mt19937_64 rng(1234);
    PolicyNet net(3, 4, 2, 0.01, rng);
    const int nodes = 3;
    auto obs = random_obs(nodes, 3, rng);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(nodes) * 3);
    for (double& x : w) x = u(rng);

    auto loss_of = [&](const std::vector<double>& params) {
        PolicyNet copy = net;
        copy.params() = params;
        PolicyNet::Cache cache;
        copy.forward(obs.data(), nodes, 3, cache);
        double loss = cache.value;
        for (std::size_t i = 0; i < w.size(); ++i) loss += w[i] * cache.logits[i];
        return loss;
    };

    PolicyNet::Cache cache;
    net.forward(obs.data(), nodes, 3, cache);
    std::vector<double> grad(net.param_count(), 0.0);
    net.backward(cache, w.data(), 1.0, grad);

    std::vector<double> params = net.params();
    const double h = 1e-6;
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); i += 3) {  // probe a third of them
        std::vector<double> p = params;
        p[i] = params[i] + h;
        double up = loss_of(p);
        p[i] = params[i] - h;
        double down = loss_of(p);
        double fd = (up - down) / (2.0 * h);
        double rel = std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd));
        max_rel = std::max(max_rel, rel);
    }
    CHECK(max_rel < 1e-6);
}
