#include "wsnrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsnrl/errors.hpp"
#include "wsnrl/util.hpp"

namespace wsnrl {
namespace {

// log-softmax over a node's 3 logits; returns logsumexp
double log_softmax3(const double* logits, double* logp) {
    double mx = std::max({logits[0], logits[1], logits[2]});
    double z = std::exp(logits[0] - mx) + std::exp(logits[1] - mx) + std::exp(logits[2] - mx);
    double lse = mx + std::log(z);
    for (int j = 0; j < 3; ++j) logp[j] = logits[j] - lse;
    return lse;
}

}  // namespace

ActionSample sample_action(const std::vector<double>& logits, int nodes, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    ActionSample out;
    out.commands.resize(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        double lp[3];
        log_softmax3(logits.data() + static_cast<std::size_t>(i) * 3, lp);
        double p0 = std::exp(lp[0]);
        double p1 = std::exp(lp[1]);
        double u = uniform(rng);
        int a = u < p0 ? 0 : (u < p0 + p1 ? 1 : 2);
        out.commands[static_cast<std::size_t>(i)] = a;
        out.logp += lp[a];
    }
    return out;
}

std::vector<int> greedy_action(const std::vector<double>& logits, int nodes) {
    std::vector<int> commands(static_cast<std::size_t>(nodes));
    for (int i = 0; i < nodes; ++i) {
        const double* l = logits.data() + static_cast<std::size_t>(i) * 3;
        int a = 0;
        if (l[1] > l[a]) a = 1;
        if (l[2] > l[a]) a = 2;
        commands[static_cast<std::size_t>(i)] = a;
    }
    return commands;
}

double action_logp(const std::vector<double>& logits, int nodes, const std::vector<int>& commands) {
    double total = 0.0;
    for (int i = 0; i < nodes; ++i) {
        double lp[3];
        log_softmax3(logits.data() + static_cast<std::size_t>(i) * 3, lp);
        total += lp[commands[static_cast<std::size_t>(i)]];
    }
    return total;
}

std::vector<double> gae(const std::vector<double>& rewards, const std::vector<double>& values,
                        double bootstrap_value, double gamma, double lambda) {
    if (rewards.size() != values.size())
        throw ShapeError("gae: rewards and values must have equal length");
    const int t_max = static_cast<int>(rewards.size());
    std::vector<double> advantages(rewards.size(), 0.0);
    double next_adv = 0.0;
    double next_value = bootstrap_value;
    for (int t = t_max - 1; t >= 0; --t) {
        double delta = rewards[static_cast<std::size_t>(t)] + gamma * next_value -
                       values[static_cast<std::size_t>(t)];
        next_adv = delta + gamma * lambda * next_adv;
        advantages[static_cast<std::size_t>(t)] = next_adv;
        next_value = values[static_cast<std::size_t>(t)];
    }
    return advantages;
}

RolloutBuffer::RolloutBuffer(int capacity, int nodes, int features)
    : capacity_(capacity), nodes_(nodes), features_(features) {
    obs_.resize(static_cast<std::size_t>(capacity) * nodes * features);
    actions_.resize(static_cast<std::size_t>(capacity) * nodes);
    logp_.resize(static_cast<std::size_t>(capacity));
    rewards_.resize(static_cast<std::size_t>(capacity));
    values_.resize(static_cast<std::size_t>(capacity));
    advantages_.resize(static_cast<std::size_t>(capacity));
    returns_.resize(static_cast<std::size_t>(capacity));
}

void RolloutBuffer::add(const double* obs, const std::vector<int>& action, double logp,
                        double reward, double value) {
    if (full()) throw StateError("rollout buffer already full");
    std::size_t i = static_cast<std::size_t>(size_);
    std::copy(obs, obs + static_cast<std::size_t>(nodes_) * features_,
              obs_.begin() + i * nodes_ * features_);
    std::copy(action.begin(), action.end(), actions_.begin() + i * nodes_);
    logp_[i] = logp;
    rewards_[i] = reward;
    values_[i] = value;
    ++size_;
}

void RolloutBuffer::finish_episode(int length, double bootstrap_value, double gamma,
                                   double lambda) {
    if (length < 1 || episode_start_ + length != size_)
        throw StateError("finish_episode length does not match buffered transitions");
    std::vector<double> rewards(rewards_.begin() + episode_start_, rewards_.begin() + size_);
    std::vector<double> values(values_.begin() + episode_start_, values_.begin() + size_);
    std::vector<double> adv = gae(rewards, values, bootstrap_value, gamma, lambda);
    for (int t = 0; t < length; ++t) {
        std::size_t i = static_cast<std::size_t>(episode_start_ + t);
        advantages_[i] = adv[static_cast<std::size_t>(t)];
        returns_[i] = adv[static_cast<std::size_t>(t)] + values[static_cast<std::size_t>(t)];
    }
    episode_start_ = size_;
}

void RolloutBuffer::normalize_advantages() {
    std::span<const double> adv(advantages_.data(), static_cast<std::size_t>(size_));
    double m = mean(adv);
    double s = pop_std(adv);
    for (int i = 0; i < size_; ++i)
        advantages_[static_cast<std::size_t>(i)] =
            (advantages_[static_cast<std::size_t>(i)] - m) / (s + 1e-8);
}

void RolloutBuffer::clear() {
    size_ = 0;
    episode_start_ = 0;
}

UpdateMetrics ppo_loss(const PolicyNet& net, const RolloutBuffer& buffer,
                       const std::vector<int>& indices, const PpoHyper& hyper,
                       std::vector<double>* grad, double* loss_out) {
    const int nodes = buffer.nodes();
    const double inv_m = 1.0 / static_cast<double>(indices.size());
    const double eps = hyper.clip_eps;

    UpdateMetrics metrics;
    double loss = 0.0;

    const int threads = grad != nullptr ? std::max(1, hyper.threads) : 1;
    struct Partial {
        UpdateMetrics m;
        double loss = 0.0;
        std::vector<double> grad;
    };
    std::vector<Partial> partials(static_cast<std::size_t>(threads));
    if (grad != nullptr)
        for (auto& p : partials) p.grad.assign(net.param_count(), 0.0);

    std::vector<PolicyNet::Cache> caches(static_cast<std::size_t>(threads));

    parallel_for(indices.size(), threads, [&](std::size_t lo, std::size_t hi, int tid) {
        Partial& part = partials[static_cast<std::size_t>(tid)];
        PolicyNet::Cache& cache = caches[static_cast<std::size_t>(tid)];
        std::vector<double> dlogits(static_cast<std::size_t>(nodes) * 3);
        for (std::size_t ii = lo; ii < hi; ++ii) {
            int idx = indices[ii];
            net.forward(buffer.obs_at(idx), nodes, buffer.features(), cache);

            const int* action = buffer.action_at(idx);
            const double adv = buffer.advantage_at(idx);
            const double logp_old = buffer.logp_at(idx);
            const double v_old = buffer.value_at(idx);
            const double v_targ = buffer.return_at(idx);

            // joint log-prob, per-node probabilities, entropy
            double logp = 0.0;
            double entropy = 0.0;
            std::vector<double> probs(static_cast<std::size_t>(nodes) * 3);
            std::vector<double> logps(static_cast<std::size_t>(nodes) * 3);
            for (int i = 0; i < nodes; ++i) {
                double* lp = logps.data() + static_cast<std::size_t>(i) * 3;
                log_softmax3(cache.logits.data() + static_cast<std::size_t>(i) * 3, lp);
                logp += lp[action[i]];
                for (int j = 0; j < 3; ++j) {
                    double p = std::exp(lp[j]);
                    probs[static_cast<std::size_t>(i) * 3 + j] = p;
                    entropy -= p * lp[j];
                }
            }

            const double ratio = std::exp(logp - logp_old);
            const double unclipped = ratio * adv;
            const double clipped = std::clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
            const double objective = std::min(unclipped, clipped);

            // d(-objective)/dlogp: the min picks a branch; the clipped branch
            // is flat in logp whenever the clamp is saturated
            double dobj_dlogp;
            if (unclipped <= clipped)
                dobj_dlogp = unclipped;  // d(r*A)/dlogp = r*A
            else
                dobj_dlogp = (ratio > 1.0 - eps && ratio < 1.0 + eps) ? unclipped : 0.0;

            // value loss with the clipped alternative
            const double v = cache.value;
            const double verr = v - v_targ;
            const double v_clamped = v_old + std::clamp(v - v_old, -hyper.vf_clip, hyper.vf_clip);
            const double verr_clip = v_clamped - v_targ;
            double vf, dvf_dv;
            if (verr * verr >= verr_clip * verr_clip) {
                vf = verr * verr;
                dvf_dv = 2.0 * verr;
            } else {
                vf = verr_clip * verr_clip;
                dvf_dv = std::abs(v - v_old) < hyper.vf_clip ? 2.0 * verr_clip : 0.0;
            }

            part.loss += (-objective + hyper.c1 * vf - hyper.c2 * entropy) * inv_m;
            part.m.policy_loss += -objective * inv_m;
            part.m.vf_loss += vf * inv_m;
            part.m.entropy += entropy * inv_m;
            part.m.approx_kl += (logp_old - logp) * inv_m;
            if (std::abs(ratio - 1.0) > eps) part.m.clip_frac += inv_m;

            if (grad == nullptr) continue;

            for (int i = 0; i < nodes; ++i) {
                const double* p = probs.data() + static_cast<std::size_t>(i) * 3;
                const double* lp = logps.data() + static_cast<std::size_t>(i) * 3;
                double* dl = dlogits.data() + static_cast<std::size_t>(i) * 3;
                double node_h = -(p[0] * lp[0] + p[1] * lp[1] + p[2] * lp[2]);
                for (int j = 0; j < 3; ++j) {
                    double dlogp_dz = (j == action[i] ? 1.0 : 0.0) - p[j];
                    double dz = -dobj_dlogp * dlogp_dz;            // policy term
                    dz += hyper.c2 * p[j] * (lp[j] + node_h);      // -c2 * dH/dz
                    dl[j] = dz * inv_m;
                }
            }
            double dvalue = hyper.c1 * dvf_dv * inv_m;
            net.backward(cache, dlogits.data(), dvalue, part.grad);
        }
    });

    for (const Partial& p : partials) {
        loss += p.loss;
        metrics.policy_loss += p.m.policy_loss;
        metrics.vf_loss += p.m.vf_loss;
        metrics.entropy += p.m.entropy;
        metrics.approx_kl += p.m.approx_kl;
        metrics.clip_frac += p.m.clip_frac;
    }
    if (grad != nullptr) {
        std::fill(grad->begin(), grad->end(), 0.0);
        for (const Partial& p : partials)
            for (std::size_t i = 0; i < grad->size(); ++i) (*grad)[i] += p.grad[i];
    }
    if (loss_out != nullptr) *loss_out = loss;
    if (!std::isfinite(loss)) metrics.skipped = true;
    if (grad != nullptr && !metrics.skipped)
        for (double g : *grad)
            if (!std::isfinite(g)) {
                metrics.skipped = true;
                break;
            }
    return metrics;
}

Optimizer::Optimizer(std::size_t param_count, const PpoHyper& hyper) : hyper_(hyper) {
    if (hyper_.optimizer == "adam") {
        m_.assign(param_count, 0.0);
        v_.assign(param_count, 0.0);
    }
}

void Optimizer::step(std::vector<double>& params, const std::vector<double>& grad) {
    const double lr = hyper_.learning_rate;
    if (hyper_.optimizer == "sgd") {
        for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
        return;
    }
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
        v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
        params[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + adam_eps);
    }
}

PpoTrainer::PpoTrainer(PolicyNet& net, const PpoHyper& hyper, RngStreams& streams)
    : net_(net), hyper_(hyper), streams_(streams), optimizer_(net.param_count(), hyper) {}

UpdateMetrics PpoTrainer::update(RolloutBuffer& buffer) {
    if (hyper_.adv_norm) buffer.normalize_advantages();

    std::vector<int> order(static_cast<std::size_t>(buffer.size()));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> grad(net_.param_count());

    UpdateMetrics avg;
    int steps = 0;
    for (int epoch = 0; epoch < hyper_.epochs_per_update; ++epoch) {
        std::shuffle(order.begin(), order.end(), streams_.policy);
        for (int start = 0; start < buffer.size(); start += hyper_.minibatch_size) {
            int end = std::min(buffer.size(), start + hyper_.minibatch_size);
            std::vector<int> mb(order.begin() + start, order.begin() + end);
            UpdateMetrics m = ppo_loss(net_, buffer, mb, hyper_, &grad);
            if (m.skipped) {
                avg.skipped = true;
                continue;  // leave parameters untouched for this minibatch
            }
            optimizer_.step(net_.params(), grad);
            avg.policy_loss += m.policy_loss;
            avg.vf_loss += m.vf_loss;
            avg.entropy += m.entropy;
            avg.approx_kl += m.approx_kl;
            avg.clip_frac += m.clip_frac;
            ++steps;
        }
    }
    if (steps > 0) {
        avg.policy_loss /= steps;
        avg.vf_loss /= steps;
        avg.entropy /= steps;
        avg.approx_kl /= steps;
        avg.clip_frac /= steps;
    }
    return avg;
}

UpdateResult PpoTrainer::collect_and_update(Env& env) {
    const int t_max = env.steps_per_episode();
    RolloutBuffer buffer(hyper_.actors * t_max, env.node_count(), env.feature_count());

    UpdateResult result;
    for (int actor = 0; actor < hyper_.actors; ++actor) {
        Observation obs = env.reset();
        EpisodeStats stats;
        for (int t = 0; t < t_max; ++t) {
            net_.forward(obs.data.data(), obs.nodes, obs.features, cache_);
            ActionSample a = sample_action(cache_.logits, obs.nodes, streams_.policy);
            double value = cache_.value;
            StepResult r = env.step(ActionVector{a.commands});
            buffer.add(obs.data.data(), a.commands, a.logp, r.reward, value);
            stats.total_reward += r.reward;
            stats.r1_sum += r.info.r1;
            stats.r2_sum += r.info.r2;
            obs = std::move(r.observation);
        }
        buffer.finish_episode(t_max, 0.0, hyper_.gamma, hyper_.gae_lambda);
        result.mean_return += stats.total_reward / hyper_.actors;
        result.mean_r1_sum += stats.r1_sum / hyper_.actors;
        result.mean_r2_sum += stats.r2_sum / hyper_.actors;
    }
    result.metrics = update(buffer);
    return result;
}

void PpoTrainer::train(Env& env, long episodes_total, const TrainCallbacks& callbacks) {
    long episodes = 0;
    long update_idx = 0;
    while (episodes < episodes_total) {
        UpdateResult r = collect_and_update(env);
        episodes += hyper_.actors;
        ++update_idx;
        if (callbacks.on_update) callbacks.on_update(update_idx, episodes, r);
        if (callbacks.on_checkpoint &&
            (update_idx % hyper_.checkpoint_every == 0 || episodes >= episodes_total))
            callbacks.on_checkpoint(update_idx, episodes);
    }
}

}  // namespace wsnrl
