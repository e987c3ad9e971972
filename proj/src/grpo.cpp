#include "cotforge/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "cotforge/prng.hpp"

namespace cotforge::grpo {

// ---------------------------------------------------------------------------
// ToyPolicy
// ---------------------------------------------------------------------------

const LogitTable& ToyPolicy::logits_for(int prompt_id) const {
    auto it = logits.find(prompt_id);
    if (it == logits.end()) {
        throw UnknownPrompt("no logits for prompt " + std::to_string(prompt_id));
    }
    return it->second;
}

LogitTable& ToyPolicy::logits_for(int prompt_id) {
    auto it = logits.find(prompt_id);
    if (it == logits.end()) {
        throw UnknownPrompt("no logits for prompt " + std::to_string(prompt_id));
    }
    return it->second;
}

std::vector<double> ToyPolicy::probabilities(int prompt_id, int position) const {
    const LogitTable& table = logits_for(prompt_id);
    const std::vector<double>& row = table.at(static_cast<size_t>(position));
    const double max_logit = *std::max_element(row.begin(), row.end());
    std::vector<double> probs(row.size());
    double sum = 0.0;
    for (size_t v = 0; v < row.size(); ++v) {
        probs[v] = std::exp(row[v] - max_logit);
        sum += probs[v];
    }
    for (double& p : probs) p /= sum;
    return probs;
}

ToyPolicy ToyPolicy::uniform(std::vector<std::string> vocab, int max_len,
                             const std::vector<int>& prompt_ids) {
    ToyPolicy policy;
    policy.vocab = std::move(vocab);
    policy.max_len = max_len;
    for (int prompt : prompt_ids) {
        policy.logits[prompt] = LogitTable(
            static_cast<size_t>(max_len), std::vector<double>(policy.vocab.size(), 0.0));
    }
    return policy;
}

std::string detokenize(const ToyPolicy& policy, const std::vector<int>& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out += ' ';
        out += policy.vocab.at(static_cast<size_t>(tokens[i]));
    }
    return out;
}

std::vector<double> TrajectoryGroup::rewards() const {
    std::vector<double> out;
    out.reserve(trajectories.size());
    for (const Trajectory& t : trajectories) out.push_back(t.reward);
    return out;
}

void GRPOConfig::validate() const {
    if (K < 2) throw std::invalid_argument("grpo K must be >= 2");
    if (beta < 0) throw std::invalid_argument("grpo beta must be nonnegative");
    if (learning_rate <= 0) throw std::invalid_argument("grpo learning_rate must be positive");
    if (steps < 0) throw std::invalid_argument("grpo steps must be nonnegative");
    if (sigma_floor <= 0) throw std::invalid_argument("grpo sigma_floor must be positive");
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

TrajectoryGroup sample_group(const ToyPolicy& policy, const ToyPolicy& reference, int prompt_id,
                             int K, uint64_t seed) {
    const int positions = policy.max_len;
    std::vector<std::vector<double>> theta_probs;
    std::vector<std::vector<double>> ref_probs;
    theta_probs.reserve(static_cast<size_t>(positions));
    ref_probs.reserve(static_cast<size_t>(positions));
    for (int t = 0; t < positions; ++t) {
        theta_probs.push_back(policy.probabilities(prompt_id, t));
        ref_probs.push_back(reference.probabilities(prompt_id, t));
    }

    TrajectoryGroup group;
    group.prompt_id = prompt_id;
    SplitMix64 rng(seed);
    for (int k = 0; k < K; ++k) {
        Trajectory traj;
        for (int t = 0; t < positions; ++t) {
            const std::vector<double>& probs = theta_probs[static_cast<size_t>(t)];
            const double u = rng.next_double();
            double cumulative = 0.0;
            size_t token = probs.size() - 1;
            for (size_t v = 0; v < probs.size(); ++v) {
                cumulative += probs[v];
                if (u < cumulative) {
                    token = v;
                    break;
                }
            }
            traj.tokens.push_back(static_cast<int>(token));
            traj.logp_theta.push_back(std::log(probs[token]));
            traj.logp_ref.push_back(std::log(ref_probs[static_cast<size_t>(t)][token]));
        }
        group.trajectories.push_back(std::move(traj));
    }
    return group;
}

// ---------------------------------------------------------------------------
// Advantages and KL
// ---------------------------------------------------------------------------

std::vector<double> group_advantages(const std::vector<double>& rewards, double sigma_floor) {
    if (rewards.empty()) {
        throw EmptyGroup("group_advantages requires at least one reward");
    }
    const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
    if (*lo == *hi) {
        return std::vector<double>(rewards.size(), 0.0);
    }

    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double variance = 0.0;
    for (double r : rewards) variance += (r - mean) * (r - mean);
    variance /= n; // population standard deviation
    const double denom = std::max(std::sqrt(variance), sigma_floor);

    std::vector<double> advantages;
    advantages.reserve(rewards.size());
    for (double r : rewards) advantages.push_back((r - mean) / denom);
    return advantages;
}

double kl_estimate(double p_theta, double p_ref) {
    if (p_theta <= 0.0 || p_ref <= 0.0) {
        throw NonpositiveProbability("kl_estimate requires strictly positive probabilities");
    }
    const double rho = p_ref / p_theta;
    return rho - std::log(rho) - 1.0;
}

// ---------------------------------------------------------------------------
// eq5 loss
// ---------------------------------------------------------------------------

LossGrad grpo_loss(const TrajectoryGroup& group, const ToyPolicy& policy,
                   const ToyPolicy& reference, const GRPOConfig& cfg) {
    if (group.trajectories.empty()) {
        throw EmptyGroup("grpo_loss requires at least one trajectory");
    }
    size_t total_tokens = 0;
    for (const Trajectory& traj : group.trajectories) {
        if (traj.tokens.size() != traj.logp_theta.size() ||
            traj.tokens.size() != traj.logp_ref.size()) {
            throw LengthMismatch("trajectory token/logprob lists have inconsistent lengths");
        }
        total_tokens += traj.tokens.size();
    }

    const std::vector<double> advantages = group_advantages(group.rewards(), cfg.sigma_floor);

    const int positions = policy.max_len;
    std::vector<std::vector<double>> theta_probs;
    std::vector<std::vector<double>> ref_probs;
    for (int t = 0; t < positions; ++t) {
        theta_probs.push_back(policy.probabilities(group.prompt_id, t));
        ref_probs.push_back(reference.probabilities(group.prompt_id, t));
    }

    const double normalizer =
        cfg.length_normalize
            ? static_cast<double>(group.trajectories.size()) * static_cast<double>(total_tokens)
            : 1.0;

    double objective = 0.0;
    LogitTable grad(static_cast<size_t>(positions),
                    std::vector<double>(policy.vocab.size(), 0.0));
    for (size_t i = 0; i < group.trajectories.size(); ++i) {
        const Trajectory& traj = group.trajectories[i];
        const double advantage = advantages[i];
        for (size_t t = 0; t < traj.tokens.size(); ++t) {
            const std::vector<double>& probs = theta_probs[t];
            const size_t token = static_cast<size_t>(traj.tokens[t]);
            const double p = probs[token];
            const double q = ref_probs[t][token];
            objective += (p / q) * advantage - cfg.beta * kl_estimate(p, q);

            // d/dp of the bracketed term, then chain through softmax:
            // d p / d logit[v] = p * (1{v == token} - probs[v]).
            const double dterm_dp = advantage / q + cfg.beta * (q / (p * p) - 1.0 / p);
            const double scale = dterm_dp * p;
            for (size_t v = 0; v < probs.size(); ++v) {
                // loss = -objective / normalizer
                grad[t][v] -= scale * ((v == token ? 1.0 : 0.0) - probs[v]) / normalizer;
            }
        }
    }

    return LossGrad{-objective / normalizer, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Updates
// ---------------------------------------------------------------------------

namespace {

double table_norm(const LogitTable& table) {
    double sum = 0.0;
    for (const auto& row : table) {
        for (double v : row) sum += v * v;
    }
    return std::sqrt(sum);
}

} // namespace

UpdateStats reinforce_step(ToyPolicy& policy, const TrajectoryGroup& group,
                           const GRPOConfig& cfg) {
    if (group.trajectories.empty()) {
        throw EmptyGroup("reinforce_step requires at least one trajectory");
    }
    const std::vector<double> rewards = group.rewards();
    const double K = static_cast<double>(rewards.size());
    double baseline = 0.0;
    for (double r : rewards) baseline += r;
    baseline /= K;

    const int positions = policy.max_len;
    std::vector<std::vector<double>> probs;
    for (int t = 0; t < positions; ++t) {
        probs.push_back(policy.probabilities(group.prompt_id, t));
    }

    // Ascent direction (1/K) sum_k (s_k - baseline) grad log pi(tau_k).
    LogitTable direction(static_cast<size_t>(positions),
                         std::vector<double>(policy.vocab.size(), 0.0));
    double surrogate = 0.0;
    for (size_t k = 0; k < group.trajectories.size(); ++k) {
        const Trajectory& traj = group.trajectories[k];
        const double weight = (rewards[k] - baseline) / K;
        for (size_t t = 0; t < traj.tokens.size(); ++t) {
            const size_t token = static_cast<size_t>(traj.tokens[t]);
            surrogate += weight * std::log(probs[t][token]);
            for (size_t v = 0; v < probs[t].size(); ++v) {
                direction[t][v] += weight * ((v == token ? 1.0 : 0.0) - probs[t][v]);
            }
        }
    }

    LogitTable& logits = policy.logits_for(group.prompt_id);
    for (size_t t = 0; t < direction.size(); ++t) {
        for (size_t v = 0; v < direction[t].size(); ++v) {
            logits[t][v] += cfg.learning_rate * direction[t][v];
        }
    }

    return UpdateStats{baseline, -surrogate, table_norm(direction)};
}

UpdateStats eq5_step(ToyPolicy& policy, const ToyPolicy& reference, const TrajectoryGroup& group,
                     const GRPOConfig& cfg) {
    const LossGrad lg = grpo_loss(group, policy, reference, cfg);

    LogitTable& logits = policy.logits_for(group.prompt_id);
    for (size_t t = 0; t < lg.grad.size(); ++t) {
        for (size_t v = 0; v < lg.grad[t].size(); ++v) {
            logits[t][v] -= cfg.learning_rate * lg.grad[t][v];
        }
    }

    const std::vector<double> rewards = group.rewards();
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= static_cast<double>(rewards.size());
    return UpdateStats{mean, lg.loss, table_norm(lg.grad)};
}

// ---------------------------------------------------------------------------
// Toy training task
// ---------------------------------------------------------------------------

// The reference chain rehearses "yes" while the ground truth is "no": the
// think block must contain yes-sentences to earn the process reward, and the
// answer span must contain a lone "no", so any span that sprawls across the
// reasoning loses the answer reward to the contradiction rule. The reward
// components therefore agree on the think-first layout instead of fighting
// over the early positions.
MicroTask MicroTask::builtin() {
    MicroTask task;
    task.prompt_id = 0;
    task.ground_truth = Answer::no;
    task.ref_chain = "yes. yes.";
    task.vocab = {"<think>", "</think>", "<answer>", "</answer>", "yes", "no", "."};
    // Full-reward sequence: <think> yes . yes . </think> <answer> no </answer>
    task.max_len = 9;
    return task;
}

TrainReport train_toy(const MicroTask& task, const GRPOConfig& cfg,
                      const reward::CCVRConfig& reward_cfg) {
    cfg.validate();
    reward_cfg.validate();

    ToyPolicy policy = ToyPolicy::uniform(task.vocab, task.max_len, {task.prompt_id});
    const ToyPolicy reference = policy; // frozen initial policy

    treebuild::Embedder embedder(treebuild::EmbedderConfig{});

    TrainReport report;
    SplitMix64 seed_stream(cfg.seed);
    for (int step = 1; step <= cfg.steps; ++step) {
        TrajectoryGroup group =
            sample_group(policy, reference, task.prompt_id, cfg.K, seed_stream.next());
        for (Trajectory& traj : group.trajectories) {
            const std::string response = detokenize(policy, traj.tokens);
            traj.reward =
                reward::ccvr_reward(response, task.ground_truth, task.ref_chain, reward_cfg,
                                    embedder)
                    .total;
        }

        const UpdateStats stats = cfg.mode == GRPOConfig::Mode::alg1
                                      ? reinforce_step(policy, group, cfg)
                                      : eq5_step(policy, reference, group, cfg);
        report.steps.push_back(StepStats{step, stats.mean_reward, stats.loss, stats.grad_norm});
    }

    report.final_policy = std::move(policy);
    return report;
}

} // namespace cotforge::grpo
