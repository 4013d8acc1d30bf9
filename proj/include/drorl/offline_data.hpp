#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "drorl/mdp.hpp"

namespace drorl {

/// Distribution over state-action pairs, flat s * A + a.
class BehaviorDistribution {
public:
    BehaviorDistribution(std::size_t num_states, std::size_t num_actions, Vector weights);

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    const Vector& weights() const { return weights_; }
    double operator()(std::size_t s, std::size_t a) const { return weights_[s * num_actions_ + a]; }

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    Vector weights_;
};

/// mu(s, a) = 1 / (S A).
BehaviorDistribution behavior_uniform(std::size_t num_states, std::size_t num_actions);

/// mu(s, .) puts 1/(2S) on pi_star(s) and 1/(2S) on eta, merged when equal.
BehaviorDistribution behavior_partial(const DeterministicPolicy& pi_star, std::size_t num_actions,
                                      std::size_t eta);

/// Draws the single global action eta used by behavior_partial.
std::size_t draw_partial_action(std::size_t num_actions, std::uint64_t seed);

struct Transition {
    std::size_t state = 0;
    std::size_t action = 0;
    std::size_t next_state = 0;
    double reward = 0.0;

    friend bool operator==(const Transition&, const Transition&) = default;
};

/// Fixed batch of transitions with its visit counts.
class OfflineDataset {
public:
    OfflineDataset(std::size_t num_states, std::size_t num_actions,
                   std::vector<Transition> transitions, std::uint64_t seed = 0,
                   std::optional<BehaviorDistribution> mu = std::nullopt);

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return transitions_.size(); }

    const std::vector<Transition>& transitions() const { return transitions_; }
    /// N(s, a), flat s * A + a.
    const std::vector<std::uint64_t>& pair_counts() const { return pair_counts_; }
    /// N(s).
    const std::vector<std::uint64_t>& state_counts() const { return state_counts_; }
    std::uint64_t count(std::size_t s, std::size_t a) const { return pair_counts_[s * num_actions_ + a]; }
    const std::optional<BehaviorDistribution>& behavior() const { return mu_; }

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    std::vector<Transition> transitions_;
    std::uint64_t seed_;
    std::optional<BehaviorDistribution> mu_;
    std::vector<std::uint64_t> pair_counts_;
    std::vector<std::uint64_t> state_counts_;
};

/**
 * Draws n i.i.d. tuples: (s, a) ~ mu, s' ~ P[s, a], r = r(s, a).
 *
 * Tuple i depends only on (seed, i) through a counter-based generator, so
 * any prefix of a larger draw with the same seed is identical.
 */
OfflineDataset sample_dataset(const TabularMdp& mdp, const BehaviorDistribution& mu,
                              std::size_t n, std::uint64_t seed);

/// Empirical kernel and reward. Unvisited pairs are absorbing with reward 0.
class EmpiricalModel {
public:
    EmpiricalModel(std::size_t num_states, std::size_t num_actions, Vector kernel, Vector reward,
                   std::vector<std::uint64_t> counts);

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    std::span<const double> transition(std::size_t s, std::size_t a) const {
        return {kernel_.data() + (s * num_actions_ + a) * num_states_, num_states_};
    }
    double reward(std::size_t s, std::size_t a) const { return reward_[s * num_actions_ + a]; }
    std::uint64_t count(std::size_t s, std::size_t a) const { return counts_[s * num_actions_ + a]; }

    const Vector& kernel() const { return kernel_; }
    const Vector& rewards() const { return reward_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t total_count() const;

    /// The empirical MDP (P_hat, r_hat) with discount `gamma` and uniform rho.
    TabularMdp to_mdp(double gamma) const;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    Vector kernel_;
    Vector reward_;
    std::vector<std::uint64_t> counts_;
};

/// Count ratios N(s,a,s')/N(s,a). Throws std::invalid_argument when two
/// tuples at the same pair disagree on the reward.
EmpiricalModel estimate_model(const OfflineDataset& data);

/// `#S=<S>,A=<A>,seed=<seed>` header followed by `s,a,s_next,r` lines.
void save_dataset_csv(const OfflineDataset& data, const std::filesystem::path& path);
OfflineDataset load_dataset_csv(const std::filesystem::path& path);

}  // namespace drorl
