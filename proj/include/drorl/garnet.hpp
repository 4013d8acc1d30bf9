#pragma once

#include <cstdint>

#include "drorl/mdp.hpp"

namespace drorl {

inline constexpr double kDefaultGarnetGamma = 0.95;

/// Generated MDP plus the reward draws before rescaling to [0, 1].
struct GarnetInstance {
    TabularMdp mdp;
    Vector raw_reward;
};

/**
 * Garnet random MDP G(S, A).
 *
 * For each pair: omega, sigma, nu, psi ~ Uniform[0, 100]; S kernel entries
 * ~ Normal(omega, sigma), clamped at 0 and normalized (uniform row if all
 * clamp to 0); reward ~ Normal(nu, psi). Rewards are then rescaled affinely
 * over the whole grid to [0, 1] (all 0.5 when constant). rho is uniform.
 */
GarnetInstance garnet_instance(std::size_t num_states, std::size_t num_actions, std::uint64_t seed,
                               double gamma = kDefaultGarnetGamma);

TabularMdp generate_garnet(std::size_t num_states, std::size_t num_actions, std::uint64_t seed,
                           double gamma = kDefaultGarnetGamma);

}  // namespace drorl
