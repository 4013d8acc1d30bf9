#include "drorl/garnet.hpp"

#include <algorithm>
#include <random>

namespace drorl {

namespace {

double draw_normal(std::mt19937_64& rng, double mean, double stddev) {
    if (stddev <= 0.0) {
        return mean;
    }
    return std::normal_distribution<double>(mean, stddev)(rng);
}

}  // namespace

GarnetInstance garnet_instance(std::size_t num_states, std::size_t num_actions, std::uint64_t seed,
                               double gamma) {
    if (num_states < 2) {
        throw std::invalid_argument("Garnet needs at least 2 states");
    }
    if (num_actions < 1) {
        throw std::invalid_argument("Garnet needs at least 1 action");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> param(0.0, 100.0);

    const std::size_t S = num_states;
    const std::size_t A = num_actions;
    Vector kernel(S * A * S, 0.0);
    Vector raw(S * A, 0.0);
    for (std::size_t pair = 0; pair < S * A; ++pair) {
        const double omega = param(rng);
        const double sigma = param(rng);
        const double nu = param(rng);
        const double psi = param(rng);

        double* row = kernel.data() + pair * S;
        double total = 0.0;
        for (std::size_t next = 0; next < S; ++next) {
            row[next] = std::max(0.0, draw_normal(rng, omega, sigma));
            total += row[next];
        }
        if (total > 0.0) {
            std::for_each(row, row + S, [total](double& x) { x /= total; });
        } else {
            std::fill(row, row + S, 1.0 / static_cast<double>(S));
        }
        raw[pair] = draw_normal(rng, nu, psi);
    }

    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    Vector reward(S * A, 0.5);
    if (hi > lo) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            reward[i] = std::clamp((raw[i] - lo) / (hi - lo), 0.0, 1.0);
        }
    }
    return GarnetInstance{TabularMdp(S, A, std::move(kernel), std::move(reward), gamma), std::move(raw)};
}

TabularMdp generate_garnet(std::size_t num_states, std::size_t num_actions, std::uint64_t seed,
                           double gamma) {
    return garnet_instance(num_states, num_actions, seed, gamma).mdp;
}

}  // namespace drorl
