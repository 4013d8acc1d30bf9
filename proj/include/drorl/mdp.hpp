#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "drorl/errors.hpp"

namespace drorl {

using Vector = std::vector<double>;

/// V(s), indexed by state.
using ValueFunction = std::vector<double>;

/// pi(s), indexed by state; every entry is an action index.
using DeterministicPolicy = std::vector<std::size_t>;

/// Tolerance used when validating probability vectors.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Throws std::invalid_argument unless `p` is nonnegative and sums to one
/// within `tol`. `what` names the vector in the message.
void check_distribution(std::span<const double> p, const std::string& what,
                        double tol = kProbabilityTolerance);

/**
 * Ground-truth tabular MDP with deterministic rewards in [0, 1].
 *
 * The kernel is stored flat as P[(s * A + a) * S + s'] and the reward as
 * r[s * A + a]. All invariants are checked at construction; the object is
 * immutable afterwards.
 */
class TabularMdp {
public:
    TabularMdp(std::size_t num_states, std::size_t num_actions, Vector kernel, Vector reward,
               double gamma, Vector initial_dist);

    /// Same as above with a uniform initial distribution.
    TabularMdp(std::size_t num_states, std::size_t num_actions, Vector kernel, Vector reward,
               double gamma);

    std::size_t num_states() const { return num_states_; }
    std::size_t num_actions() const { return num_actions_; }
    double gamma() const { return gamma_; }

    std::span<const double> transition(std::size_t s, std::size_t a) const {
        return {kernel_.data() + (s * num_actions_ + a) * num_states_, num_states_};
    }
    double reward(std::size_t s, std::size_t a) const { return reward_[s * num_actions_ + a]; }

    const Vector& kernel() const { return kernel_; }
    const Vector& rewards() const { return reward_; }
    const Vector& initial_distribution() const { return rho_; }

    TabularMdp with_gamma(double gamma) const;

private:
    std::size_t num_states_;
    std::size_t num_actions_;
    Vector kernel_;
    Vector reward_;
    double gamma_;
    Vector rho_;
};

/// Throws std::invalid_argument unless `pi` has one in-range action per state.
void check_policy(const DeterministicPolicy& pi, std::size_t num_states, std::size_t num_actions);

/// Output of every value-iteration style solver in the library.
struct Solution {
    ValueFunction value;
    DeterministicPolicy policy;
    std::size_t iterations = 0;
    /// Upper bound on the sup-norm distance from `value` to the fixed point.
    double residual = 0.0;
};

struct IterationOptions {
    /// Constant starting value; V0 = 0 when unset.
    std::optional<double> initial_value;
    /// Called with every iterate after V0, in order.
    std::function<void(const ValueFunction&)> on_iterate;
    std::size_t max_iterations = 1'000'000;
};

/// Greedy values and argmax actions (lowest index on exact ties) of a
/// state-action evaluator q(s, a).
template <class QRow>
std::pair<ValueFunction, DeterministicPolicy> greedy_backup(std::size_t num_states,
                                                            std::size_t num_actions, QRow&& q) {
    ValueFunction next(num_states);
    DeterministicPolicy pi(num_states, 0);
    for (std::size_t s = 0; s < num_states; ++s) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < num_actions; ++a) {
            const double value = q(s, a);
            if (value > best) {
                best = value;
                pi[s] = a;
            }
        }
        next[s] = best;
    }
    return {std::move(next), std::move(pi)};
}

/**
 * Jacobi value iteration for any gamma-contraction.
 *
 * `bind(v)` returns the state-action evaluator q(s, a) of the backup at v;
 * every new V(s) reads only the previous iterate.
 *
 * Stops once gamma * |V_{k+1} - V_k|_inf <= tol * (1 - gamma) / 2, which bounds
 * the distance of V_{k+1} to the fixed point by tol / 2. The returned policy
 * is greedy with respect to the returned value.
 */
template <class Bind>
Solution iterate_to_fixed_point(std::size_t num_states, std::size_t num_actions, double gamma,
                                double tol, Bind&& bind, const IterationOptions& options = {}) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("tolerance must be positive");
    }
    ValueFunction v(num_states, options.initial_value.value_or(0.0));
    const double threshold = tol * (1.0 - gamma) / 2.0;
    for (std::size_t k = 1; k <= options.max_iterations; ++k) {
        auto next = greedy_backup(num_states, num_actions, bind(v)).first;
        double diff = 0.0;
        for (std::size_t s = 0; s < num_states; ++s) {
            diff = std::max(diff, std::abs(next[s] - v[s]));
        }
        v = std::move(next);
        if (options.on_iterate) {
            options.on_iterate(v);
        }
        if (gamma * diff <= threshold) {
            Solution out;
            out.policy = greedy_backup(num_states, num_actions, bind(v)).second;
            out.value = std::move(v);
            out.iterations = k;
            out.residual = gamma > 0.0 ? gamma * diff / (1.0 - gamma) : 0.0;
            return out;
        }
    }
    throw SolverError("value iteration did not reach tolerance " + std::to_string(tol) +
                      " within " + std::to_string(options.max_iterations) + " iterations");
}

/// One-step Bellman lookahead r(s,a) + gamma * P[s,a]^T v.
double q_value(const TabularMdp& mdp, std::size_t s, std::size_t a, const ValueFunction& v);

/// Optimal value within `tol` in sup-norm and its greedy policy.
Solution exact_value_iteration(const TabularMdp& mdp, double tol,
                               const IterationOptions& options = {});

/// Exact value of `pi` from the linear system (I - gamma P_pi) V = r_pi.
ValueFunction policy_evaluation(const TabularMdp& mdp, const DeterministicPolicy& pi);

/// rho^T v.
double scalar_value(std::span<const double> v, std::span<const double> rho);

/// Normalized discounted occupancy of a deterministic policy.
struct OccupancyMeasure {
    Vector state;         ///< d(s)
    Vector state_action;  ///< d(s, a) = d(s) 1{a = pi(s)}, flat s * A + a
};

OccupancyMeasure occupancy_measure(const TabularMdp& mdp, const DeterministicPolicy& pi);

struct ConcentrabilityReport {
    double clipped = 0.0;
    double unclipped = 0.0;
    double mu_min = 0.0;
    /// Set when a pair visited by the comparator has zero behavior mass.
    bool unbounded = false;
};

/// Clipped and unclipped single-policy concentrability of `pi_star` against
/// the behavior distribution `mu` (flat s * A + a).
ConcentrabilityReport concentrability(const TabularMdp& mdp, const DeterministicPolicy& pi_star,
                                      std::span<const double> mu);

}  // namespace drorl
