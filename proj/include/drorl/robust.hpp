#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drorl/mdp.hpp"
#include "drorl/offline_data.hpp"

namespace drorl {

enum class RadiusKind { Hoeffding, Bernstein };

std::string to_string(RadiusKind kind);

/// Radius family plus its confidence level delta, restricted to [1e-6, 0.5].
class RadiusStyle {
public:
    RadiusStyle(RadiusKind kind, double delta);

    RadiusKind kind() const { return kind_; }
    double delta() const { return delta_; }

private:
    RadiusKind kind_;
    double delta_;
};

/**
 * Per-pair L1 radii, flat s * A + a.
 *
 *   Hoeffding: min{2, sqrt(log(SA/delta) / (2 N(s,a)))}
 *   Bernstein: min{2, log(N/delta) / N(s,a)}
 *
 * Unvisited pairs get radius 2. Bernstein requires total_count >= 1.
 */
Vector radius_table(std::span<const std::uint64_t> counts, const RadiusStyle& style,
                    std::size_t num_states, std::size_t num_actions, std::uint64_t total_count);

/// Exact min of q^T v over {q in simplex : |q - p_hat|_1 <= radius}.
/// Radii above 2 behave as 2. O(S log S).
double support_function(std::span<const double> p_hat, double radius, std::span<const double> v);

enum class DualScaling {
    /// max_{0<=mu<=v} p_hat^T(v - mu) - R Span(v - mu)
    AsPrinted,
    /// Same with R/2 on the span term, the exact L1-ball dual.
    HalfRadius,
};

/// Dual form of the support function, maximized over the clipped vectors
/// min(v, theta) with theta at the entries of v (the maximizer has this
/// form). With HalfRadius it equals support_function.
double support_function_dual(std::span<const double> p_hat, double radius,
                             std::span<const double> v,
                             DualScaling scaling = DualScaling::AsPrinted);

/// Empirical model with an (s,a)-rectangular L1 uncertainty set around each row.
class EmpiricalRobustModel {
public:
    /// Radii from `style` and the model's counts.
    EmpiricalRobustModel(EmpiricalModel base, RadiusStyle style, double gamma);
    /// Explicit radii; each must lie in [0, 2].
    EmpiricalRobustModel(EmpiricalModel base, Vector radii, RadiusStyle style, double gamma);

    const EmpiricalModel& base() const { return base_; }
    const Vector& radii() const { return radii_; }
    double radius(std::size_t s, std::size_t a) const { return radii_[s * base_.num_actions() + a]; }
    const RadiusStyle& style() const { return style_; }
    double gamma() const { return gamma_; }
    std::size_t num_states() const { return base_.num_states(); }
    std::size_t num_actions() const { return base_.num_actions(); }

    /// Same model with every radius replaced by min(2, factor * radius).
    EmpiricalRobustModel scaled(double factor) const;

private:
    EmpiricalModel base_;
    Vector radii_;
    RadiusStyle style_;
    double gamma_;
};

/// r_hat(s,a) + gamma * sigma(P_hat[s,a], R[s,a], v) for every pair, flat s * A + a.
Vector robust_q_table(const EmpiricalRobustModel& model, const ValueFunction& v);

/// V(s) <- max_a r_hat(s,a) + gamma sigma(...), argmax with lowest index on ties.
std::pair<ValueFunction, DeterministicPolicy> robust_bellman_apply(const EmpiricalRobustModel& model,
                                                                   const ValueFunction& v);

/// Robust value iteration from V0 = 0 (or options.initial_value).
Solution robust_value_iteration(const EmpiricalRobustModel& model, double tol,
                                const IterationOptions& options = {});

/// A sampled action further than this from the max signals a solver bug.
inline constexpr double kSampledActionSlack = 1e-6;

/**
 * Robust value iteration whose output policy, at every state with N(s) > 0,
 * is a maximizer among actions with N(s,a) > 0.
 *
 * Throws SolverError when no sampled action lies within kSampledActionSlack
 * of the backup max at such a state.
 */
Solution robust_value_iteration_bernstein(const EmpiricalRobustModel& model,
                                          const OfflineDataset& data, double tol,
                                          const IterationOptions& options = {});

/// Policy-extraction step of robust_value_iteration_bernstein, exposed for
/// tests: picks per state from the flat Q table.
DeterministicPolicy sampled_greedy_policy(std::span<const double> q, std::size_t num_states,
                                          std::size_t num_actions,
                                          std::span<const std::uint64_t> pair_counts,
                                          std::span<const std::uint64_t> state_counts);

}  // namespace drorl
